#include "alearn/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return alearn::run_cli(argc, argv, std::cout, std::cerr); }
