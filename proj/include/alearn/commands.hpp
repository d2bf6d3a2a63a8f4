#pragma once

#include "alearn/evaluation.hpp"
#include "alearn/loop.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace alearn {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int dataset = 3;
inline constexpr int bind = 4;
}  // namespace exit_code

struct BenchSpec {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> test;
  std::optional<DatasetFormat> format;
  std::vector<std::string> labels;  // empty = infer
  std::vector<Strategy> strategies{Strategy::MaxEntropy};
  std::size_t batch_size = 10;
  std::size_t max_labels = 150;
  Protocol protocol = Protocol::Paper;
  std::vector<std::uint64_t> seeds{42};
  double noise = 0.0;
  double eval_fraction = 0.5;
  TrainConfig train;
  std::filesystem::path out_dir;
  bool svg = false;

  /// Throws InvalidConfig.
  void validate(bool comparing) const;
};

struct SeedCurve {
  Strategy strategy;
  std::uint64_t seed;
  LearningCurve curve;
};

/// Runs every (strategy, seed) pair; deterministic in the file bytes and spec.
std::vector<SeedCurve> run_bench_curves(const BenchSpec& spec);

/// Per-round mean/min/max across seeds.
std::string summary_csv(const std::vector<SeedCurve>& curves);
/// Long format `strategy,seed,n_labels,accuracy,precision_macro,recall_macro`.
std::string compare_csv(const std::vector<SeedCurve>& curves);
/// Self-contained SVG line chart of one metric, one series per curve.
std::string curve_svg(const std::vector<SeedCurve>& curves, std::string_view metric);

/// Entry point shared by the `alearn` binary and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace alearn
