#include "alearn/commands.hpp"
#include "alearn/service.hpp"

#include "../support/mock_backend.hpp"
#include "../support/temp_dir.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace alearn;
using fixtures::TempDir;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "alearn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Shared synthetic inputs for the CLI cases.
struct Inputs {
  TempDir dir{"cli-inputs"};
  Inputs() {
    const auto r = cli({"synth", "--out-dir", dir.path().string(), "--pool-size", "300", "--eval-size", "200"});
    REQUIRE(r.code == 0);
  }
  std::string pool() const { return (dir / "pool.csv").string(); }
  std::string eval() const { return (dir / "eval.csv").string(); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth writes both files") {
    Inputs in;
    CHECK(lines(slurp(in.pool())).size() == 301);
    CHECK(lines(slurp(in.eval())).front() == "id,text,label");
  }

  TEST_CASE("bench writes a 16-row curve and reruns byte-identically") {
    Inputs in;
    TempDir out("cli-bench");
    const std::vector<std::string> args{"bench", "--dataset", in.pool(), "--test", in.eval(), "--protocol",
                                        "pool_protocol", "--strategy", "max_entropy", "--seed", "42",
                                        "--out-dir", (out / "a").string(), "--svg"};
    REQUIRE(cli(args).code == 0);
    const auto curve = lines(slurp(out / "a" / "curve_seed42.csv"));
    REQUIRE(curve.size() == 17);
    CHECK(curve[0] == "n_labels,accuracy,precision_macro,recall_macro");
    CHECK(curve[1].rfind("0,", 0) == 0);
    CHECK(curve[16].rfind("150,", 0) == 0);
    CHECK(std::filesystem::exists(out / "a" / "accuracy.svg"));

    auto again = args;
    again[again.size() - 2] = (out / "b").string();
    REQUIRE(cli(again).code == 0);
    CHECK(slurp(out / "a" / "curve_seed42.csv") == slurp(out / "b" / "curve_seed42.csv"));
    CHECK(slurp(out / "a" / "summary.csv") == slurp(out / "b" / "summary.csv"));
  }

  TEST_CASE("summary aggregates per-seed curves") {
    Inputs in;
    TempDir out("cli-seeds");
    REQUIRE(cli({"bench", "--dataset", in.pool(), "--test", in.eval(), "--protocol", "pool", "--strategy", "random",
                 "--seed", "1", "--seed", "2", "--max-labels", "50", "--out-dir", out.path().string()})
                .code == 0);
    const auto s1 = lines(slurp(out / "curve_seed1.csv"));
    const auto s2 = lines(slurp(out / "curve_seed2.csv"));
    const auto summary = lines(slurp(out / "summary.csv"));
    REQUIRE(summary.size() == 7);
    for (std::size_t r = 1; r < summary.size(); ++r) {
      double a1 = 0, a2 = 0, mean = 0, lo = 0, hi = 0;
      std::sscanf(s1[r].c_str(), "%*u,%lf", &a1);
      std::sscanf(s2[r].c_str(), "%*u,%lf", &a2);
      std::sscanf(summary[r].c_str(), "%*u,%lf,%lf,%lf", &mean, &lo, &hi);
      // Per-seed values are printed to 6 decimals, so allow one rounding step.
      CHECK(std::abs(mean - (a1 + a2) / 2.0) <= 1e-6);
      CHECK(lo == std::min(a1, a2));
      CHECK(hi == std::max(a1, a2));
    }
  }

  TEST_CASE("compare writes one block per strategy and seed") {
    Inputs in;
    TempDir out("cli-compare");
    std::vector<std::string> args{"compare", "--dataset", in.pool(), "--test", in.eval(), "--protocol",
                                  "pool_protocol", "--strategy", "max_entropy,random"};
    for (const char* s : {"1", "2", "3", "4", "5"}) {
      args.push_back("--seed");
      args.push_back(s);
    }
    args.push_back("--out-dir");
    args.push_back(out.path().string());
    REQUIRE(cli(args).code == 0);
    const auto rows = lines(slurp(out / "compare.csv"));
    CHECK(rows.size() == 1 + 2 * 5 * 16);
    CHECK(rows[0] == "strategy,seed,n_labels,accuracy,precision_macro,recall_macro");
  }

  TEST_CASE("configuration errors exit with 2") {
    Inputs in;
    TempDir out("cli-config");
    CHECK(cli({"compare", "--dataset", in.pool(), "--strategy", "random", "--out-dir", out.path().string()}).code == 2);
    CHECK(cli({"bench", "--dataset", in.pool(), "--strategy", "sideways", "--out-dir", out.path().string()}).code == 2);
    CHECK(cli({"bench", "--dataset", in.pool(), "--max-labels", "155", "--out-dir", out.path().string()}).code == 2);
    CHECK(cli({"bench", "--out-dir", out.path().string()}).code == 2);
    CHECK(cli({"nonsense"}).code == 2);
  }

  TEST_CASE("misclassified_first without pool gold is a configuration error") {
    TempDir dir("cli-nogold");
    {
      std::ofstream pool(dir / "pool.csv");
      pool << "id,text,label\n";
      for (int i = 0; i < 30; ++i) pool << "p" << i << ",word" << i % 3 << " other" << i << ",\n";
      std::ofstream eval(dir / "eval.csv");
      eval << "id,text,label\n";
      for (int i = 0; i < 20; ++i) eval << "e" << i << ",word" << i % 3 << " thing," << (i % 2 ? "a" : "b") << "\n";
    }
    const auto r = cli({"bench", "--dataset", (dir / "pool.csv").string(), "--test", (dir / "eval.csv").string(),
                        "--protocol", "pool_protocol", "--strategy", "misclassified_first", "--max-labels", "20",
                        "--out-dir", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK_FALSE(std::filesystem::exists(dir / "out" / "summary.csv"));
  }

  TEST_CASE("dataset errors exit with 3") {
    TempDir dir("cli-dataset");
    CHECK(cli({"bench", "--dataset", (dir / "missing.csv").string(), "--out-dir", (dir / "o").string()}).code == 3);
    {
      std::ofstream bad(dir / "dup.csv");
      bad << "id,text,label\n1,a,x\n1,b,y\n";
    }
    CHECK(cli({"bench", "--dataset", (dir / "dup.csv").string(), "--out-dir", (dir / "o").string()}).code == 3);
    CHECK(cli({"export", "--log", (dir / "nope.jsonl").string(), "--out-dir", (dir / "o").string()}).code == 3);
  }

  TEST_CASE("serve exits with 4 when the port is taken") {
    TempDir dir("cli-serve");
    fixtures::MockBackend occupant([](const httplib::Request&, httplib::Response&) {});
    const auto r = cli({"serve", "--host", "127.0.0.1", "--port", std::to_string(occupant.port()), "--data-dir",
                        dir.path().string()});
    CHECK(r.code == 4);
  }

  TEST_CASE("export rebuilds a session from its log") {
    Inputs in;
    TempDir data("cli-export");
    {
      ServiceConfig cfg;
      cfg.data_dir = data.path();
      Service svc(cfg);
      const nlohmann::json ds = {{"name", "synth"}, {"train", slurp(in.pool())}};
      REQUIRE(svc.handle("POST", "/datasets", ds.dump()).status == 201);
      REQUIRE(svc.handle("POST", "/sessions", nlohmann::json{{"dataset", "synth"}}.dump()).status == 201);
      for (int round = 0; round < 3; ++round) {
        const auto batch = nlohmann::json::parse(svc.handle("GET", "/sessions/s0001/batch", "").body);
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& item : batch["items"]) rows.push_back({{"doc_id", item["doc_id"]}, {"label", "class_1"}});
        REQUIRE(svc.handle("POST", "/sessions/s0001/annotations", nlohmann::json{{"annotations", rows}}.dump()).status ==
                200);
      }
    }
    const auto out = data / "export";
    const auto r = cli({"export", "--log", (data / "sessions" / "s0001.jsonl").string(), "--out-dir", out.string()});
    REQUIRE(r.code == 0);
    const auto curve = lines(slurp(out / "curve.csv"));
    CHECK(curve.size() == 1 + 4);
    CHECK(lines(slurp(out / "annotations.jsonl")).size() == 30);
    const auto model = nlohmann::json::parse(slurp(out / "model.json"));
    CHECK(model["bias"].size() == 4);
    CHECK(nlohmann::json::parse(slurp(out / "summary.json"))["round"] == 3);
    CHECK(std::filesystem::exists(out / "vocabulary.json"));
  }
}
