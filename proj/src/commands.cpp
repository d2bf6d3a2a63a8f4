#include "alearn/commands.hpp"

#include "alearn/error.hpp"
#include "alearn/event_log.hpp"
#include "alearn/service.hpp"
#include "alearn/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace alearn {

namespace fs = std::filesystem;

void BenchSpec::validate(bool comparing) const {
  if (seeds.empty()) throw Error(ErrorCode::InvalidConfig, "at least one --seed is required");
  if (strategies.empty()) throw Error(ErrorCode::InvalidConfig, "no strategy given");
  if (comparing && strategies.size() < 2) throw Error(ErrorCode::InvalidConfig, "compare needs at least 2 strategies");
  if (!(noise >= 0.0 && noise <= 1.0)) throw Error(ErrorCode::InvalidConfig, "--noise must lie in [0, 1]");
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "--eval-fraction must lie in (0, 1)");
  }
  if (out_dir.empty()) throw Error(ErrorCode::InvalidConfig, "--out-dir is required");
  SessionConfig probe;
  probe.batch_size = batch_size;
  probe.max_labels = max_labels;
  probe.train = train;
  probe.validate();
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Writes through a temp file and rename; tracks outputs so a failed run can
// remove what it already produced.
class OutputSet {
public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, std::string_view content) {
    fs::create_directories(dir_);
    const auto path = dir_ / name;
    const auto tmp = fs::path(path.string() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
    written_.push_back(path);
  }

  void discard() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
  }

private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidBatchSize:
      return exit_code::config;
    case ErrorCode::Io:
    case ErrorCode::Parse:
    case ErrorCode::DuplicateId:
    case ErrorCode::EmptyText:
    case ErrorCode::UnknownLabel:
    case ErrorCode::SchemaTooSmall:
    case ErrorCode::MissingGold:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::EmptyVocabulary:
    case ErrorCode::EmptyEval:
    case ErrorCode::PoolExhausted:
      return exit_code::dataset;
    default:
      return exit_code::failure;
  }
}

struct BenchData {
  LabelSchema schema;
  std::vector<Document> train;
  std::vector<Document> test;
};

BenchData load_bench_data(const BenchSpec& spec) {
  const auto format = spec.format.value_or(guess_format(spec.dataset));
  const auto train = read_file(spec.dataset);
  std::optional<std::string> test;
  if (spec.test) test = read_file(*spec.test);
  auto entry = load_dataset_pair(spec.dataset.filename().string(), train,
                                 test ? std::optional<std::string_view>(*test) : std::nullopt, format, spec.labels);
  return {std::move(entry.schema), std::move(entry.train), std::move(entry.test)};
}

// Fails early, before any output is produced, when the oracle or the
// strategy would lack gold labels.
void check_gold(const BenchSpec& spec, const BenchData& data) {
  if (spec.protocol != Protocol::Pool || !spec.test) return;
  for (const auto& d : data.train) {
    if (d.gold_label) continue;
    const bool needs_gold_strategy = std::find(spec.strategies.begin(), spec.strategies.end(),
                                               Strategy::MisclassifiedFirst) != spec.strategies.end();
    if (needs_gold_strategy) {
      throw Error(ErrorCode::InvalidConfig, "misclassified_first needs gold labels for every pool document ('" +
                                                d.doc_id + "' has none)");
    }
    throw Error(ErrorCode::MissingGold, "the simulated annotator needs gold for pool document '" + d.doc_id + "'");
  }
}

LearningCurve run_one(const BenchSpec& spec, const BenchData& data, Strategy strategy, std::uint64_t seed) {
  SessionConfig config;
  config.batch_size = spec.batch_size;
  config.max_labels = spec.max_labels;
  config.strategy = strategy;
  config.protocol = spec.protocol;
  config.train = spec.train;
  config.seed = seed;

  std::vector<Document> pool;
  std::vector<Document> eval;
  if (!data.test.empty()) {
    pool = data.train;
    eval = data.test;
  } else {
    auto parts = split(data.train, spec.eval_fraction, seed);
    pool = std::move(parts.pool);
    eval = std::move(parts.eval);
  }
  const auto& gold_source = spec.protocol == Protocol::Paper ? eval : pool;
  auto oracle = make_oracle(gold_source, data.schema.size(), spec.noise, seed);
  return run_benchmark(std::move(eval), std::move(pool), data.schema, config, oracle);
}

}  // namespace

std::vector<SeedCurve> run_bench_curves(const BenchSpec& spec) {
  const auto data = load_bench_data(spec);
  check_gold(spec, data);

  std::vector<SeedCurve> jobs;
  for (auto strategy : spec.strategies) {
    for (auto seed : spec.seeds) jobs.push_back({strategy, seed, {}});
  }
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i].curve = run_one(spec, data, jobs[i].strategy, jobs[i].seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, jobs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return jobs;
}

std::string summary_csv(const std::vector<SeedCurve>& curves) {
  std::string out =
      "n_labels,accuracy_mean,accuracy_min,accuracy_max,precision_macro_mean,precision_macro_min,"
      "precision_macro_max,recall_macro_mean,recall_macro_min,recall_macro_max\n";
  if (curves.empty()) return out;
  std::size_t rounds = curves.front().curve.size();
  for (const auto& c : curves) rounds = std::min(rounds, c.curve.size());

  for (std::size_t r = 0; r < rounds; ++r) {
    out += std::to_string(curves.front().curve[r].n_labels);
    for (auto metric : {&RoundMetrics::accuracy, &RoundMetrics::precision_macro, &RoundMetrics::recall_macro}) {
      double sum = 0.0;
      double lo = 1.0;
      double hi = 0.0;
      for (const auto& c : curves) {
        const double v = c.curve[r].*metric;
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      out += ',' + format_fixed6(sum / static_cast<double>(curves.size()));
      out += ',' + format_fixed6(lo);
      out += ',' + format_fixed6(hi);
    }
    out += '\n';
  }
  return out;
}

std::string compare_csv(const std::vector<SeedCurve>& curves) {
  std::string out = "strategy,seed,n_labels,accuracy,precision_macro,recall_macro\n";
  for (const auto& c : curves) {
    for (const auto& r : c.curve) {
      out += std::string(to_string(c.strategy)) + ',' + std::to_string(c.seed) + ',' + std::to_string(r.n_labels) +
             ',' + format_fixed6(r.accuracy) + ',' + format_fixed6(r.precision_macro) + ',' +
             format_fixed6(r.recall_macro) + '\n';
    }
  }
  return out;
}

std::string curve_svg(const std::vector<SeedCurve>& curves, std::string_view metric) {
  double RoundMetrics::*field = &RoundMetrics::accuracy;
  if (metric == "precision_macro") field = &RoundMetrics::precision_macro;
  if (metric == "recall_macro") field = &RoundMetrics::recall_macro;

  constexpr double width = 640, height = 400, left = 56, right = 160, top = 32, bottom = 48;
  constexpr const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::size_t max_x = 1;
  for (const auto& c : curves) {
    for (const auto& r : c.curve) max_x = std::max(max_x, r.n_labels);
  }
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double x) { return left + plot_w * x / static_cast<double>(max_x); };
  auto py = [&](double y) { return top + plot_h * (1.0 - y); };

  std::ostringstream s;
  char buf[128];
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << metric << " vs labels</text>\n";
  for (int k = 0; k <= 10; k += 2) {
    const double y = py(k / 10.0);
    std::snprintf(buf, sizeof buf, "%.1f", k / 10.0);
    s << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n<text x=\"" << left - 30 << "\" y=\"" << y + 4 << "\">" << buf << "</text>\n";
  }
  s << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << py(0) << "\" y2=\"" << py(0)
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << left + plot_w / 2 - 20 << "\" y=\"" << height - 12 << "\">n_labels</text>\n";
  s << "<text x=\"" << left + plot_w - 10 << "\" y=\"" << py(0) + 16 << "\">" << max_x << "</text>\n";
  s << "<text x=\"" << left - 4 << "\" y=\"" << py(0) + 16 << "\">0</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : curves[i].curve) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(static_cast<double>(r.n_labels)), py(r.*field));
      s << buf;
    }
    s << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(i);
    s << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << ly + 4 << "\" fill=\"" << color << "\">"
      << to_string(curves[i].strategy) << " seed " << curves[i].seed << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

namespace {

std::atomic<HttpServer*> g_server{nullptr};

extern "C" void handle_stop_signal(int) {
  if (auto* server = g_server.load()) server->stop();
}

void add_bench_options(CLI::App& cmd, BenchSpec& spec, std::string& format, std::string& protocol,
                       std::vector<std::string>& labels) {
  cmd.add_option("--dataset", spec.dataset, "Training/pool file (CSV id,text,label or JSONL)")->required();
  cmd.add_option("--test", spec.test, "Separate evaluation file");
  cmd.add_option("--format", format, "csv or jsonl (default: by extension)");
  cmd.add_option("--labels", labels, "Label schema in index order (default: inferred)")->delimiter(',');
  cmd.add_option("--batch-size", spec.batch_size, "Labels per round")->capture_default_str();
  cmd.add_option("--max-labels", spec.max_labels, "Label budget")->capture_default_str();
  cmd.add_option("--protocol", protocol, "paper_protocol or pool_protocol")->capture_default_str();
  cmd.add_option("--seed", spec.seeds, "Seed (repeatable)");
  cmd.add_option("--noise", spec.noise, "Simulated annotator error rate")->capture_default_str();
  cmd.add_option("--eval-fraction", spec.eval_fraction, "Eval share when no --test is given")->capture_default_str();
  cmd.add_option("--epochs", spec.train.epochs)->capture_default_str();
  cmd.add_option("--learning-rate", spec.train.learning_rate)->capture_default_str();
  cmd.add_option("--l2", spec.train.l2_lambda)->capture_default_str();
  cmd.add_option("--out-dir", spec.out_dir, "Output directory")->required();
  cmd.add_flag("--svg", spec.svg, "Also write one SVG chart per metric");
}

void finish_spec(BenchSpec& spec, const std::string& format, const std::string& protocol,
                 const std::vector<std::string>& labels, const std::vector<std::string>& strategies) {
  if (!format.empty()) spec.format = parse_format(format);
  spec.protocol = parse_protocol(protocol);
  spec.labels = labels;
  if (!strategies.empty()) {
    spec.strategies.clear();
    for (const auto& s : strategies) spec.strategies.push_back(parse_strategy(s));
  }
  if (spec.seeds.empty()) spec.seeds = {42};
}

void write_svgs(OutputSet& outputs, const std::vector<SeedCurve>& curves) {
  for (const char* metric : {"accuracy", "precision_macro", "recall_macro"}) {
    outputs.write(std::string(metric) + ".svg", curve_svg(curves, metric));
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Active-learning text classification: benchmarks, annotation service, exports"};
  app.require_subcommand(1);

  BenchSpec bench_spec;
  std::string bench_format, bench_protocol = "paper_protocol", bench_strategy = "max_entropy";
  std::vector<std::string> bench_labels;
  auto* bench = app.add_subcommand("bench", "Run seeded benchmarks with the simulated annotator");
  add_bench_options(*bench, bench_spec, bench_format, bench_protocol, bench_labels);
  bench->add_option("--strategy", bench_strategy, "max_entropy|least_confidence|misclassified_first|random")
      ->capture_default_str();

  BenchSpec cmp_spec;
  std::string cmp_format, cmp_protocol = "paper_protocol";
  std::vector<std::string> cmp_labels, cmp_strategies;
  auto* compare = app.add_subcommand("compare", "Compare strategies across seeds");
  add_bench_options(*compare, cmp_spec, cmp_format, cmp_protocol, cmp_labels);
  compare->add_option("--strategy", cmp_strategies, "Strategies to compare (repeatable or comma-separated)")
      ->delimiter(',')
      ->required();

  std::string serve_config_path, serve_host, serve_data_dir;
  int serve_port = -1;
  auto* serve = app.add_subcommand("serve", "Serve the annotation HTTP API");
  serve->add_option("--config", serve_config_path, "JSON file with host, port, data_dir");
  serve->add_option("--host", serve_host);
  serve->add_option("--port", serve_port);
  serve->add_option("--data-dir", serve_data_dir);

  fs::path export_log, export_out;
  auto* exp = app.add_subcommand("export", "Rebuild a session from its event log and export artifacts");
  exp->add_option("--log", export_log, "Session event log (JSONL)")->required();
  exp->add_option("--out-dir", export_out, "Output directory")->required();

  fs::path ingest_train, ingest_data_dir = "alearn-data";
  std::optional<fs::path> ingest_test;
  std::string ingest_name, ingest_format;
  auto* ingest = app.add_subcommand("ingest", "Validate a dataset and register it in a service data directory");
  ingest->add_option("--dataset", ingest_train)->required();
  ingest->add_option("--test", ingest_test);
  ingest->add_option("--format", ingest_format);
  ingest->add_option("--name", ingest_name, "Dataset name (descriptor names enable count checks)")->required();
  ingest->add_option("--data-dir", ingest_data_dir)->capture_default_str();

  fs::path synth_out;
  SyntheticSpec synth_spec;
  auto* synth = app.add_subcommand("synth", "Write the keyword-driven synthetic corpus as CSV files");
  synth->add_option("--out-dir", synth_out)->required();
  synth->add_option("--seed", synth_spec.seed)->capture_default_str();
  synth->add_option("--pool-size", synth_spec.pool_size)->capture_default_str();
  synth->add_option("--eval-size", synth_spec.eval_size)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) err << sub->help();
    return exit_code::config;
  }

  OutputSet* active_outputs = nullptr;
  try {
    if (bench->parsed()) {
      finish_spec(bench_spec, bench_format, bench_protocol, bench_labels, {bench_strategy});
      bench_spec.validate(false);
      const auto curves = run_bench_curves(bench_spec);
      OutputSet outputs(bench_spec.out_dir);
      active_outputs = &outputs;
      for (const auto& c : curves) outputs.write("curve_seed" + std::to_string(c.seed) + ".csv", curve_to_csv(c.curve));
      outputs.write("summary.csv", summary_csv(curves));
      if (bench_spec.svg) write_svgs(outputs, curves);
      active_outputs = nullptr;
      out << "wrote " << curves.size() << " curve(s) of " << curves.front().curve.size() << " rounds to "
          << bench_spec.out_dir.string() << '\n';
      return exit_code::ok;
    }

    if (compare->parsed()) {
      finish_spec(cmp_spec, cmp_format, cmp_protocol, cmp_labels, cmp_strategies);
      cmp_spec.validate(true);
      const auto curves = run_bench_curves(cmp_spec);
      OutputSet outputs(cmp_spec.out_dir);
      active_outputs = &outputs;
      outputs.write("compare.csv", compare_csv(curves));
      if (cmp_spec.svg) write_svgs(outputs, curves);
      active_outputs = nullptr;
      out << "wrote " << curves.size() << " curve(s) to " << (cmp_spec.out_dir / "compare.csv").string() << '\n';
      return exit_code::ok;
    }

    if (serve->parsed()) {
      ServiceConfig config = serve_config_path.empty() ? ServiceConfig{} : ServiceConfig::from_file(serve_config_path);
      config.apply_environment();
      if (!serve_host.empty()) config.host = serve_host;
      if (serve_port >= 0) config.port = serve_port;
      if (!serve_data_dir.empty()) config.data_dir = serve_data_dir;
      if (config.port < 0 || config.port > 65535) throw Error(ErrorCode::InvalidConfig, "port out of range");

      Service service(config);
      HttpServer server(service);
      if (!server.bind(config.host, config.port)) {
        err << "cannot listen on " << config.host << ':' << config.port << '\n';
        return exit_code::bind;
      }
      g_server = &server;
      std::signal(SIGINT, handle_stop_signal);
      std::signal(SIGTERM, handle_stop_signal);
      out << "listening on http://" << config.host << ':' << server.port() << " (data: " << config.data_dir.string()
          << ")" << std::endl;
      server.run();
      g_server = nullptr;
      return exit_code::ok;
    }

    if (exp->parsed()) {
      const auto replayed = replay_session_log(export_log);
      const auto& state = replayed.state;
      OutputSet outputs(export_out);
      active_outputs = &outputs;
      outputs.write("model.json", state.model->to_json().dump());
      outputs.write("vocabulary.json", state.vocab().to_json().dump());
      outputs.write("annotations.jsonl", annotations_to_jsonl(state.labeled, state.schema()));
      outputs.write("curve.csv", curve_to_csv(state.curve));
      outputs.write("summary.json", session_summary(state, replayed.seed.dataset).dump(2));
      active_outputs = nullptr;
      out << "session " << state.session_id << ": " << state.round << " round(s), " << state.curve.size()
          << " curve entries -> " << export_out.string() << '\n';
      return exit_code::ok;
    }

    if (ingest->parsed()) {
      const auto format = ingest_format.empty() ? guess_format(ingest_train) : parse_format(ingest_format);
      const auto warnings = ingest_dataset(ingest_data_dir, ingest_name, ingest_train, ingest_test, format);
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      out << "ingested " << ingest_name << " into " << (ingest_data_dir / "datasets" / ingest_name).string() << '\n';
      return exit_code::ok;
    }

    if (synth->parsed()) {
      const auto corpus = make_synthetic_corpus(synth_spec);
      auto to_csv = [&](const std::vector<Document>& docs) {
        std::string s = "id,text,label\n";
        for (const auto& d : docs) {
          s += csv_escape(d.doc_id) + ',' + csv_escape(d.text) + ',' + csv_escape(corpus.schema.name(*d.gold_label)) + '\n';
        }
        return s;
      };
      OutputSet outputs(synth_out);
      active_outputs = &outputs;
      outputs.write("pool.csv", to_csv(corpus.pool));
      outputs.write("eval.csv", to_csv(corpus.eval));
      active_outputs = nullptr;
      out << "wrote " << corpus.pool.size() << " pool and " << corpus.eval.size() << " eval rows to "
          << synth_out.string() << '\n';
      return exit_code::ok;
    }
  } catch (const Error& e) {
    if (active_outputs) active_outputs->discard();
    err << "error: " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    if (active_outputs) active_outputs->discard();
    err << "error: " << e.what() << '\n';
    return exit_code::failure;
  }
  return exit_code::failure;
}

}  // namespace alearn
