#include "alearn/service.hpp"

#include "alearn/backends.hpp"
#include "alearn/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace alearn {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration and datasets
// ---------------------------------------------------------------------------

ServiceConfig ServiceConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  ServiceConfig c;
  try {
    const auto j = json::parse(in);
    if (j.contains("host")) c.host = j.at("host").get<std::string>();
    if (j.contains("port")) c.port = j.at("port").get<int>();
    if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "service config: " + std::string(e.what()));
  }
  return c;
}

void ServiceConfig::apply_environment() {
  if (const char* v = std::getenv("ALEARN_HOST")) host = v;
  if (const char* v = std::getenv("ALEARN_PORT")) {
    try {
      port = std::stoi(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "ALEARN_PORT is not a number");
    }
  }
  if (const char* v = std::getenv("ALEARN_DATA_DIR")) data_dir = v;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

bool valid_name(std::string_view name) {
  if (name.empty() || name.size() > 64 || name.front() == '.') return false;
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
  }
  return true;
}

std::string_view extension(DatasetFormat format) { return format == DatasetFormat::Csv ? ".csv" : ".jsonl"; }

std::set<std::string> distinct_labels(std::string_view content, DatasetFormat format) {
  std::set<std::string> out;
  if (format == DatasetFormat::Csv) {
    auto records = parse_csv(content);
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].size() == 3) {
        auto label = trim(records[i][2]);
        if (!label.empty()) out.insert(std::move(label));
      }
    }
  } else {
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      try {
        const auto j = json::parse(line);
        if (j.contains("label") && j["label"].is_string()) {
          auto label = trim(j["label"].get<std::string>());
          if (!label.empty()) out.insert(std::move(label));
        }
      } catch (const json::exception&) {
        // reported by the real parse below
      }
    }
  }
  return out;
}

}  // namespace

DatasetEntry load_dataset_pair(const std::string& name, std::string_view train_content,
                               std::optional<std::string_view> test_content, DatasetFormat format,
                               const std::vector<std::string>& labels) {
  LabelSchema schema;
  if (!labels.empty()) {
    schema = LabelSchema(labels);
  } else {
    auto distinct = distinct_labels(train_content, format);
    if (test_content) distinct.merge(distinct_labels(*test_content, format));
    if (distinct.size() < 2) {
      throw Error(ErrorCode::SchemaTooSmall, "found " + std::to_string(distinct.size()) +
                                                 " distinct labels, need at least 2");
    }
    schema = LabelSchema({distinct.begin(), distinct.end()});
  }
  DatasetEntry entry{name, schema, parse_dataset(train_content, format, schema).documents, {}};
  if (test_content) entry.test = parse_dataset(*test_content, format, schema).documents;

  std::set<std::string_view> ids;
  for (const auto* group : {&entry.train, &entry.test}) {
    for (const auto& d : *group) {
      if (!ids.insert(d.doc_id).second) {
        throw Error(ErrorCode::DuplicateId, "id '" + d.doc_id + "' appears in both train and test");
      }
    }
  }
  return entry;
}

std::vector<std::string> ingest_dataset(const fs::path& data_dir, const std::string& name,
                                        const fs::path& train_path, const std::optional<fs::path>& test_path,
                                        DatasetFormat format) {
  if (!valid_name(name)) throw Error(ErrorCode::InvalidConfig, "dataset name '" + name + "' is not a valid identifier");
  const auto train = read_file(train_path);
  std::optional<std::string> test;
  if (test_path) test = read_file(*test_path);
  const auto entry = load_dataset_pair(name, train,
                                       test ? std::optional<std::string_view>(*test) : std::nullopt, format);

  const auto dir = data_dir / "datasets" / name;
  fs::create_directories(dir);
  write_file_atomic(dir / ("train" + std::string(extension(format))), train);
  if (test) write_file_atomic(dir / ("test" + std::string(extension(format))), *test);
  const json meta = {{"format", format == DatasetFormat::Csv ? "csv" : "jsonl"}, {"labels", entry.schema.labels()}};
  write_file_atomic(dir / "meta.json", meta.dump(2));

  if (const auto* descriptor = find_descriptor(name)) {
    return check_descriptor(*descriptor, entry.train.size(), entry.test.size(), entry.schema.size());
  }
  return {};
}

// ---------------------------------------------------------------------------
// JSON views
// ---------------------------------------------------------------------------

json session_summary(const SessionState& state, const std::string& dataset) {
  const auto& last = state.curve.back();
  return {
      {"v", 1},
      {"session_id", state.session_id},
      {"dataset", dataset},
      {"round", state.round},
      {"labels_used", state.labels_used()},
      {"budget", state.config.max_labels},
      {"planned_rounds", state.config.planned_rounds()},
      {"batch_size", state.config.batch_size},
      {"strategy", to_string(state.config.strategy)},
      {"protocol", to_string(state.config.protocol)},
      {"labels", state.schema().labels()},
      {"pool_size", state.selection_pool().size()},
      {"eval_size", state.eval.size()},
      {"metrics",
       {{"n_labels", last.n_labels},
        {"accuracy", last.accuracy},
        {"precision_macro", last.precision_macro},
        {"recall_macro", last.recall_macro}}},
  };
}

json export_bundle(const SessionState& state) {
  return {
      {"v", 1},
      {"session_id", state.session_id},
      {"model", state.model->to_json()},
      {"vocabulary", state.vocab().to_json()},
      {"curve", curve_to_json(state.curve, true)},
      {"annotations_jsonl", annotations_to_jsonl(state.labeled, state.schema())},
  };
}

namespace {

HttpResponse respond(int status, json body) {
  if (!body.contains("v")) body["v"] = 1;
  return {status, body.dump()};
}

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
  return respond(status, {{"v", 1}, {"error", {{"code", code}, {"message", message}}}});
}

HttpResponse error_response(int status, const Error& e) { return error_response(status, to_string(e.code()), e.what()); }

std::vector<std::string_view> split_path(std::string_view path) {
  if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto next = path.find('/', pos);
    const auto end = next == std::string_view::npos ? path.size() : next;
    if (end > pos) parts.push_back(path.substr(pos, end - pos));
    pos = end + 1;
  }
  return parts;
}

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("request body: ") + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Service
// ---------------------------------------------------------------------------

struct Service::Slot {
  std::string dataset;
  fs::path log;
  std::mutex mutation;

  std::shared_ptr<const SessionState> load() const {
    std::lock_guard lock(pointer_mutex);
    return committed;
  }
  void store(std::shared_ptr<const SessionState> next) {
    std::lock_guard lock(pointer_mutex);
    committed = std::move(next);
  }

private:
  mutable std::mutex pointer_mutex;
  std::shared_ptr<const SessionState> committed;
};

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  fs::create_directories(config_.data_dir / "datasets");
  fs::create_directories(config_.data_dir / "sessions");
  load_existing();
}

Service::~Service() = default;

fs::path Service::session_log(const std::string& id) const { return config_.data_dir / "sessions" / (id + ".jsonl"); }

void Service::load_existing() {
  for (const auto& dir : fs::directory_iterator(config_.data_dir / "datasets")) {
    if (!dir.is_directory()) continue;
    const auto name = dir.path().filename().string();
    try {
      const auto meta = json::parse(read_file(dir.path() / "meta.json"));
      const auto format = parse_format(meta.at("format").get<std::string>());
      const auto ext = std::string(extension(format));
      const auto train = read_file(dir.path() / ("train" + ext));
      std::optional<std::string> test;
      if (fs::exists(dir.path() / ("test" + ext))) test = read_file(dir.path() / ("test" + ext));
      add_dataset(load_dataset_pair(name, train, test ? std::optional<std::string_view>(*test) : std::nullopt,
                                    format, meta.at("labels").get<std::vector<std::string>>()));
    } catch (const std::exception& e) {
      std::cerr << "skipping dataset " << name << ": " << e.what() << '\n';
    }
  }

  for (const auto& file : fs::directory_iterator(config_.data_dir / "sessions")) {
    if (file.path().extension() != ".jsonl") continue;
    try {
      auto replayed = replay_session_log(file.path());
      auto slot = std::make_shared<Slot>();
      slot->dataset = replayed.seed.dataset;
      slot->log = file.path();
      const auto id = replayed.state.session_id;
      slot->store(std::make_shared<const SessionState>(std::move(replayed.state)));
      if (id.size() > 1 && id[0] == 's') {
        try {
          next_session_ = std::max(next_session_, static_cast<std::size_t>(std::stoul(id.substr(1))) + 1);
        } catch (const std::exception&) {
        }
      }
      sessions_.emplace(id, std::move(slot));
    } catch (const std::exception& e) {
      std::cerr << "skipping session log " << file.path() << ": " << e.what() << '\n';
    }
  }
}

void Service::add_dataset(DatasetEntry entry) {
  std::lock_guard lock(registry_mutex_);
  auto name = entry.name;
  datasets_[name] = std::make_shared<const DatasetEntry>(std::move(entry));
}

std::shared_ptr<Service::Slot> Service::find_session(std::string_view id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  const auto parts = split_path(path);
  try {
    if (parts.size() == 1 && parts[0] == "health" && method == "GET") return respond(200, {{"status", "ok"}});
    if (parts.size() == 1 && parts[0] == "datasets") {
      if (method == "GET") return list_datasets();
      if (method == "POST") return post_dataset(body);
      return error_response(405, "MethodNotAllowed", std::string(method));
    }
    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1) {
        if (method == "GET") return list_sessions();
        if (method == "POST") return create_session(body);
        return error_response(405, "MethodNotAllowed", std::string(method));
      }
      auto slot = find_session(parts[1]);
      if (!slot) return error_response(404, "UnknownSession", "no session '" + std::string(parts[1]) + "'");
      if (parts.size() == 2 && method == "GET") return get_summary(*slot);
      if (parts.size() == 3) {
        if (parts[2] == "batch" && method == "GET") return get_batch(*slot);
        if (parts[2] == "annotations" && method == "POST") return post_annotations(*slot, body);
        if (parts[2] == "metrics" && method == "GET") return get_metrics(*slot);
        if (parts[2] == "export" && method == "GET") return get_export(*slot);
      }
    }
    return error_response(404, "NotFound", std::string(method) + " " + std::string(path));
  } catch (const Error& e) {
    return error_response(e.code() == ErrorCode::Io ? 500 : 400, e);
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

HttpResponse Service::list_datasets() const {
  json items = json::array();
  std::lock_guard lock(registry_mutex_);
  for (const auto& [name, entry] : datasets_) {
    items.push_back({{"name", name},
                     {"labels", entry->schema.labels()},
                     {"train_rows", entry->train.size()},
                     {"test_rows", entry->test.size()}});
  }
  return respond(200, {{"datasets", std::move(items)}});
}

HttpResponse Service::post_dataset(std::string_view body) {
  const auto req = parse_body(body);
  if (!req.is_object()) return error_response(400, "Parse", "body must be a JSON object");
  std::string name;
  std::string train;
  std::optional<std::string> test;
  std::vector<std::string> labels;
  DatasetFormat format = DatasetFormat::Csv;
  try {
    name = req.at("name").get<std::string>();
    train = req.at("train").get<std::string>();
    if (req.contains("test") && !req["test"].is_null()) test = req["test"].get<std::string>();
    if (req.contains("labels")) labels = req["labels"].get<std::vector<std::string>>();
    format = parse_format(req.value("format", "csv"));
  } catch (const json::exception& e) {
    return error_response(400, "Parse", e.what());
  }
  if (!valid_name(name)) return error_response(400, "InvalidConfig", "invalid dataset name '" + name + "'");
  {
    std::lock_guard lock(registry_mutex_);
    if (datasets_.contains(name)) return error_response(409, "DatasetExists", "dataset '" + name + "' already exists");
  }

  DatasetEntry entry;
  try {
    entry = load_dataset_pair(name, train, test ? std::optional<std::string_view>(*test) : std::nullopt, format, labels);
  } catch (const Error& e) {
    return error_response(422, e);
  }

  const auto dir = config_.data_dir / "datasets" / name;
  fs::create_directories(dir);
  const auto ext = std::string(extension(format));
  write_file_atomic(dir / ("train" + ext), train);
  if (test) write_file_atomic(dir / ("test" + ext), *test);
  write_file_atomic(dir / "meta.json",
                    json{{"format", format == DatasetFormat::Csv ? "csv" : "jsonl"}, {"labels", entry.schema.labels()}}.dump(2));

  json warnings = json::array();
  if (const auto* d = find_descriptor(name)) {
    for (auto& w : check_descriptor(*d, entry.train.size(), entry.test.size(), entry.schema.size())) warnings.push_back(w);
  }
  json summary = {{"name", name},
                  {"labels", entry.schema.labels()},
                  {"train_rows", entry.train.size()},
                  {"test_rows", entry.test.size()},
                  {"warnings", std::move(warnings)}};
  add_dataset(std::move(entry));
  return respond(201, std::move(summary));
}

HttpResponse Service::create_session(std::string_view body) {
  const auto req = parse_body(body);
  if (!req.is_object() || !req.contains("dataset") || !req["dataset"].is_string()) {
    return error_response(400, "Parse", "body needs a string 'dataset'");
  }
  const auto dataset_name = req["dataset"].get<std::string>();
  SessionConfig config;
  try {
    config = SessionConfig::from_json(req.value("config", json::object()));
    config.validate();
  } catch (const Error& e) {
    return error_response(400, e);
  }
  if (config.strategy == Strategy::MisclassifiedFirst) {
    return error_response(400, "InvalidConfig", "misclassified_first needs gold labels and is not offered to annotation sessions");
  }

  std::shared_ptr<const DatasetEntry> dataset;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = datasets_.find(dataset_name);
    if (it == datasets_.end()) return error_response(404, "UnknownDataset", "no dataset '" + dataset_name + "'");
    dataset = it->second;
  }

  SessionSeed seed;
  seed.dataset = dataset_name;
  seed.schema = dataset->schema;
  seed.config = config;
  seed.timestamp = utc_now_iso8601();
  try {
    if (!dataset->test.empty()) {
      seed.pool = config.protocol == Protocol::Pool ? dataset->train : std::vector<Document>{};
      seed.eval = dataset->test;
    } else {
      const double fraction = req.value("eval_fraction", 0.5);
      auto parts = split(dataset->train, fraction, config.seed);
      if (config.protocol == Protocol::Pool) seed.pool = std::move(parts.pool);
      seed.eval = std::move(parts.eval);
    }

    if (req.contains("cold_start")) {
      const auto& cs = req["cold_start"];
      ColdStartFn fn;
      if (cs.contains("hints")) {
        fn = lexical_cold_start(seed.schema, cs["hints"].get<LabelHints>());
      } else if (cs.contains("backend")) {
        const auto& b = cs["backend"];
        BackendDescriptor backend;
        backend.name = b.value("name", "external");
        backend.endpoint_url = b.at("endpoint_url").get<std::string>();
        backend.timeout = std::chrono::milliseconds(b.value("timeout_ms", 5000));
        backend.max_batch = b.value("max_batch", std::size_t{64});
        backend.validate();
        fn = external_cold_start(backend, seed.schema);
      }
      if (fn) {
        const auto& docs = seed.config.protocol == Protocol::Paper ? seed.eval : seed.pool;
        std::vector<Document> all = docs;
        if (seed.config.protocol == Protocol::Pool) all.insert(all.end(), seed.eval.begin(), seed.eval.end());
        try {
          if (auto rows = fn(all)) {
            for (std::size_t i = 0; i < all.size(); ++i) seed.cold_start[all[i].doc_id] = std::move((*rows)[i]);
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::BackendProtocolError) throw;
          std::cerr << "cold start backend failed, using the zero model: " << e.what() << '\n';
        }
      }
    }
  } catch (const json::exception& e) {
    return error_response(400, "Parse", e.what());
  } catch (const Error& e) {
    return error_response(400, e);
  }

  auto slot = std::make_shared<Slot>();
  slot->dataset = dataset_name;
  {
    std::lock_guard lock(registry_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%04zu", next_session_++);
    seed.session_id = buf;
  }
  slot->log = session_log(seed.session_id);

  std::shared_ptr<const SessionState> state;
  try {
    state = std::make_shared<const SessionState>(open_session(seed));
  } catch (const Error& e) {
    return error_response(400, e);
  }
  append_events(slot->log, {created_event(seed), evaluated_event(*state, 0)});
  slot->store(state);
  {
    std::lock_guard lock(registry_mutex_);
    sessions_.emplace(seed.session_id, slot);
  }
  return respond(201, session_summary(*state, dataset_name));
}

HttpResponse Service::list_sessions() const {
  std::vector<std::pair<std::string, std::shared_ptr<Slot>>> slots;
  {
    std::lock_guard lock(registry_mutex_);
    slots.assign(sessions_.begin(), sessions_.end());
  }
  json items = json::array();
  for (const auto& [id, slot] : slots) items.push_back(session_summary(*slot->load(), slot->dataset));
  return respond(200, {{"sessions", std::move(items)}});
}

HttpResponse Service::get_summary(const Slot& slot) const {
  return respond(200, session_summary(*slot.load(), slot.dataset));
}

HttpResponse Service::get_batch(const Slot& slot) const {
  const auto state = slot.load();
  std::vector<BatchItem> batch;
  try {
    batch = next_batch(*state);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BudgetExhausted || e.code() == ErrorCode::PoolExhausted) return error_response(409, e);
    throw;
  }
  json items = json::array();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& p = batch[i].prediction;
    items.push_back({{"position", i},
                     {"doc_id", batch[i].doc.doc_id},
                     {"text", batch[i].doc.text},
                     {"probs", p.probs},
                     {"predicted", p.predicted},
                     {"predicted_label", state->schema().name(p.predicted)},
                     {"confidence", p.confidence},
                     {"entropy", p.entropy_nats},
                     {"entropy_norm", p.entropy_norm}});
  }
  return respond(200, {{"session_id", state->session_id},
                       {"round", state->round},
                       {"labels", state->schema().labels()},
                       {"items", std::move(items)}});
}

HttpResponse Service::post_annotations(Slot& slot, std::string_view body) {
  std::unique_lock lock(slot.mutation, std::try_to_lock);
  if (!lock.owns_lock()) return error_response(409, "SessionBusy", "another submission is in flight");
  if (config_.submit_hold.count() > 0) std::this_thread::sleep_for(config_.submit_hold);

  const auto state = slot.load();
  const auto req = parse_body(body);
  const json& rows = req.is_array() ? req : req.value("annotations", json());
  if (!rows.is_array() || rows.empty()) return error_response(422, "EmptyBatch", "no annotations in body");

  std::vector<BatchItem> batch;
  try {
    batch = next_batch(*state);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BudgetExhausted || e.code() == ErrorCode::PoolExhausted) return error_response(409, e);
    throw;
  }
  std::set<std::string> in_batch;
  for (const auto& item : batch) in_batch.insert(item.doc.doc_id);

  std::vector<LabelAssignment> labels;
  for (const auto& row : rows) {
    if (!row.is_object() || !row.contains("doc_id") || !row["doc_id"].is_string() || !row.contains("label")) {
      return error_response(422, "Parse", "each annotation needs doc_id and label");
    }
    const auto id = row["doc_id"].get<std::string>();
    if (!in_batch.contains(id)) {
      return error_response(422, "NotInPool", "document '" + id + "' is not in the current batch");
    }
    const auto& label = row["label"];
    std::optional<LabelIndex> index;
    if (label.is_string()) {
      index = state->schema().find(trim(label.get<std::string>()));
    } else if (label.is_number_unsigned() && label.get<std::size_t>() < state->schema().size()) {
      index = label.get<std::size_t>();
    }
    if (!index) return error_response(422, "UnknownLabel", "label " + label.dump() + " for '" + id + "' is not in the schema");
    labels.push_back({id, *index});
  }

  std::shared_ptr<const SessionState> next;
  try {
    next = std::make_shared<const SessionState>(submit_annotations(*state, labels, AnnotationSource::Human, utc_now_iso8601()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BudgetExhausted) return error_response(409, e);
    return error_response(422, e);
  }
  append_events(slot.log, {annotated_event(*next, next->round), evaluated_event(*next, next->round)});
  slot.store(next);

  auto metrics = round_to_json(next->curve.back());
  metrics["round"] = next->round;
  metrics["session_id"] = next->session_id;
  return respond(200, std::move(metrics));
}

HttpResponse Service::get_metrics(const Slot& slot) const {
  const auto state = slot.load();
  return respond(200, {{"session_id", state->session_id}, {"curve", curve_to_json(state->curve)}});
}

HttpResponse Service::get_export(const Slot& slot) const { return respond(200, export_bundle(*slot.load())); }

// ---------------------------------------------------------------------------
// HTTP binding
// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    // httplib's default also sets SO_REUSEPORT, which lets a second server
    // share an occupied port instead of failing to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      auto out = service.handle(req.method, req.path, req.body);
      res.status = out.status;
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_content(out.body, "application/json; charset=utf-8");
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

bool HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
    return port_ > 0;
  }
  if (!impl_->server.bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }
void HttpServer::stop() { impl_->server.stop(); }

}  // namespace alearn
