#include "alearn/event_log.hpp"

#include "alearn/error.hpp"

#include <fstream>
#include <sstream>

namespace alearn {

namespace {

nlohmann::json docs_to_json(const std::vector<Document>& docs, const LabelSchema& schema) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : docs) {
    nlohmann::json j = {{"id", d.doc_id}, {"text", d.text}};
    if (d.gold_label) j["label"] = schema.name(*d.gold_label);
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<Document> docs_from_json(const nlohmann::json& arr, const LabelSchema& schema) {
  std::vector<Document> out;
  out.reserve(arr.size());
  for (const auto& j : arr) {
    Document d{j.at("id").get<std::string>(), j.at("text").get<std::string>(), std::nullopt};
    if (j.contains("label")) d.gold_label = schema.index_of(j.at("label").get<std::string>());
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

nlohmann::json created_event(const SessionSeed& seed) {
  nlohmann::json j = {
      {"type", "created"},
      {"v", 1},
      {"session_id", seed.session_id},
      {"dataset", seed.dataset},
      {"labels", seed.schema.labels()},
      {"config", seed.config.to_json()},
      {"pool", docs_to_json(seed.pool, seed.schema)},
      {"eval", docs_to_json(seed.eval, seed.schema)},
      {"timestamp", seed.timestamp},
  };
  if (!seed.cold_start.empty()) j["cold_start"] = seed.cold_start;
  return j;
}

nlohmann::json annotated_event(const SessionState& state, std::size_t round) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& a : state.labeled) {
    if (a.round == round) rows.push_back(annotation_to_json(a, state.schema()));
  }
  return {{"type", "annotated"}, {"round", round}, {"annotations", std::move(rows)}};
}

nlohmann::json evaluated_event(const SessionState& state, std::size_t round) {
  return {{"type", "evaluated"}, {"round", round}, {"metrics", round_to_json(state.curve.at(round))}};
}

SessionState open_session(const SessionSeed& seed) {
  ColdStartFn cold;
  if (!seed.cold_start.empty()) {
    cold = [&seed](std::span<const Document> docs) -> std::optional<std::vector<std::vector<double>>> {
      std::vector<std::vector<double>> out;
      out.reserve(docs.size());
      for (const auto& d : docs) {
        auto it = seed.cold_start.find(d.doc_id);
        if (it == seed.cold_start.end()) return std::nullopt;
        out.push_back(it->second);
      }
      return out;
    };
  }
  return create_session(seed.pool, seed.eval, seed.schema, seed.config, seed.session_id, cold);
}

ReplayedSession replay_session_events(std::string_view jsonl) {
  std::optional<ReplayedSession> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  try {
    while (pos < jsonl.size()) {
      auto nl = jsonl.find('\n', pos);
      if (nl == std::string_view::npos) nl = jsonl.size();
      const auto line = jsonl.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

      const auto event = nlohmann::json::parse(line);
      const auto type = event.at("type").get<std::string>();
      if (type == "created") {
        if (out) throw Error(ErrorCode::Parse, "second created event at line " + std::to_string(line_no));
        SessionSeed seed;
        seed.session_id = event.at("session_id").get<std::string>();
        seed.dataset = event.at("dataset").get<std::string>();
        seed.schema = LabelSchema(event.at("labels").get<std::vector<std::string>>());
        seed.config = SessionConfig::from_json(event.at("config"));
        seed.pool = docs_from_json(event.at("pool"), seed.schema);
        seed.eval = docs_from_json(event.at("eval"), seed.schema);
        if (event.contains("cold_start")) {
          seed.cold_start = event.at("cold_start").get<std::map<std::string, std::vector<double>>>();
        }
        seed.timestamp = event.value("timestamp", "");
        out.emplace();
        out->seed = std::move(seed);
        out->state = open_session(out->seed);
      } else if (type == "annotated") {
        if (!out) throw Error(ErrorCode::Parse, "annotated event before created event");
        const auto round = event.at("round").get<std::size_t>();
        if (round != out->state.round + 1) {
          throw Error(ErrorCode::Parse, "round " + std::to_string(round) + " out of sequence at line " +
                                            std::to_string(line_no));
        }
        std::vector<LabelAssignment> labels;
        AnnotationSource source = AnnotationSource::Human;
        std::string timestamp;
        for (const auto& a : event.at("annotations")) {
          labels.push_back({a.at("doc_id").get<std::string>(), out->state.schema().index_of(a.at("label").get<std::string>())});
          source = a.value("source", "human") == "oracle" ? AnnotationSource::Oracle : AnnotationSource::Human;
          timestamp = a.value("timestamp", "");
        }
        out->state = submit_annotations(out->state, labels, source, timestamp);
      } else if (type == "evaluated") {
        // Derived data; the replayed state recomputes it.
      } else {
        throw Error(ErrorCode::Parse, "unknown event type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, "event log line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!out) throw Error(ErrorCode::Parse, "event log has no created event");
  return std::move(*out);
}

ReplayedSession replay_session_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open event log " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return replay_session_events(buffer.str());
}

void append_events(const std::filesystem::path& path, const std::vector<nlohmann::json>& events) {
  std::string blob;
  for (const auto& e : events) {
    blob += e.dump();
    blob += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path.string());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace alearn
