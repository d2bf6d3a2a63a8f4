#pragma once

#include "alearn/loop.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace alearn {

/// Sessions persist as append-only JSONL event logs:
///
///   {"type":"created",   ...dataset, config, documents, optional cold_start}
///   {"type":"annotated", "round": r, "annotations": [...]}
///   {"type":"evaluated", "round": r, "metrics": {...}}
///
/// Replaying the created event and every annotated event in order rebuilds
/// the session state exactly.
struct SessionSeed {
  std::string session_id;
  std::string dataset;
  LabelSchema schema;
  SessionConfig config;
  std::vector<Document> pool;
  std::vector<Document> eval;
  /// Round-0 probabilities by doc id; empty when no cold start was used.
  std::map<std::string, std::vector<double>> cold_start;
  std::string timestamp;
};

nlohmann::json created_event(const SessionSeed& seed);
nlohmann::json annotated_event(const SessionState& state, std::size_t round);
nlohmann::json evaluated_event(const SessionState& state, std::size_t round);

/// Builds the round-0 state described by a seed.
SessionState open_session(const SessionSeed& seed);

struct ReplayedSession {
  SessionSeed seed;
  SessionState state;
};

/// Throws Io when the file cannot be read, Parse on malformed events.
ReplayedSession replay_session_log(const std::filesystem::path& path);
ReplayedSession replay_session_events(std::string_view jsonl);

/// Appends whole lines and flushes before returning.
void append_events(const std::filesystem::path& path, const std::vector<nlohmann::json>& events);

}  // namespace alearn
