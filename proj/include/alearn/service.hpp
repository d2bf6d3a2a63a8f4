#pragma once

#include "alearn/corpus.hpp"
#include "alearn/event_log.hpp"
#include "alearn/loop.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace alearn {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "alearn-data";
  /// Test hook: extra time a submission holds the session lock.
  std::chrono::milliseconds submit_hold{0};

  /// Reads `{"host": ..., "port": ..., "data_dir": ...}`; absent keys keep defaults.
  static ServiceConfig from_file(const std::filesystem::path& path);
  /// Overrides from ALEARN_HOST, ALEARN_PORT and ALEARN_DATA_DIR when set.
  void apply_environment();
};

/// A dataset registered with the service. `test` is empty for single-file
/// datasets, which are split per session.
struct DatasetEntry {
  std::string name;
  LabelSchema schema;
  std::vector<Document> train;
  std::vector<Document> test;
};

/// Validates and copies dataset files into `<data_dir>/datasets/<name>/`.
/// Returns descriptor warnings (row/label count drift) for known names.
std::vector<std::string> ingest_dataset(const std::filesystem::path& data_dir, const std::string& name,
                                        const std::filesystem::path& train_path,
                                        const std::optional<std::filesystem::path>& test_path,
                                        DatasetFormat format);

/// Parses a train/test pair against one schema (inferred over both files
/// when `labels` is empty).
DatasetEntry load_dataset_pair(const std::string& name, std::string_view train_content,
                               std::optional<std::string_view> test_content, DatasetFormat format,
                               const std::vector<std::string>& labels = {});

struct HttpResponse {
  int status = 200;
  std::string body;
};

/// Transport-independent request handling for the JSON API. Every response
/// body is a JSON object with `"v": 1`.
///
///   GET  /health
///   GET  /datasets                      POST /datasets
///   GET  /sessions                      POST /sessions
///   GET  /sessions/{id}
///   GET  /sessions/{id}/batch
///   POST /sessions/{id}/annotations
///   GET  /sessions/{id}/metrics
///   GET  /sessions/{id}/export
class Service {
public:
  /// Loads ingested datasets and replays every session log under data_dir.
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  void add_dataset(DatasetEntry entry);
  const ServiceConfig& config() const { return config_; }

private:
  struct Slot;

  HttpResponse post_dataset(std::string_view body);
  HttpResponse list_datasets() const;
  HttpResponse create_session(std::string_view body);
  HttpResponse list_sessions() const;
  HttpResponse get_summary(const Slot& slot) const;
  HttpResponse get_batch(const Slot& slot) const;
  HttpResponse post_annotations(Slot& slot, std::string_view body);
  HttpResponse get_metrics(const Slot& slot) const;
  HttpResponse get_export(const Slot& slot) const;

  std::shared_ptr<Slot> find_session(std::string_view id) const;
  std::filesystem::path session_log(const std::string& id) const;
  void load_existing();

  ServiceConfig config_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<const DatasetEntry>, std::less<>> datasets_;
  std::map<std::string, std::shared_ptr<Slot>, std::less<>> sessions_;
  std::size_t next_session_ = 1;
};

/// Session summary JSON (shared by the service and the CLI export).
nlohmann::json session_summary(const SessionState& state, const std::string& dataset);
/// Model, vocabulary, curve and annotation history in one JSON object.
nlohmann::json export_bundle(const SessionState& state);

/// Thin httplib binding around Service.
class HttpServer {
public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Returns false when the address cannot be bound. Port 0 picks a free port.
  bool bind(const std::string& host, int port);
  int port() const { return port_; }
  /// Blocks until stop().
  void run();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace alearn
