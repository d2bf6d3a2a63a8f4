#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace alearn {

using LabelIndex = std::size_t;

struct Document {
  std::string doc_id;
  std::string text;
  std::optional<LabelIndex> gold_label;
};

/// Ordered, duplicate-free label names with a name -> index lookup.
class LabelSchema {
public:
  LabelSchema() = default;
  /// Throws SchemaTooSmall for fewer than two labels, InvalidConfig for
  /// empty or duplicate names.
  explicit LabelSchema(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& name(LabelIndex index) const { return labels_.at(index); }
  std::optional<LabelIndex> find(std::string_view name) const;
  /// Throws UnknownLabel.
  LabelIndex index_of(std::string_view name) const;

  std::uint64_t digest() const;

  bool operator==(const LabelSchema& other) const { return labels_ == other.labels_; }

private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelIndex> index_;
};

struct DatasetDescriptor {
  std::string name;
  int expected_train_rows = 0;
  /// Zero for datasets shipped as a single file.
  int expected_test_rows = 0;
  std::vector<std::string> label_names;
  std::string source_url;
};

enum class DatasetFormat { Csv, Jsonl };

DatasetFormat parse_format(std::string_view name);
/// Chooses by file extension: `.jsonl`/`.json` -> Jsonl, anything else -> Csv.
DatasetFormat guess_format(const std::filesystem::path& path);

struct LoadedDataset {
  std::vector<Document> documents;
  LabelSchema schema;
};

/// Pass std::nullopt as `schema` to infer it from the sorted set of distinct
/// non-empty labels in the file.
LoadedDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                           const std::optional<LabelSchema>& schema);
LoadedDataset parse_dataset(std::string_view content, DatasetFormat format,
                            const std::optional<LabelSchema>& schema);

struct Split {
  std::vector<Document> pool;
  std::vector<Document> eval;
};

/// Seeded partition; |eval| = round(eval_fraction * N).
Split split(const std::vector<Document>& documents, double eval_fraction, std::uint64_t seed);

const std::vector<DatasetDescriptor>& builtin_descriptors();
/// Case-insensitive lookup by descriptor name; nullptr when unknown.
const DatasetDescriptor* find_descriptor(std::string_view name);

/// Compares row and label counts against the descriptor. Mismatches are
/// returned as human-readable warnings, never thrown.
std::vector<std::string> check_descriptor(const DatasetDescriptor& descriptor,
                                          std::size_t train_rows, std::size_t test_rows,
                                          std::size_t label_count);

/// RFC-4180 record reader. Exposed for the CLI and tests.
std::vector<std::vector<std::string>> parse_csv(std::string_view content);
std::string csv_escape(std::string_view field);

std::string trim(std::string_view s);

}  // namespace alearn
