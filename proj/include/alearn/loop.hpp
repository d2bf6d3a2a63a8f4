#pragma once

#include "alearn/classifier.hpp"
#include "alearn/corpus.hpp"
#include "alearn/evaluation.hpp"
#include "alearn/featurizer.hpp"
#include "alearn/random.hpp"
#include "alearn/uncertainty.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace alearn {

enum class Protocol {
  /// Batches are drawn from the eval set and labeled rows migrate out of it.
  Paper,
  /// Batches come from a separate unlabeled pool; eval stays fixed.
  Pool,
};

Protocol parse_protocol(std::string_view name);
std::string_view to_string(Protocol protocol);

struct SessionConfig {
  std::size_t batch_size = 10;
  std::size_t max_labels = 150;
  Strategy strategy = Strategy::MaxEntropy;
  Protocol protocol = Protocol::Paper;
  TrainConfig train;
  VocabularyOptions vocabulary;
  std::uint64_t seed = 42;

  /// Throws InvalidConfig (including max_labels not a multiple of batch_size).
  void validate() const;
  std::size_t planned_rounds() const { return max_labels / batch_size; }

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static SessionConfig from_json(const nlohmann::json& j);
};

enum class AnnotationSource { Human, Oracle };

std::string_view to_string(AnnotationSource source);

struct Annotation {
  std::string doc_id;
  LabelIndex label = 0;
  std::size_t round = 0;
  AnnotationSource source = AnnotationSource::Human;
  std::string timestamp;
};

nlohmann::json annotation_to_json(const Annotation& a, const LabelSchema& schema);
/// One JSON object per line.
std::string annotations_to_jsonl(std::span<const Annotation> annotations, const LabelSchema& schema);

/// Per-document probability vectors used for round-0 predictions in place
/// of the zero model. Returning std::nullopt (or throwing BackendUnavailable)
/// leaves the session on the zero model.
using ColdStartFn =
    std::function<std::optional<std::vector<std::vector<double>>>(std::span<const Document> docs)>;

/// Immutable per-session data: documents, features, vocabulary.
struct SessionCorpus {
  LabelSchema schema;
  Vocabulary vocab;
  std::vector<Document> docs;
  std::vector<SparseVector> vectors;
  std::unordered_map<std::string, std::size_t> index;  // doc_id -> position in docs

  const Document& doc(std::string_view id) const { return docs.at(index.at(std::string(id))); }
  const SparseVector& vector(std::string_view id) const { return vectors.at(index.at(std::string(id))); }
};

/// Value type; copies share the immutable corpus and model.
struct SessionState {
  std::string session_id;
  std::shared_ptr<const SessionCorpus> corpus;
  /// Unlabeled pool ids (always empty under paper_protocol).
  std::set<std::string> pool;
  std::vector<Annotation> labeled;
  std::set<std::string> eval;
  std::size_t round = 0;
  std::shared_ptr<const Model> model;
  /// Round-0 probabilities from a cold-start backend, by doc id.
  std::shared_ptr<const std::unordered_map<std::string, std::vector<double>>> cold_start;
  LearningCurve curve;
  SessionConfig config;

  const LabelSchema& schema() const { return corpus->schema; }
  const Vocabulary& vocab() const { return corpus->vocab; }
  /// The set batches are drawn from: eval under Paper, pool under Pool.
  const std::set<std::string>& selection_pool() const {
    return config.protocol == Protocol::Paper ? eval : pool;
  }
  std::size_t labels_used() const { return labeled.size(); }
  bool budget_remaining() const { return labeled.size() < config.max_labels; }
};

/// Throws EmptyEval, MissingGold, InvalidConfig, PoolExhausted (empty pool
/// under the pool protocol), DuplicateId.
SessionState create_session(std::vector<Document> pool_docs, std::vector<Document> eval_docs,
                            const LabelSchema& schema, const SessionConfig& config,
                            std::string session_id = "session", const ColdStartFn& cold_start = {});

/// Current-model predictions over the selection pool, in id order.
std::vector<Prediction> predict_pool(const SessionState& state);

struct BatchItem {
  Document doc;
  Prediction prediction;
};

/// Throws BudgetExhausted, PoolExhausted, MissingGold (misclassified_first without gold).
std::vector<BatchItem> next_batch(const SessionState& state);

struct LabelAssignment {
  std::string doc_id;
  LabelIndex label;
};

/// Returns the successor state. Throws EmptyBatch, InvalidBatchSize (more than
/// batch_size items), BudgetExhausted, NotInPool, UnknownLabel.
SessionState submit_annotations(const SessionState& state, std::span<const LabelAssignment> annotations,
                                AnnotationSource source = AnnotationSource::Human,
                                const std::string& timestamp = {});

class Oracle {
public:
  Oracle(GoldMap gold, std::size_t classes, double noise_rate, std::uint64_t seed);

  /// Gold label with probability 1 - noise_rate, otherwise a uniformly drawn
  /// wrong label. Throws MissingGold.
  LabelIndex label(std::string_view doc_id);

  const GoldMap& gold() const { return gold_; }
  double noise_rate() const { return noise_rate_; }

private:
  GoldMap gold_;
  std::size_t classes_;
  double noise_rate_;
  Rng rng_;
};

Oracle make_oracle(std::span<const Document> docs, std::size_t classes, double noise_rate, std::uint64_t seed);

LabelIndex oracle_label(Oracle& oracle, std::string_view doc_id);

/// Runs next_batch -> oracle -> submit until the budget or the selection pool
/// runs out. Deterministic in (inputs, config, oracle seed).
LearningCurve run_benchmark(std::vector<Document> eval_docs, std::vector<Document> pool_docs,
                            const LabelSchema& schema, const SessionConfig& config, Oracle& oracle,
                            SessionState* final_state = nullptr);

/// Seconds-resolution UTC timestamp, ISO-8601.
std::string utc_now_iso8601();

}  // namespace alearn
