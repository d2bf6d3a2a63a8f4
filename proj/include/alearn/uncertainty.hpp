#pragma once

#include "alearn/corpus.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alearn {

struct Prediction {
  std::string doc_id;
  std::vector<double> probs;
  LabelIndex predicted = 0;  // smallest index on exact ties
  double confidence = 0.0;
  double entropy_nats = 0.0;
  double entropy_norm = 0.0;  // entropy_nats / ln C
};

Prediction make_prediction(std::string doc_id, std::vector<double> probs);

enum class Strategy { MaxEntropy, LeastConfidence, MisclassifiedFirst, Random };

/// Accepts the canonical names plus the short CLI aliases
/// (entropy, confidence, misclassified). Throws InvalidConfig.
Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);

/// Shannon entropy in nats of the renormalised input, 0 ln 0 = 0.
/// Throws InvalidDistribution on negative or non-finite components or a
/// sum off by more than 1e-6.
double entropy(std::span<const double> probs);

using GoldMap = std::map<std::string, LabelIndex, std::less<>>;

/// Deterministic total order over the predictions' doc ids.
std::vector<std::string> rank_pool(std::span<const Prediction> predictions, Strategy strategy,
                                   const GoldMap* gold, std::uint64_t seed);

/// First min(k, |ranked|) ids. Throws InvalidBatchSize for k < 1.
std::vector<std::string> select_batch(std::span<const std::string> ranked, std::size_t k);

}  // namespace alearn
