#include "alearn/uncertainty.hpp"

#include "alearn/error.hpp"
#include "alearn/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alearn {

Strategy parse_strategy(std::string_view name) {
  if (name == "max_entropy" || name == "entropy") return Strategy::MaxEntropy;
  if (name == "least_confidence" || name == "confidence") return Strategy::LeastConfidence;
  if (name == "misclassified_first" || name == "misclassified") return Strategy::MisclassifiedFirst;
  if (name == "random") return Strategy::Random;
  throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::MaxEntropy: return "max_entropy";
    case Strategy::LeastConfidence: return "least_confidence";
    case Strategy::MisclassifiedFirst: return "misclassified_first";
    case Strategy::Random: return "random";
  }
  return "unknown";
}

double entropy(std::span<const double> probs) {
  if (probs.empty()) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidDistribution, "components must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw Error(ErrorCode::InvalidDistribution, "components sum to " + std::to_string(sum));
  }
  double h = 0.0;
  for (double p : probs) {
    const double q = p / sum;
    if (q > 0.0) h -= q * std::log(q);
  }
  return std::max(h, 0.0);
}

Prediction make_prediction(std::string doc_id, std::vector<double> probs) {
  Prediction out;
  out.doc_id = std::move(doc_id);
  out.predicted = static_cast<LabelIndex>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  out.confidence = probs[out.predicted];
  out.entropy_nats = entropy(probs);
  out.entropy_norm = probs.size() > 1 ? out.entropy_nats / std::log(static_cast<double>(probs.size())) : 0.0;
  out.probs = std::move(probs);
  return out;
}

std::vector<std::string> rank_pool(std::span<const Prediction> predictions, Strategy strategy,
                                   const GoldMap* gold, std::uint64_t seed) {
  if (predictions.empty()) throw Error(ErrorCode::EmptyBatch, "nothing to rank");

  std::vector<const Prediction*> order;
  order.reserve(predictions.size());
  for (const auto& p : predictions) order.push_back(&p);

  // Shared sort key; Random is handled below.
  auto by_id = [](const Prediction* a, const Prediction* b) { return a->doc_id < b->doc_id; };

  switch (strategy) {
    case Strategy::MaxEntropy:
      std::sort(order.begin(), order.end(), [&](const Prediction* a, const Prediction* b) {
        if (a->entropy_nats != b->entropy_nats) return a->entropy_nats > b->entropy_nats;
        if (a->confidence != b->confidence) return a->confidence < b->confidence;
        return by_id(a, b);
      });
      break;
    case Strategy::LeastConfidence:
      std::sort(order.begin(), order.end(), [&](const Prediction* a, const Prediction* b) {
        if (a->confidence != b->confidence) return a->confidence < b->confidence;
        if (a->entropy_nats != b->entropy_nats) return a->entropy_nats > b->entropy_nats;
        return by_id(a, b);
      });
      break;
    case Strategy::MisclassifiedFirst: {
      if (gold == nullptr) throw Error(ErrorCode::MissingGold, "misclassified_first needs gold labels");
      std::vector<std::pair<bool, const Prediction*>> keyed;
      keyed.reserve(order.size());
      for (const auto* p : order) {
        auto it = gold->find(p->doc_id);
        if (it == gold->end()) throw Error(ErrorCode::MissingGold, "no gold label for '" + p->doc_id + "'");
        keyed.emplace_back(p->predicted != it->second, p);
      }
      std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first;
        if (a.second->entropy_nats != b.second->entropy_nats) {
          return a.second->entropy_nats > b.second->entropy_nats;
        }
        return by_id(a.second, b.second);
      });
      for (std::size_t i = 0; i < keyed.size(); ++i) order[i] = keyed[i].second;
      break;
    }
    case Strategy::Random: {
      std::sort(order.begin(), order.end(), by_id);
      Rng rng(seed);
      rng.shuffle(std::span<const Prediction*>(order));
      break;
    }
  }

  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (const auto* p : order) ids.push_back(p->doc_id);
  return ids;
}

std::vector<std::string> select_batch(std::span<const std::string> ranked, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidBatchSize, "batch size must be >= 1");
  const auto n = std::min(k, ranked.size());
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace alearn
