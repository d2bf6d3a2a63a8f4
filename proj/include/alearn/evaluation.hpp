#pragma once

#include "alearn/corpus.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace alearn {

/// Rows are gold classes, columns are predicted classes.
class ConfusionMatrix {
public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return classes_; }
  std::size_t& at(std::size_t gold, std::size_t predicted) { return counts_[gold * classes_ + predicted]; }
  std::size_t at(std::size_t gold, std::size_t predicted) const { return counts_[gold * classes_ + predicted]; }
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t gold) const;
  std::size_t col_sum(std::size_t predicted) const;

  std::vector<std::vector<std::size_t>> rows() const;
  bool operator==(const ConfusionMatrix&) const = default;

private:
  std::size_t classes_ = 0;
  std::vector<std::size_t> counts_;
};

/// Throws LengthMismatch, EmptyEval (no items), IndexOutOfRange.
ConfusionMatrix confusion_matrix(std::span<const LabelIndex> predicted, std::span<const LabelIndex> gold,
                                 std::size_t classes);

struct Metrics {
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
};

/// Macro averages over all C classes; a class with a zero denominator
/// scores 0 and still counts in the mean. Throws EmptyEval.
Metrics metrics_from_confusion(const ConfusionMatrix& m);

struct RoundMetrics {
  std::size_t n_labels = 0;
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  ConfusionMatrix confusion;
  std::size_t eval_size = 0;
  /// Mean entropy (nats) over the selection pool under the model this
  /// round was scored with; NaN when the pool is empty.
  double mean_pool_entropy = 0.0;
};

RoundMetrics evaluate_round(std::size_t n_labels, std::span<const LabelIndex> predicted,
                            std::span<const LabelIndex> gold, std::size_t classes);

using LearningCurve = std::vector<RoundMetrics>;

/// `n_labels,accuracy,precision_macro,recall_macro`, fixed 6 decimals, '\n' line ends.
std::string curve_to_csv(const LearningCurve& curve);
LearningCurve curve_from_csv(std::string_view csv);

nlohmann::json round_to_json(const RoundMetrics& r, bool with_confusion = true);
nlohmann::json curve_to_json(const LearningCurve& curve, bool with_confusion = false);

std::string format_fixed6(double value);

}  // namespace alearn
