#include "alearn/evaluation.hpp"

#include "alearn/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace alearn {

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (auto c : counts_) sum += c;
  return sum;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t sum = 0;
  for (std::size_t c = 0; c < classes_; ++c) sum += at(c, c);
  return sum;
}

std::size_t ConfusionMatrix::row_sum(std::size_t gold) const {
  std::size_t sum = 0;
  for (std::size_t p = 0; p < classes_; ++p) sum += at(gold, p);
  return sum;
}

std::size_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::size_t sum = 0;
  for (std::size_t g = 0; g < classes_; ++g) sum += at(g, predicted);
  return sum;
}

std::vector<std::vector<std::size_t>> ConfusionMatrix::rows() const {
  std::vector<std::vector<std::size_t>> out(classes_);
  for (std::size_t g = 0; g < classes_; ++g) {
    out[g].assign(counts_.begin() + static_cast<std::ptrdiff_t>(g * classes_),
                  counts_.begin() + static_cast<std::ptrdiff_t>((g + 1) * classes_));
  }
  return out;
}

ConfusionMatrix confusion_matrix(std::span<const LabelIndex> predicted, std::span<const LabelIndex> gold,
                                 std::size_t classes) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predicted.size()) + " predictions vs " +
                                               std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) throw Error(ErrorCode::EmptyEval, "confusion matrix over zero items");
  ConfusionMatrix m(classes);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= classes || predicted[i] >= classes) {
      throw Error(ErrorCode::IndexOutOfRange, "label index out of range at item " + std::to_string(i));
    }
    ++m.at(gold[i], predicted[i]);
  }
  return m;
}

Metrics metrics_from_confusion(const ConfusionMatrix& m) {
  const auto total = m.total();
  if (total == 0) throw Error(ErrorCode::EmptyEval, "confusion matrix is empty");
  Metrics out;
  out.accuracy = static_cast<double>(m.trace()) / static_cast<double>(total);
  double precision = 0.0;
  double recall = 0.0;
  for (std::size_t c = 0; c < m.classes(); ++c) {
    const auto hit = static_cast<double>(m.at(c, c));
    if (const auto col = m.col_sum(c); col > 0) precision += hit / static_cast<double>(col);
    if (const auto row = m.row_sum(c); row > 0) recall += hit / static_cast<double>(row);
  }
  out.precision_macro = precision / static_cast<double>(m.classes());
  out.recall_macro = recall / static_cast<double>(m.classes());
  return out;
}

RoundMetrics evaluate_round(std::size_t n_labels, std::span<const LabelIndex> predicted,
                            std::span<const LabelIndex> gold, std::size_t classes) {
  RoundMetrics r;
  r.n_labels = n_labels;
  r.confusion = confusion_matrix(predicted, gold, classes);
  r.eval_size = gold.size();
  const auto m = metrics_from_confusion(r.confusion);
  r.accuracy = m.accuracy;
  r.precision_macro = m.precision_macro;
  r.recall_macro = m.recall_macro;
  r.mean_pool_entropy = std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string curve_to_csv(const LearningCurve& curve) {
  std::string out = "n_labels,accuracy,precision_macro,recall_macro\n";
  for (const auto& r : curve) {
    out += std::to_string(r.n_labels);
    out += ',';
    out += format_fixed6(r.accuracy);
    out += ',';
    out += format_fixed6(r.precision_macro);
    out += ',';
    out += format_fixed6(r.recall_macro);
    out += '\n';
  }
  return out;
}

LearningCurve curve_from_csv(std::string_view csv) {
  const auto records = parse_csv(csv);
  if (records.empty() || records[0] != std::vector<std::string>{"n_labels", "accuracy", "precision_macro",
                                                                 "recall_macro"}) {
    throw Error(ErrorCode::Parse, "curve CSV header mismatch");
  }
  LearningCurve curve;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != 4) throw Error(ErrorCode::Parse, "curve CSV row " + std::to_string(i));
    RoundMetrics r;
    try {
      r.n_labels = std::stoul(rec[0]);
      r.accuracy = std::stod(rec[1]);
      r.precision_macro = std::stod(rec[2]);
      r.recall_macro = std::stod(rec[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, "curve CSV row " + std::to_string(i) + " is not numeric");
    }
    curve.push_back(std::move(r));
  }
  return curve;
}

nlohmann::json round_to_json(const RoundMetrics& r, bool with_confusion) {
  nlohmann::json j = {
      {"n_labels", r.n_labels},
      {"accuracy", r.accuracy},
      {"precision_macro", r.precision_macro},
      {"recall_macro", r.recall_macro},
      {"eval_size", r.eval_size},
  };
  j["mean_pool_entropy"] = std::isnan(r.mean_pool_entropy) ? nlohmann::json(nullptr)
                                                           : nlohmann::json(r.mean_pool_entropy);
  if (with_confusion) j["confusion"] = r.confusion.rows();
  return j;
}

nlohmann::json curve_to_json(const LearningCurve& curve, bool with_confusion) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : curve) rounds.push_back(round_to_json(r, with_confusion));
  return rounds;
}

}  // namespace alearn
