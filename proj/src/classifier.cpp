#include "alearn/classifier.hpp"

#include "alearn/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace alearn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidConfig, "learning_rate must be a positive finite number");
  }
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    throw Error(ErrorCode::InvalidConfig, "l2_lambda must be >= 0");
  }
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Model::Model(std::size_t classes, std::size_t dim, std::uint64_t schema_hash, std::uint64_t vocab_hash,
             TrainConfig config)
    : classes_(classes),
      dim_(dim),
      weights_(classes * dim, 0.0),
      bias_(classes, 0.0),
      schema_hash_(schema_hash),
      vocab_hash_(vocab_hash),
      config_(config) {}

nlohmann::json Model::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t c = 0; c < classes_; ++c) {
    const auto r = row(c);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {
      {"schema_hash", hex_digest(schema_hash_)},
      {"vocab_hash", hex_digest(vocab_hash_)},
      {"classes", classes_},
      {"dim", dim_},
      {"weights", std::move(rows)},
      {"bias", bias_},
      {"train_config",
       {{"learning_rate", config_.learning_rate},
        {"epochs", config_.epochs},
        {"l2_lambda", config_.l2_lambda},
        {"seed", config_.seed}}},
  };
}

Model Model::from_json(const nlohmann::json& j) {
  try {
    TrainConfig config;
    const auto& tc = j.at("train_config");
    config.learning_rate = tc.at("learning_rate").get<double>();
    config.epochs = tc.at("epochs").get<int>();
    config.l2_lambda = tc.at("l2_lambda").get<double>();
    config.seed = tc.at("seed").get<std::uint64_t>();
    const auto classes = j.at("classes").get<std::size_t>();
    const auto dim = j.at("dim").get<std::size_t>();
    Model m(classes, dim, std::stoull(j.at("schema_hash").get<std::string>(), nullptr, 16),
            std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16), config);
    const auto& rows = j.at("weights");
    const auto bias = j.at("bias").get<std::vector<double>>();
    if (rows.size() != classes || bias.size() != classes) {
      throw Error(ErrorCode::DimMismatch, "model JSON row count does not match classes");
    }
    for (std::size_t c = 0; c < classes; ++c) {
      const auto r = rows[c].get<std::vector<double>>();
      if (r.size() != dim) throw Error(ErrorCode::DimMismatch, "model JSON row length does not match dim");
      std::copy(r.begin(), r.end(), m.weights_.begin() + static_cast<std::ptrdiff_t>(c * dim));
      m.bias_[c] = bias[c];
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("model JSON: ") + e.what());
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (auto& p : out) p /= sum;
  return out;
}

namespace {

void check_example(const LabeledVector& ex, std::size_t classes, std::size_t dim) {
  if (ex.features.dim != dim) {
    throw Error(ErrorCode::DimMismatch, "example has dim " + std::to_string(ex.features.dim) +
                                            ", model expects " + std::to_string(dim));
  }
  if (ex.label >= classes) {
    throw Error(ErrorCode::UnknownLabel, "label index " + std::to_string(ex.label) + " >= " +
                                             std::to_string(classes) + " classes");
  }
  for (const auto& e : ex.features.entries) {
    if (e.index >= dim) throw Error(ErrorCode::DimMismatch, "feature index out of range");
  }
}

// Working copy of the problem restricted to the columns some example uses.
// Columns outside that set receive zero data gradient, and with a zero start
// the decay term keeps them exactly zero, so nothing is lost.
struct CompactProblem {
  std::vector<std::size_t> columns;  // compact -> original column
  std::vector<LabeledVector> examples;  // indices remapped into [0, columns.size())
};

CompactProblem compact(std::span<const LabeledVector> examples) {
  CompactProblem p;
  for (const auto& ex : examples) {
    for (const auto& e : ex.features.entries) p.columns.push_back(e.index);
  }
  std::sort(p.columns.begin(), p.columns.end());
  p.columns.erase(std::unique(p.columns.begin(), p.columns.end()), p.columns.end());

  p.examples.reserve(examples.size());
  for (const auto& ex : examples) {
    LabeledVector c{SparseVector{{}, p.columns.size()}, ex.label};
    c.features.entries.reserve(ex.features.entries.size());
    for (const auto& e : ex.features.entries) {
      const auto pos = std::lower_bound(p.columns.begin(), p.columns.end(), e.index) - p.columns.begin();
      c.features.entries.push_back({static_cast<std::size_t>(pos), e.value});
    }
    p.examples.push_back(std::move(c));
  }

  // Canonical order makes the floating-point summation order independent
  // of how the caller listed the examples.
  std::sort(p.examples.begin(), p.examples.end(), [](const LabeledVector& a, const LabeledVector& b) {
    if (a.label != b.label) return a.label < b.label;
    const auto& ea = a.features.entries;
    const auto& eb = b.features.entries;
    return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end(),
                                        [](const SparseEntry& x, const SparseEntry& y) {
                                          if (x.index != y.index) return x.index < y.index;
                                          return x.value < y.value;
                                        });
  });
  return p;
}

// Accumulates the data term of the gradient for weights laid out as
// classes x dim; returns the summed (not averaged) cross-entropy.
double accumulate_data_gradient(std::span<const double> weights, std::span<const double> bias,
                                std::size_t classes, std::size_t dim,
                                std::span<const LabeledVector> examples, std::span<double> grad_w,
                                std::span<double> grad_b) {
  double total = 0.0;
  std::vector<double> logits(classes);
  for (const auto& ex : examples) {
    for (std::size_t c = 0; c < classes; ++c) {
      double z = bias[c];
      const double* row = weights.data() + c * dim;
      for (const auto& e : ex.features.entries) z += row[e.index] * e.value;
      logits[c] = z;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - top);
    const double log_norm = top + std::log(sum);
    total += log_norm - logits[ex.label];

    for (std::size_t c = 0; c < classes; ++c) {
      const double residual = std::exp(logits[c] - log_norm) - (c == ex.label ? 1.0 : 0.0);
      grad_b[c] += residual;
      double* grow = grad_w.data() + c * dim;
      for (const auto& e : ex.features.entries) grow[e.index] += residual * e.value;
    }
  }
  return total;
}

}  // namespace

LossAndGradient loss_and_gradient(const Model& model, std::span<const LabeledVector> examples) {
  if (examples.empty()) throw Error(ErrorCode::EmptyBatch, "loss needs at least one example");
  const std::size_t classes = model.classes();
  const std::size_t dim = model.dim();
  for (const auto& ex : examples) check_example(ex, classes, dim);

  LossAndGradient out;
  out.gradient.weights.assign(classes * dim, 0.0);
  out.gradient.bias.assign(classes, 0.0);
  const double total = accumulate_data_gradient(model.weights(), model.bias(), classes, dim, examples,
                                                out.gradient.weights, out.gradient.bias);
  const double n = static_cast<double>(examples.size());
  const double lambda = model.train_config().l2_lambda;

  double frob = 0.0;
  const auto w = model.weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    frob += w[i] * w[i];
    out.gradient.weights[i] = out.gradient.weights[i] / n + lambda * w[i];
  }
  for (auto& g : out.gradient.bias) g /= n;
  out.loss = total / n + 0.5 * lambda * frob;
  return out;
}

Model train(std::span<const LabeledVector> examples, const LabelSchema& schema, std::size_t dim,
            const TrainConfig& config, std::uint64_t vocab_hash) {
  config.validate();
  const std::size_t classes = schema.size();
  Model model(classes, dim, schema.digest(), vocab_hash, config);
  if (examples.empty()) return model;
  for (const auto& ex : examples) check_example(ex, classes, dim);

  const auto problem = compact(examples);
  const std::size_t active = problem.columns.size();
  const double n = static_cast<double>(problem.examples.size());

  std::vector<double> w(classes * active, 0.0);
  std::vector<double> b(classes, 0.0);
  std::vector<double> gw(classes * active);
  std::vector<double> gb(classes);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    accumulate_data_gradient(w, b, classes, active, problem.examples, gw, gb);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= config.learning_rate * (gw[i] / n + config.l2_lambda * w[i]);
    }
    for (std::size_t c = 0; c < classes; ++c) b[c] -= config.learning_rate * (gb[c] / n);
  }

  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t k = 0; k < active; ++k) model.weight(c, problem.columns[k]) = w[c * active + k];
    model.bias()[c] = b[c];
  }
  return model;
}

std::vector<double> predict(const Model& model, const SparseVector& v) {
  if (v.dim != model.dim()) {
    throw Error(ErrorCode::DimMismatch,
                "vector dim " + std::to_string(v.dim) + " vs model dim " + std::to_string(model.dim()));
  }
  std::vector<double> logits(model.classes());
  for (std::size_t c = 0; c < model.classes(); ++c) {
    double z = model.bias()[c];
    const auto row = model.row(c);
    for (const auto& e : v.entries) {
      if (e.index >= model.dim()) throw Error(ErrorCode::DimMismatch, "feature index out of range");
      z += row[e.index] * e.value;
    }
    logits[c] = z;
  }
  return softmax(logits);
}

}  // namespace alearn
