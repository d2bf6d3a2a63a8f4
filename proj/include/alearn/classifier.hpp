#pragma once

#include "alearn/corpus.hpp"
#include "alearn/featurizer.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace alearn {

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 200;
  double l2_lambda = 1e-3;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct LabeledVector {
  SparseVector features;
  LabelIndex label;
};

/// Dense C x V weights (row-major) plus a per-class bias.
class Model {
public:
  Model() = default;
  /// Zero model: every prediction is uniform.
  Model(std::size_t classes, std::size_t dim, std::uint64_t schema_hash = 0, std::uint64_t vocab_hash = 0,
        TrainConfig config = {});

  std::size_t classes() const { return classes_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> weights() { return weights_; }
  std::span<const double> row(std::size_t c) const { return {weights_.data() + c * dim_, dim_}; }
  std::span<const double> bias() const { return bias_; }
  std::span<double> bias() { return bias_; }
  double& weight(std::size_t c, std::size_t j) { return weights_[c * dim_ + j]; }
  double weight(std::size_t c, std::size_t j) const { return weights_[c * dim_ + j]; }

  std::uint64_t schema_hash() const { return schema_hash_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  const TrainConfig& train_config() const { return config_; }

  bool operator==(const Model&) const = default;

  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json& j);

private:
  std::size_t classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
  std::vector<double> bias_;
  std::uint64_t schema_hash_ = 0;
  std::uint64_t vocab_hash_ = 0;
  TrainConfig config_;
};

struct Gradient {
  std::vector<double> weights;  // C x V row-major, same layout as Model
  std::vector<double> bias;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradient gradient;
};

/// Mean cross-entropy + (lambda/2)||W||_F^2 with lambda taken from the
/// model's train config; the bias is not regularised. Throws EmptyBatch,
/// DimMismatch, UnknownLabel.
LossAndGradient loss_and_gradient(const Model& model, std::span<const LabeledVector> examples);

/// Full-batch gradient descent from a zero initialisation. Output is
/// bit-identical for any ordering of `examples`.
Model train(std::span<const LabeledVector> examples, const LabelSchema& schema, std::size_t dim,
            const TrainConfig& config, std::uint64_t vocab_hash = 0);

/// softmax(W v + b). Throws DimMismatch.
std::vector<double> predict(const Model& model, const SparseVector& v);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

std::string hex_digest(std::uint64_t h);

}  // namespace alearn
