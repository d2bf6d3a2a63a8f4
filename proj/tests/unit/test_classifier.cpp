#include "alearn/classifier.hpp"
#include "alearn/error.hpp"
#include "alearn/random.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace alearn;

namespace {

SparseVector random_vector(Rng& rng, std::size_t dim) {
  SparseVector v;
  v.dim = dim;
  double norm = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    if (rng.uniform() < 0.4) {
      const double x = rng.uniform() + 0.05;
      v.entries.push_back({j, x});
      norm += x * x;
    }
  }
  for (auto& e : v.entries) e.value /= std::sqrt(norm);
  return v;
}

std::vector<LabeledVector> random_examples(Rng& rng, std::size_t n, std::size_t classes, std::size_t dim) {
  std::vector<LabeledVector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({random_vector(rng, dim), rng.below(classes)});
  return out;
}

Model random_model(Rng& rng, std::size_t classes, std::size_t dim, double lambda) {
  TrainConfig cfg;
  cfg.l2_lambda = lambda;
  Model m(classes, dim, 0, 0, cfg);
  for (auto& w : m.weights()) w = rng.uniform() * 2.0 - 1.0;
  for (auto& b : m.bias()) b = rng.uniform() - 0.5;
  return m;
}

LabelSchema schema_of(std::size_t classes) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
  return LabelSchema(names);
}

}  // namespace

TEST_SUITE("classifier") {
  TEST_CASE("softmax") {
    const std::vector<double> logits{2.0, 1.0, 0.0};
    const auto p = softmax(logits);
    CHECK(p[0] == doctest::Approx(0.6652409557748219).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.2447284710547976).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.0900305731703805).epsilon(1e-12));

    const std::vector<double> huge{1000.0, 1000.0};
    const auto q = softmax(huge);
    CHECK(q[0] == doctest::Approx(0.5));
    CHECK(std::isfinite(q[1]));
  }

  TEST_CASE("zero model predicts uniform") {
    const Model m(4, 3);
    SparseVector v{{{0, 1.0}}, 3};
    for (double p : predict(m, v)) CHECK(p == doctest::Approx(0.25));
  }

  TEST_CASE("predict rejects a mismatched dimension") {
    const Model m(2, 3);
    try {
      predict(m, SparseVector{{}, 4});
      FAIL("expected DimMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimMismatch);
    }
  }

  TEST_CASE("loss_and_gradient errors") {
    const Model m(2, 3);
    std::vector<LabeledVector> none;
    CHECK_THROWS_AS(loss_and_gradient(m, none), Error);
    std::vector<LabeledVector> bad{{SparseVector{{}, 3}, 5}};
    CHECK_THROWS_AS(loss_and_gradient(m, bad), Error);
  }

  TEST_CASE("train config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.l2_lambda = -1.0;
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("property: analytic gradient matches finite differences") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const auto classes = 2 + rng.below(4);
      const auto dim = 1 + rng.below(30);
      const auto n = 1 + rng.below(8);
      const auto model = random_model(rng, classes, dim, trial % 2 == 0 ? 1e-3 : 0.1);
      const auto examples = random_examples(rng, n, classes, dim);

      const auto analytic = loss_and_gradient(model, examples);
      const auto [gw, gb] = oracle::finite_difference_gradient(model, examples);
      CHECK(analytic.loss == doctest::Approx(oracle::dense_loss(model, examples)).epsilon(1e-12));
      CHECK(oracle::relative_error(analytic.gradient.weights, gw) < 1e-5);
      CHECK(oracle::relative_error(analytic.gradient.bias, gb) < 1e-5);
    }
  }

  TEST_CASE("bias is not regularized") {
    TrainConfig cfg;
    cfg.l2_lambda = 10.0;
    Model m(2, 1, 0, 0, cfg);
    m.bias()[0] = 3.0;
    std::vector<LabeledVector> ex{{SparseVector{{}, 1}, 0}, {SparseVector{{}, 1}, 1}};
    const auto g = loss_and_gradient(m, ex);
    // Data gradient only: mean(p - y) over two examples with opposite labels.
    const auto p = softmax(std::vector<double>{3.0, 0.0});
    CHECK(g.gradient.bias[0] == doctest::Approx(p[0] - 0.5).epsilon(1e-12));
  }

  TEST_CASE("training loss is non-increasing per epoch") {
    Rng rng(11);
    const auto examples = random_examples(rng, 40, 3, 25);
    const auto schema = schema_of(3);
    double previous = std::log(3.0) + 1e-12;
    for (int epochs = 1; epochs <= 60; ++epochs) {
      TrainConfig cfg;
      cfg.epochs = epochs;
      const auto model = train(examples, schema, 25, cfg);
      const double loss = loss_and_gradient(model, examples).loss;
      CHECK(loss <= previous + 1e-12);
      previous = loss;
    }
  }

  TEST_CASE("training is deterministic and invariant to example order") {
    Rng rng(3);
    auto examples = random_examples(rng, 30, 4, 20);
    const auto schema = schema_of(4);
    const auto a = train(examples, schema, 20, {});
    const auto b = train(examples, schema, 20, {});
    CHECK(a == b);

    for (int trial = 0; trial < 5; ++trial) {
      rng.shuffle(std::span<LabeledVector>(examples));
      CHECK(train(examples, schema, 20, {}) == a);
    }
  }

  TEST_CASE("property: training matches a dense reference trainer") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      const auto classes = 2 + rng.below(4);
      const auto dim = 1 + rng.below(25);
      const auto examples = random_examples(rng, 1 + rng.below(15), classes, dim);
      TrainConfig cfg;
      cfg.epochs = 50;
      const auto got = train(examples, schema_of(classes), dim, cfg);
      const auto want = oracle::dense_train(examples, classes, dim, cfg);
      double worst = 0.0;
      for (std::size_t i = 0; i < got.weights().size(); ++i) {
        worst = std::max(worst, std::abs(got.weights()[i] - want.weights()[i]));
      }
      for (std::size_t c = 0; c < classes; ++c) worst = std::max(worst, std::abs(got.bias()[c] - want.bias()[c]));
      CHECK(worst < 1e-10);
    }
  }

  TEST_CASE("untouched columns stay exactly zero") {
    std::vector<LabeledVector> ex{{SparseVector{{{1, 1.0}}, 5}, 0}, {SparseVector{{{3, 1.0}}, 5}, 1}};
    const auto m = train(ex, schema_of(2), 5, {});
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(m.weight(c, 0) == 0.0);
      CHECK(m.weight(c, 2) == 0.0);
      CHECK(m.weight(c, 4) == 0.0);
    }
    CHECK(m.weight(0, 1) > 0.0);
  }

  TEST_CASE("property: predictions lie on the simplex") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const auto classes = 2 + rng.below(9);
      const auto dim = 1 + rng.below(20);
      auto m = random_model(rng, classes, dim, 0.0);
      for (auto& w : m.weights()) w *= 50.0;
      const auto p = predict(m, random_vector(rng, dim));
      REQUIRE(p.size() == classes);
      for (double x : p) CHECK((x >= 0.0 && x <= 1.0));
      CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
    }
  }

  TEST_CASE("a separable toy problem is learned") {
    std::vector<LabeledVector> ex{{SparseVector{{{0, 1.0}}, 2}, 0}, {SparseVector{{{1, 1.0}}, 2}, 1}};
    const auto m = train(ex, schema_of(2), 2, {});
    CHECK(predict(m, ex[0].features)[0] > 0.8);
    CHECK(predict(m, ex[1].features)[1] > 0.8);
  }

  TEST_CASE("model JSON round trip is exact") {
    Rng rng(9);
    const auto examples = random_examples(rng, 10, 3, 6);
    const auto m = train(examples, schema_of(3), 6, {}, 0xabcdef);
    const auto back = Model::from_json(nlohmann::json::parse(m.to_json().dump()));
    CHECK(back == m);
    CHECK(m.to_json()["vocab_hash"] == hex_digest(0xabcdef));
  }
}
