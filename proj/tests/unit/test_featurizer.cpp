#include "alearn/error.hpp"
#include "alearn/featurizer.hpp"
#include "alearn/random.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace alearn;

namespace {

using Strings = std::vector<std::string>;

Vocabulary toy_vocab(std::size_t min_df = 1) {
  const Strings corpus{"a b", "b c", "b"};
  return fit_vocabulary(std::span<const std::string>(corpus), min_df, 100);
}

}  // namespace

TEST_SUITE("featurizer") {
  TEST_CASE("tokenize") {
    CHECK(tokenize("Claim now!") == Strings{"claim", "now"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("Win $1000 now, WIN!") == Strings{"win", "1000", "now", "win"});
    CHECK(tokenize("You've won") == Strings{"you", "ve", "won"});
  }

  TEST_CASE("tokenize handles non-ASCII letters and bad UTF-8") {
    CHECK(tokenize("Crème BRÛLÉE") == Strings{"crème", "brûlée"});
    CHECK(tokenize("Привет—мир") == Strings{"привет", "мир"});
    CHECK(tokenize("ab\xFF" "cd") == Strings{"ab", "cd"});
  }

  TEST_CASE("fit_vocabulary on the toy corpus") {
    const auto vocab = toy_vocab();
    REQUIRE(vocab.size() == 3);
    CHECK(vocab.terms() == Strings{"a", "b", "c"});
    CHECK(vocab.idf()[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(vocab.idf()[0] == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-15));
    CHECK(vocab.fitted_on() == 3);

    const auto only_b = toy_vocab(2);
    CHECK(only_b.terms() == Strings{"b"});
  }

  TEST_CASE("fit_vocabulary errors") {
    const Strings empty;
    CHECK_THROWS_AS(fit_vocabulary(std::span<const std::string>(empty), 1, 10), Error);
    const Strings no_tokens{"!!", "..."};
    try {
      fit_vocabulary(std::span<const std::string>(no_tokens), 1, 10);
      FAIL("expected EmptyVocabulary");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyVocabulary);
    }
  }

  TEST_CASE("max_features keeps highest df with lexicographic ties") {
    const Strings corpus{"x y z", "x y", "x w"};
    const auto vocab = fit_vocabulary(std::span<const std::string>(corpus), 1, 2);
    CHECK(vocab.terms() == Strings{"x", "y"});
    const auto tie = fit_vocabulary(std::span<const std::string>(corpus), 1, 3);
    CHECK(tie.terms() == Strings{"w", "x", "y"});
  }

  TEST_CASE("small corpora fall back to min_df = 1") {
    const Strings corpus{"alpha beta", "gamma"};
    CHECK(fit_vocabulary(std::span<const std::string>(corpus), VocabularyOptions{}).size() == 3);
  }

  TEST_CASE("vectorize") {
    const auto vocab = toy_vocab();
    const auto single = vectorize("c c", vocab);
    REQUIRE(single.entries.size() == 1);
    CHECK(single.entries[0].value == doctest::Approx(1.0));

    const auto oov = vectorize("zzz qqq", vocab);
    CHECK(oov.empty());
    CHECK(oov.dim == 3);

    // Frozen from the dense oracle: (2 * idf_b, idf_c) / norm.
    const auto v = vectorize("b b c", vocab);
    REQUIRE(v.entries.size() == 2);
    CHECK(v.entries[0].index == 1);
    CHECK(v.entries[0].value == doctest::Approx(0.7632282916276542).epsilon(1e-14));
    CHECK(v.entries[1].value == doctest::Approx(0.6461289150464732).epsilon(1e-14));
  }

  TEST_CASE("property: vectorize matches the dense reference on random corpora") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
      const auto n_terms = 2 + rng.below(19);
      const auto n_docs = 1 + rng.below(10);
      Strings corpus;
      for (std::size_t d = 0; d < n_docs; ++d) {
        std::string text;
        const auto len = 1 + rng.below(8);
        for (std::size_t k = 0; k < len; ++k) text += "t" + std::to_string(rng.below(n_terms)) + " ";
        corpus.push_back(text);
      }
      const auto vocab = fit_vocabulary(std::span<const std::string>(corpus), 1, 1000);
      for (const auto& text : corpus) {
        const auto expect = oracle::dense_tfidf(corpus, vocab.terms(), text);
        const auto got = vectorize(text, vocab);
        std::vector<double> dense(vocab.size(), 0.0);
        for (const auto& e : got.entries) dense[e.index] = e.value;
        for (std::size_t j = 0; j < dense.size(); ++j) CHECK(std::abs(dense[j] - expect[j]) < 1e-12);
        if (!got.empty()) CHECK(std::abs(got.norm() - 1.0) < 1e-9);
        for (std::size_t k = 1; k < got.entries.size(); ++k) CHECK(got.entries[k - 1].index < got.entries[k].index);
      }
    }
  }

  TEST_CASE("vocabulary JSON round trip") {
    const auto vocab = toy_vocab();
    const auto back = Vocabulary::from_json(vocab.to_json());
    CHECK(back.terms() == vocab.terms());
    CHECK(back.idf() == vocab.idf());
    CHECK(back.digest() == vocab.digest());
    auto j = vocab.to_json();
    j["terms"][0]["index"] = 7;
    CHECK_THROWS_AS(Vocabulary::from_json(j), Error);
  }
}
