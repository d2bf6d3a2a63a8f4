#include "alearn/error.hpp"
#include "alearn/loop.hpp"
#include "alearn/synthetic.hpp"

#include "../support/oracles.hpp"
#include "../support/spam.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace alearn;

namespace {

SyntheticCorpus small_corpus(std::size_t pool, std::size_t eval, std::uint64_t seed = 42) {
  SyntheticSpec spec;
  spec.pool_size = pool;
  spec.eval_size = eval;
  spec.seed = seed;
  return make_synthetic_corpus(spec);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an alearn::Error");
  return ErrorCode::Io;
}

std::vector<LabelAssignment> gold_labels(const SessionState& s, const std::vector<BatchItem>& batch) {
  std::vector<LabelAssignment> out;
  for (const auto& item : batch) out.push_back({item.doc.doc_id, *s.corpus->doc(item.doc.doc_id).gold_label});
  return out;
}

}  // namespace

TEST_SUITE("loop") {
  TEST_CASE("protocol and config parsing") {
    CHECK(parse_protocol("paper_protocol") == Protocol::Paper);
    CHECK(parse_protocol("pool") == Protocol::Pool);
    CHECK_THROWS_AS(parse_protocol("other"), Error);

    SessionConfig c;
    CHECK(c.planned_rounds() == 15);
    CHECK_NOTHROW(c.validate());
    c.max_labels = 155;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = {};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), Error);

    SessionConfig d;
    d.strategy = Strategy::Random;
    d.protocol = Protocol::Pool;
    d.seed = 9;
    const auto back = SessionConfig::from_json(d.to_json());
    CHECK(back.strategy == Strategy::Random);
    CHECK(back.protocol == Protocol::Pool);
    CHECK(back.seed == 9);
    CHECK(back.train == d.train);
  }

  TEST_CASE("paper protocol bookkeeping over a full run") {
    const auto corpus = small_corpus(0, 600);
    SessionConfig cfg;
    SessionState final;
    auto oracle = make_oracle(corpus.eval, 4, 0.0, 1);
    const auto curve = run_benchmark(corpus.eval, {}, corpus.schema, cfg, oracle, &final);

    REQUIRE(curve.size() == 16);
    for (std::size_t r = 0; r < curve.size(); ++r) {
      CHECK(curve[r].n_labels == 10 * r);
      CHECK(curve[r].eval_size == 600 - 10 * r);
      CHECK(curve[r].confusion.total() == 600 - 10 * r);
    }
    CHECK(final.round == 15);
    CHECK(final.labeled.size() == 150);
    std::set<std::string> labeled;
    for (const auto& a : final.labeled) {
      CHECK(labeled.insert(a.doc_id).second);
      CHECK_FALSE(final.eval.contains(a.doc_id));
      CHECK(a.source == AnnotationSource::Oracle);
    }
    CHECK(final.eval.size() == 450);
    CHECK(final.pool.empty());
    for (std::size_t i = 0; i < final.labeled.size(); ++i) CHECK(final.labeled[i].round == i / 10 + 1);

    CHECK(code_of([&] { next_batch(final); }) == ErrorCode::BudgetExhausted);
  }

  TEST_CASE("pool protocol keeps the eval set fixed") {
    const auto corpus = small_corpus(200, 100);
    SessionConfig cfg;
    cfg.protocol = Protocol::Pool;
    cfg.max_labels = 50;
    SessionState final;
    auto oracle = make_oracle(corpus.pool, 4, 0.0, 1);
    const auto curve = run_benchmark(corpus.eval, corpus.pool, corpus.schema, cfg, oracle, &final);
    REQUIRE(curve.size() == 6);
    for (const auto& r : curve) CHECK(r.eval_size == 100);
    CHECK(final.pool.size() == 150);
    CHECK(final.eval.size() == 100);
  }

  TEST_CASE("a pool smaller than the budget stops early") {
    const auto corpus = small_corpus(25, 40);
    SessionConfig cfg;
    cfg.protocol = Protocol::Pool;
    auto oracle = make_oracle(corpus.pool, 4, 0.0, 1);
    SessionState final;
    const auto curve = run_benchmark(corpus.eval, corpus.pool, corpus.schema, cfg, oracle, &final);
    REQUIRE(curve.size() == 4);
    CHECK(curve.back().n_labels == 25);
    CHECK(code_of([&] { next_batch(final); }) == ErrorCode::PoolExhausted);
  }

  TEST_CASE("submission validation") {
    const auto corpus = small_corpus(0, 60);
    SessionConfig cfg;
    cfg.max_labels = 20;
    const auto s0 = create_session({}, corpus.eval, corpus.schema, cfg);
    CHECK(s0.curve.size() == 1);
    CHECK(s0.curve[0].n_labels == 0);

    const auto batch = next_batch(s0);
    REQUIRE(batch.size() == 10);
    const auto labels = gold_labels(s0, batch);
    const auto s1 = submit_annotations(s0, labels);

    CHECK(code_of([&] { submit_annotations(s1, labels); }) == ErrorCode::NotInPool);
    const std::vector<LabelAssignment> dup{{*s1.eval.begin(), 0}, {*s1.eval.begin(), 0}};
    CHECK(code_of([&] { submit_annotations(s1, dup); }) == ErrorCode::NotInPool);
    std::vector<LabelAssignment> unknown{{*s1.eval.begin(), 9}};
    CHECK(code_of([&] { submit_annotations(s1, unknown); }) == ErrorCode::UnknownLabel);
    CHECK(code_of([&] { submit_annotations(s1, {}); }) == ErrorCode::EmptyBatch);
    std::vector<LabelAssignment> too_many;
    for (auto it = s1.eval.begin(); too_many.size() < 11; ++it) too_many.push_back({*it, 0});
    CHECK(code_of([&] { submit_annotations(s1, too_many); }) == ErrorCode::InvalidBatchSize);

    // The earlier state is untouched by later submissions.
    CHECK(s0.labeled.empty());
    CHECK(s0.eval.size() == 60);
  }

  TEST_CASE("each round retrains from scratch on every label so far") {
    const auto corpus = small_corpus(0, 80);
    SessionConfig cfg;
    cfg.max_labels = 30;
    auto s = create_session({}, corpus.eval, corpus.schema, cfg);
    for (int r = 0; r < 3; ++r) s = submit_annotations(s, gold_labels(s, next_batch(s)));

    std::vector<LabeledVector> examples;
    for (const auto& a : s.labeled) examples.push_back({s.corpus->vector(a.doc_id), a.label});
    const auto expected = train(examples, s.schema(), s.vocab().size(), cfg.train, s.vocab().digest());
    CHECK(*s.model == expected);
  }

  TEST_CASE("benchmark runs are reproducible") {
    const auto corpus = small_corpus(150, 100, 5);
    for (auto strategy : {Strategy::MaxEntropy, Strategy::Random, Strategy::MisclassifiedFirst}) {
      SessionConfig cfg;
      cfg.protocol = Protocol::Pool;
      cfg.strategy = strategy;
      cfg.max_labels = 40;
      auto o1 = make_oracle(corpus.pool, 4, 0.1, 3);
      auto o2 = make_oracle(corpus.pool, 4, 0.1, 3);
      CHECK(curve_to_csv(run_benchmark(corpus.eval, corpus.pool, corpus.schema, cfg, o1)) ==
            curve_to_csv(run_benchmark(corpus.eval, corpus.pool, corpus.schema, cfg, o2)));
    }
  }

  TEST_CASE("oracle noise rate") {
    GoldMap gold{{"x", 2}};
    Oracle oracle(gold, 5, 0.2, 77);
    std::size_t wrong = 0;
    std::vector<std::size_t> counts(5, 0);
    const std::size_t draws = 10000;
    for (std::size_t i = 0; i < draws; ++i) {
      const auto l = oracle.label("x");
      ++counts[l];
      wrong += l != 2 ? 1 : 0;
    }
    CHECK(std::abs(static_cast<double>(wrong) / draws - 0.2) <= 0.01);
    // Wrong labels spread over the other classes.
    for (std::size_t c : {0, 1, 3, 4}) CHECK(std::abs(static_cast<double>(counts[c]) / draws - 0.05) < 0.01);

    Oracle clean(gold, 5, 0.0, 1);
    for (int i = 0; i < 100; ++i) CHECK(clean.label("x") == 2);
    CHECK(code_of([&] { clean.label("missing"); }) == ErrorCode::MissingGold);
    CHECK_THROWS_AS(Oracle(gold, 5, 1.5, 1), Error);
  }

  TEST_CASE("cold start drives the first selection only") {
    const auto corpus = small_corpus(0, 40);
    SessionConfig cfg;
    cfg.max_labels = 20;
    ColdStartFn cold = [](std::span<const Document> docs) {
      std::vector<std::vector<double>> probs;
      for (const auto& d : docs) {
        // Only e00007 looks uncertain.
        probs.push_back(d.doc_id == "e00007" ? std::vector<double>{0.25, 0.25, 0.25, 0.25}
                                             : std::vector<double>{0.97, 0.01, 0.01, 0.01});
      }
      return std::optional(probs);
    };
    const auto s0 = create_session({}, corpus.eval, corpus.schema, cfg, "cs", cold);
    REQUIRE(s0.cold_start);
    CHECK(next_batch(s0).front().doc.doc_id == "e00007");
    const auto s1 = submit_annotations(s0, gold_labels(s0, next_batch(s0)));
    const auto probs = next_batch(s1).front().prediction.probs;
    CHECK(probs != std::vector<double>{0.97, 0.01, 0.01, 0.01});

    ColdStartFn broken = [](std::span<const Document>) -> std::optional<std::vector<std::vector<double>>> {
      throw Error(ErrorCode::BackendUnavailable, "down");
    };
    const auto fallback = create_session({}, corpus.eval, corpus.schema, cfg, "cs", broken);
    CHECK_FALSE(fallback.cold_start);
    CHECK(fallback.curve[0].mean_pool_entropy == doctest::Approx(std::log(4.0)));
  }

  TEST_CASE("create_session errors") {
    const auto corpus = small_corpus(10, 10);
    SessionConfig cfg;
    CHECK(code_of([&] { create_session({}, {}, corpus.schema, cfg); }) == ErrorCode::EmptyEval);
    auto unlabeled = corpus.eval;
    unlabeled[0].gold_label.reset();
    CHECK(code_of([&] { create_session({}, unlabeled, corpus.schema, cfg); }) == ErrorCode::MissingGold);
    cfg.protocol = Protocol::Pool;
    CHECK(code_of([&] { create_session({}, corpus.eval, corpus.schema, cfg); }) == ErrorCode::PoolExhausted);
    auto clash = corpus.pool;
    clash[0].doc_id = corpus.eval[0].doc_id;
    CHECK(code_of([&] { create_session(clash, corpus.eval, corpus.schema, cfg); }) == ErrorCode::DuplicateId);
  }

  TEST_CASE("annotations serialize one JSON object per line") {
    const LabelSchema schema({"neg", "pos"});
    std::vector<Annotation> a{{"d1", 1, 1, AnnotationSource::Human, "2026-01-01T00:00:00Z"},
                              {"d2", 0, 1, AnnotationSource::Oracle, ""}};
    const auto text = annotations_to_jsonl(a, schema);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
    CHECK(first["doc_id"] == "d1");
    CHECK(first["label"] == "pos");
    CHECK(first["round"] == 1);
    CHECK(first["source"] == "human");
  }

  TEST_CASE("spam walkthrough: mean pool entropy per round matches the dense reference") {
    const auto docs = fixtures::spam_documents();
    SessionConfig cfg;
    cfg.batch_size = 1;
    cfg.max_labels = 2;
    auto s = create_session({}, docs, fixtures::spam_schema(), cfg, "spam");
    CHECK(s.curve[0].mean_pool_entropy == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    auto reference_mean = [&](const SessionState& state) {
      std::vector<LabeledVector> examples;
      for (const auto& a : state.labeled) examples.push_back({state.corpus->vector(a.doc_id), a.label});
      const auto model = oracle::dense_train(examples, 2, state.vocab().size(), cfg.train);
      double sum = 0.0;
      for (const auto& id : state.selection_pool()) sum += oracle::entropy(predict(model, state.corpus->vector(id)));
      return sum / static_cast<double>(state.selection_pool().size());
    };

    const std::vector<LabelAssignment> first{{"m1", fixtures::kNotSpam}};
    s = submit_annotations(s, first);
    CHECK(std::abs(s.curve[1].mean_pool_entropy - reference_mean(s)) < 1e-9);
    // One class seen so far: the unregularized bias pushes everything towards it.
    CHECK(s.curve[1].mean_pool_entropy < 0.2);

    const std::vector<LabelAssignment> second{{"m2", fixtures::kSpam}};
    s = submit_annotations(s, second);
    CHECK(std::abs(s.curve[2].mean_pool_entropy - reference_mean(s)) < 1e-9);
    // m3, m5 and m6 share no terms with m1 or m2 and return to ln 2.
    for (const char* id : {"m3", "m5", "m6"}) {
      CHECK(entropy(predict(*s.model, s.corpus->vector(id))) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
  }
}
