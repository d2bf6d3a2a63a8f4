#include "alearn/loop.hpp"

#include "alearn/error.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <unordered_set>

namespace alearn {

Protocol parse_protocol(std::string_view name) {
  if (name == "paper_protocol" || name == "paper") return Protocol::Paper;
  if (name == "pool_protocol" || name == "pool") return Protocol::Pool;
  throw Error(ErrorCode::InvalidConfig, "unknown protocol '" + std::string(name) + "'");
}

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::Paper ? "paper_protocol" : "pool_protocol";
}

std::string_view to_string(AnnotationSource source) {
  return source == AnnotationSource::Human ? "human" : "oracle";
}

void SessionConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (max_labels < batch_size) throw Error(ErrorCode::InvalidConfig, "max_labels must be >= batch_size");
  if (max_labels % batch_size != 0) {
    throw Error(ErrorCode::InvalidConfig, "max_labels must be a multiple of batch_size");
  }
  if (vocabulary.min_df < 1 || vocabulary.max_features < 1) {
    throw Error(ErrorCode::InvalidConfig, "min_df and max_features must be >= 1");
  }
  train.validate();
}

nlohmann::json SessionConfig::to_json() const {
  return {
      {"batch_size", batch_size},
      {"max_labels", max_labels},
      {"strategy", to_string(strategy)},
      {"protocol", to_string(protocol)},
      {"seed", seed},
      {"train",
       {{"learning_rate", train.learning_rate},
        {"epochs", train.epochs},
        {"l2_lambda", train.l2_lambda},
        {"seed", train.seed}}},
      {"vocabulary", {{"min_df", vocabulary.min_df}, {"max_features", vocabulary.max_features}}},
  };
}

SessionConfig SessionConfig::from_json(const nlohmann::json& j) {
  SessionConfig c;
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  try {
    // Signed reads so that negative sizes are reported rather than wrapped.
    auto read_size = [&](const nlohmann::json& obj, const char* key, std::size_t& out) {
      if (!obj.contains(key)) return;
      const auto v = obj.at(key).get<long long>();
      if (v < 0) throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be non-negative");
      out = static_cast<std::size_t>(v);
    };
    read_size(j, "batch_size", c.batch_size);
    read_size(j, "max_labels", c.max_labels);
    if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
    if (j.contains("protocol")) c.protocol = parse_protocol(j.at("protocol").get<std::string>());
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("train")) {
      const auto& t = j.at("train");
      if (t.contains("learning_rate")) c.train.learning_rate = t.at("learning_rate").get<double>();
      if (t.contains("epochs")) c.train.epochs = t.at("epochs").get<int>();
      if (t.contains("l2_lambda")) c.train.l2_lambda = t.at("l2_lambda").get<double>();
      if (t.contains("seed")) c.train.seed = t.at("seed").get<std::uint64_t>();
    }
    if (j.contains("vocabulary")) {
      const auto& v = j.at("vocabulary");
      read_size(v, "min_df", c.vocabulary.min_df);
      read_size(v, "max_features", c.vocabulary.max_features);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
  return c;
}

nlohmann::json annotation_to_json(const Annotation& a, const LabelSchema& schema) {
  return {{"doc_id", a.doc_id},
          {"label", schema.name(a.label)},
          {"label_index", a.label},
          {"round", a.round},
          {"source", to_string(a.source)},
          {"timestamp", a.timestamp}};
}

std::string annotations_to_jsonl(std::span<const Annotation> annotations, const LabelSchema& schema) {
  std::string out;
  for (const auto& a : annotations) {
    out += annotation_to_json(a, schema).dump();
    out += '\n';
  }
  return out;
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Session lifecycle
// ---------------------------------------------------------------------------

namespace {

std::vector<double> probabilities_for(const SessionState& state, const std::string& id) {
  if (state.round == 0 && state.cold_start) {
    if (auto it = state.cold_start->find(id); it != state.cold_start->end()) return it->second;
  }
  return predict(*state.model, state.corpus->vector(id));
}

void score_round(const SessionState& state, RoundMetrics& out) {
  std::vector<LabelIndex> predicted;
  std::vector<LabelIndex> gold;
  predicted.reserve(state.eval.size());
  gold.reserve(state.eval.size());
  for (const auto& id : state.eval) {
    const auto probs = probabilities_for(state, id);
    predicted.push_back(make_prediction(id, probs).predicted);
    gold.push_back(*state.corpus->doc(id).gold_label);
  }
  out = evaluate_round(state.labeled.size(), predicted, gold, state.schema().size());

  const auto& selection = state.selection_pool();
  if (!selection.empty()) {
    double sum = 0.0;
    for (const auto& id : selection) sum += entropy(probabilities_for(state, id));
    out.mean_pool_entropy = sum / static_cast<double>(selection.size());
  }
}

}  // namespace

SessionState create_session(std::vector<Document> pool_docs, std::vector<Document> eval_docs,
                            const LabelSchema& schema, const SessionConfig& config, std::string session_id,
                            const ColdStartFn& cold_start) {
  config.validate();
  if (eval_docs.empty()) throw Error(ErrorCode::EmptyEval, "session needs a non-empty eval set");
  for (const auto& doc : eval_docs) {
    if (!doc.gold_label) throw Error(ErrorCode::MissingGold, "eval document '" + doc.doc_id + "' has no gold label");
  }
  if (config.protocol == Protocol::Paper) {
    pool_docs.clear();
  } else if (pool_docs.empty()) {
    throw Error(ErrorCode::PoolExhausted, "pool_protocol needs a non-empty pool");
  }

  auto corpus = std::make_shared<SessionCorpus>();
  corpus->schema = schema;
  corpus->docs.reserve(pool_docs.size() + eval_docs.size());

  SessionState state;
  state.session_id = std::move(session_id);
  state.config = config;
  auto add = [&](Document doc, std::set<std::string>& into) {
    if (doc.gold_label && *doc.gold_label >= schema.size()) {
      throw Error(ErrorCode::UnknownLabel, "document '" + doc.doc_id + "' has an out-of-schema label");
    }
    if (!corpus->index.emplace(doc.doc_id, corpus->docs.size()).second) {
      throw Error(ErrorCode::DuplicateId, "document id '" + doc.doc_id + "' appears in both pool and eval");
    }
    into.insert(doc.doc_id);
    corpus->docs.push_back(std::move(doc));
  };
  for (auto& doc : pool_docs) add(std::move(doc), state.pool);
  for (auto& doc : eval_docs) add(std::move(doc), state.eval);

  std::vector<std::string> texts;
  texts.reserve(corpus->docs.size());
  for (const auto& doc : corpus->docs) texts.push_back(doc.text);
  corpus->vocab = fit_vocabulary(std::span<const std::string>(texts), config.vocabulary);
  corpus->vectors.reserve(corpus->docs.size());
  for (const auto& doc : corpus->docs) corpus->vectors.push_back(vectorize(doc.text, corpus->vocab));

  state.model = std::make_shared<const Model>(schema.size(), corpus->vocab.size(), schema.digest(),
                                              corpus->vocab.digest(), config.train);

  if (cold_start) {
    try {
      if (auto probs = cold_start(corpus->docs)) {
        if (probs->size() != corpus->docs.size()) {
          throw Error(ErrorCode::BackendProtocolError, "cold start returned the wrong number of rows");
        }
        auto table = std::make_shared<std::unordered_map<std::string, std::vector<double>>>();
        for (std::size_t i = 0; i < probs->size(); ++i) {
          if ((*probs)[i].size() != schema.size()) {
            throw Error(ErrorCode::BackendProtocolError, "cold start row has the wrong length");
          }
          (*table)[corpus->docs[i].doc_id] = std::move((*probs)[i]);
        }
        state.cold_start = std::move(table);
      }
    } catch (const Error& e) {
      // A broken backend leaves the session on the zero model.
      if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::BackendProtocolError) throw;
    }
  }

  state.corpus = std::move(corpus);
  RoundMetrics round0;
  score_round(state, round0);
  state.curve.push_back(std::move(round0));
  return state;
}

std::vector<Prediction> predict_pool(const SessionState& state) {
  std::vector<Prediction> out;
  out.reserve(state.selection_pool().size());
  for (const auto& id : state.selection_pool()) out.push_back(make_prediction(id, probabilities_for(state, id)));
  return out;
}

std::vector<BatchItem> next_batch(const SessionState& state) {
  if (!state.budget_remaining()) {
    throw Error(ErrorCode::BudgetExhausted, std::to_string(state.labeled.size()) + " of " +
                                                std::to_string(state.config.max_labels) + " labels used");
  }
  if (state.selection_pool().empty()) throw Error(ErrorCode::PoolExhausted, "no unlabeled documents remain");

  const auto predictions = predict_pool(state);
  GoldMap gold;
  if (state.config.strategy == Strategy::MisclassifiedFirst) {
    for (const auto& p : predictions) {
      const auto& doc = state.corpus->doc(p.doc_id);
      if (!doc.gold_label) {
        throw Error(ErrorCode::MissingGold, "misclassified_first needs gold for '" + p.doc_id + "'");
      }
      gold.emplace(p.doc_id, *doc.gold_label);
    }
  }
  // Each round gets its own random stream so replays do not depend on how
  // many times the batch was requested.
  const std::uint64_t rank_seed = state.config.seed ^ (0x9e3779b97f4a7c15ULL * (state.round + 1));
  const auto ranked = rank_pool(predictions, state.config.strategy,
                                state.config.strategy == Strategy::MisclassifiedFirst ? &gold : nullptr,
                                rank_seed);
  const auto remaining = state.config.max_labels - state.labeled.size();
  const auto chosen = select_batch(ranked, std::min(state.config.batch_size, remaining));

  std::unordered_map<std::string_view, const Prediction*> by_id;
  for (const auto& p : predictions) by_id.emplace(p.doc_id, &p);
  std::vector<BatchItem> batch;
  batch.reserve(chosen.size());
  for (const auto& id : chosen) batch.push_back({state.corpus->doc(id), *by_id.at(id)});
  return batch;
}

SessionState submit_annotations(const SessionState& state, std::span<const LabelAssignment> annotations,
                                AnnotationSource source, const std::string& timestamp) {
  if (annotations.empty()) throw Error(ErrorCode::EmptyBatch, "no annotations submitted");
  if (annotations.size() > state.config.batch_size) {
    throw Error(ErrorCode::InvalidBatchSize, std::to_string(annotations.size()) + " annotations exceed batch size " +
                                                 std::to_string(state.config.batch_size));
  }
  if (state.labeled.size() + annotations.size() > state.config.max_labels) {
    throw Error(ErrorCode::BudgetExhausted, "submission would exceed max_labels");
  }

  std::unordered_set<std::string_view> seen;
  for (const auto& a : annotations) {
    if (!state.selection_pool().contains(a.doc_id) || !seen.insert(a.doc_id).second) {
      throw Error(ErrorCode::NotInPool, "document '" + a.doc_id + "' is not in the selection pool");
    }
    if (a.label >= state.schema().size()) {
      throw Error(ErrorCode::UnknownLabel, "label index " + std::to_string(a.label) + " is outside the schema");
    }
  }

  SessionState next = state;
  next.round = state.round + 1;
  for (const auto& a : annotations) {
    next.labeled.push_back({a.doc_id, a.label, next.round, source, timestamp});
    next.pool.erase(a.doc_id);
    next.eval.erase(a.doc_id);
  }

  std::vector<LabeledVector> examples;
  examples.reserve(next.labeled.size());
  for (const auto& a : next.labeled) examples.push_back({next.corpus->vector(a.doc_id), a.label});
  next.model = std::make_shared<const Model>(
      train(examples, next.schema(), next.vocab().size(), next.config.train, next.vocab().digest()));

  RoundMetrics metrics;
  if (next.eval.empty()) {
    // Only reachable under paper_protocol once every eval row is labeled.
    metrics.n_labels = next.labeled.size();
    metrics.confusion = ConfusionMatrix(next.schema().size());
    metrics.mean_pool_entropy = std::numeric_limits<double>::quiet_NaN();
  } else {
    score_round(next, metrics);
  }
  next.curve.push_back(std::move(metrics));
  return next;
}

// ---------------------------------------------------------------------------
// Oracle and benchmark driver
// ---------------------------------------------------------------------------

Oracle::Oracle(GoldMap gold, std::size_t classes, double noise_rate, std::uint64_t seed)
    : gold_(std::move(gold)), classes_(classes), noise_rate_(noise_rate), rng_(seed) {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "noise_rate must lie in [0, 1]");
  }
  if (classes < 2) throw Error(ErrorCode::SchemaTooSmall, "oracle needs at least 2 classes");
}

LabelIndex Oracle::label(std::string_view doc_id) {
  auto it = gold_.find(doc_id);
  if (it == gold_.end()) throw Error(ErrorCode::MissingGold, "oracle has no label for '" + std::string(doc_id) + "'");
  // Always consume one draw so the stream position depends only on call count.
  const double u = rng_.uniform();
  if (u >= noise_rate_) return it->second;
  const auto k = static_cast<LabelIndex>(rng_.below(classes_ - 1));
  return k >= it->second ? k + 1 : k;
}

Oracle make_oracle(std::span<const Document> docs, std::size_t classes, double noise_rate, std::uint64_t seed) {
  GoldMap gold;
  for (const auto& doc : docs) {
    if (doc.gold_label) gold.emplace(doc.doc_id, *doc.gold_label);
  }
  return Oracle(std::move(gold), classes, noise_rate, seed);
}

LabelIndex oracle_label(Oracle& oracle, std::string_view doc_id) { return oracle.label(doc_id); }

LearningCurve run_benchmark(std::vector<Document> eval_docs, std::vector<Document> pool_docs,
                            const LabelSchema& schema, const SessionConfig& config, Oracle& oracle,
                            SessionState* final_state) {
  auto state = create_session(std::move(pool_docs), std::move(eval_docs), schema, config, "benchmark");
  while (state.budget_remaining() && !state.selection_pool().empty()) {
    const auto batch = next_batch(state);
    std::vector<LabelAssignment> labels;
    labels.reserve(batch.size());
    for (const auto& item : batch) labels.push_back({item.doc.doc_id, oracle.label(item.doc.doc_id)});
    state = submit_annotations(state, labels, AnnotationSource::Oracle);
  }
  auto curve = state.curve;
  if (final_state) *final_state = std::move(state);
  return curve;
}

}  // namespace alearn
