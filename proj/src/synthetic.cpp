#include "alearn/synthetic.hpp"

#include "alearn/error.hpp"
#include "alearn/random.hpp"

#include <cstdio>
#include <string>

namespace alearn {

namespace {

std::string keyword(std::size_t cls, std::size_t k) {
  return "kw" + std::string(1, static_cast<char>('a' + cls % 26)) + std::to_string(cls / 26) + "x" +
         std::to_string(k);
}

std::string filler(std::size_t k) { return "filler" + std::to_string(k); }

std::string doc_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05zu", prefix, i);
  return buf;
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng.below(hi - lo + 1)); }

Document make_document(Rng& rng, const SyntheticSpec& spec, std::string id) {
  const auto label = static_cast<LabelIndex>(rng.below(spec.classes));
  std::vector<std::string> words;
  const auto n_kw = between(rng, spec.min_keywords, spec.max_keywords);
  for (std::size_t i = 0; i < n_kw; ++i) words.push_back(keyword(label, rng.below(spec.keywords_per_class)));
  if (rng.uniform() < spec.confuser_rate) {
    auto other = static_cast<LabelIndex>(rng.below(spec.classes - 1));
    if (other >= label) ++other;
    words.push_back(keyword(other, rng.below(spec.keywords_per_class)));
  }
  const auto n_fill = between(rng, spec.min_filler, spec.max_filler);
  for (std::size_t i = 0; i < n_fill; ++i) words.push_back(filler(rng.below(spec.filler_vocabulary)));
  rng.shuffle(std::span<std::string>(words));

  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text += ' ';
    text += w;
  }
  return {std::move(id), std::move(text), label};
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.keywords_per_class < 1 || spec.filler_vocabulary < 1 ||
      spec.min_keywords < 1 || spec.min_keywords > spec.max_keywords || spec.min_filler > spec.max_filler) {
    throw Error(ErrorCode::InvalidConfig, "invalid synthetic corpus spec");
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < spec.classes; ++c) names.push_back("class_" + std::to_string(c));

  SyntheticCorpus out{LabelSchema(std::move(names)), {}, {}};
  Rng rng(spec.seed);
  out.pool.reserve(spec.pool_size);
  out.eval.reserve(spec.eval_size);
  for (std::size_t i = 0; i < spec.pool_size; ++i) out.pool.push_back(make_document(rng, spec, doc_id('p', i)));
  for (std::size_t i = 0; i < spec.eval_size; ++i) out.eval.push_back(make_document(rng, spec, doc_id('e', i)));
  return out;
}

}  // namespace alearn
