#pragma once

#include "alearn/corpus.hpp"

#include <cstdint>
#include <vector>

namespace alearn {

/// Keyword-driven synthetic classification corpus. Each class owns a set of
/// exclusive keywords; every document mixes a few keywords of its class with
/// words drawn from a shared filler vocabulary.
struct SyntheticSpec {
  std::size_t classes = 4;
  std::size_t keywords_per_class = 5;
  std::size_t filler_vocabulary = 200;
  std::size_t pool_size = 2000;
  std::size_t eval_size = 1000;
  std::size_t min_keywords = 1;
  std::size_t max_keywords = 3;
  std::size_t min_filler = 6;
  std::size_t max_filler = 14;
  /// Probability that a document also carries one keyword of another class.
  double confuser_rate = 0.0;
  std::uint64_t seed = 42;
};

struct SyntheticCorpus {
  LabelSchema schema;
  std::vector<Document> pool;
  std::vector<Document> eval;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace alearn
