#pragma once

#include "alearn/corpus.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace alearn {

/// Lowercased maximal runs of Unicode letters and digits. Input is UTF-8;
/// invalid byte sequences act as separators.
std::vector<std::string> tokenize(std::string_view text);

struct SparseEntry {
  std::size_t index;
  double value;

  bool operator==(const SparseEntry&) const = default;
};

/// Strictly increasing indices, non-zero finite values, unit L2 norm unless empty.
struct SparseVector {
  std::vector<SparseEntry> entries;
  std::size_t dim = 0;

  bool empty() const { return entries.empty(); }
  double norm() const;
  bool operator==(const SparseVector&) const = default;
};

class Vocabulary {
public:
  Vocabulary() = default;
  /// `terms[i]` maps to column i; idf values must be >= 1.
  Vocabulary(std::vector<std::string> terms, std::vector<double> idf, std::size_t fitted_on);

  std::size_t size() const { return terms_.size(); }
  std::size_t fitted_on() const { return fitted_on_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  /// Column index of a term, or -1 when out of vocabulary.
  std::ptrdiff_t index_of(std::string_view term) const;

  std::uint64_t digest() const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

private:
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::size_t fitted_on_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

struct VocabularyOptions {
  std::size_t min_df = 2;
  std::size_t max_features = 50000;
  /// Corpora smaller than this are fitted with min_df = 1.
  std::size_t small_corpus_threshold = 50;
};

/// idf = ln((1+N)/(1+df)) + 1. Throws EmptyCorpus / EmptyVocabulary.
Vocabulary fit_vocabulary(std::span<const std::string> texts, std::size_t min_df,
                          std::size_t max_features);
Vocabulary fit_vocabulary(std::span<const Document> corpus, std::size_t min_df,
                          std::size_t max_features);
/// Applies the small-corpus min_df fallback.
Vocabulary fit_vocabulary(std::span<const std::string> texts, const VocabularyOptions& options);

/// Raw counts times idf, L2-normalised; out-of-vocabulary tokens are dropped.
SparseVector vectorize(std::string_view text, const Vocabulary& vocab);

}  // namespace alearn
