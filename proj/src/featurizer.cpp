#include "alearn/featurizer.hpp"

#include "alearn/error.hpp"
#include "alearn/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cwctype>
#include <locale.h>
#include <map>
#include <unordered_set>
#include <wctype.h>

namespace alearn {

namespace {

// Character classes come from the C.UTF-8 locale so that letters outside
// ASCII (accents, Cyrillic, CJK) are treated as word characters.
class Utf8Classifier {
public:
  Utf8Classifier() {
    for (const char* name : {"C.UTF-8", "C.utf8", "en_US.UTF-8"}) {
      locale_ = newlocale(LC_CTYPE_MASK, name, static_cast<locale_t>(0));
      if (locale_ != static_cast<locale_t>(0)) break;
    }
  }
  ~Utf8Classifier() {
    if (locale_ != static_cast<locale_t>(0)) freelocale(locale_);
  }
  Utf8Classifier(const Utf8Classifier&) = delete;
  Utf8Classifier& operator=(const Utf8Classifier&) = delete;

  bool is_word(char32_t cp) const {
    if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    if (locale_ == static_cast<locale_t>(0)) return false;
    return iswalnum_l(static_cast<wint_t>(cp), locale_) != 0;
  }

  char32_t lower(char32_t cp) const {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
    if (locale_ == static_cast<locale_t>(0)) return cp;
    return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), locale_));
  }

private:
  locale_t locale_ = static_cast<locale_t>(0);
};

const Utf8Classifier& classifier() {
  static const Utf8Classifier instance;
  return instance;
}

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point at text[pos], advancing pos. Returns kInvalid on
// malformed input (advancing by one byte).
char32_t decode(std::string_view text, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + len > text.size()) {
    ++pos;
    return kInvalid;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(text[pos + k]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kInvalid;
  }
  pos += len;
  return cp;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  const auto& cls = classifier();
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = decode(text, pos);
    if (cp != kInvalid && cls.is_word(cp)) {
      encode(cls.lower(cp), current);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double SparseVector::norm() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.value * e.value;
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<double> idf, std::size_t fitted_on)
    : terms_(std::move(terms)), idf_(std::move(idf)), fitted_on_(fitted_on) {
  if (terms_.size() != idf_.size()) {
    throw Error(ErrorCode::DimMismatch, "vocabulary has " + std::to_string(terms_.size()) +
                                            " terms but " + std::to_string(idf_.size()) + " idf values");
  }
  if (terms_.empty()) throw Error(ErrorCode::EmptyVocabulary, "vocabulary must hold at least one term");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!(idf_[i] >= 1.0) || !std::isfinite(idf_[i])) {
      throw Error(ErrorCode::Parse, "idf for '" + terms_[i] + "' must be finite and >= 1");
    }
    if (!index_.emplace(terms_[i], i).second) {
      throw Error(ErrorCode::DuplicateId, "term '" + terms_[i] + "' appears twice");
    }
  }
}

std::ptrdiff_t Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::uint64_t Vocabulary::digest() const {
  std::uint64_t h = fnv1a("vocabulary");
  char buf[32];
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    h = fnv1a(terms_[i], h);
    const int n = std::snprintf(buf, sizeof buf, "\x1f%.17g\x1e", idf_[i]);
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(n)), h);
  }
  return h;
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    terms.push_back({{"term", terms_[i]}, {"index", i}, {"idf", idf_[i]}});
  }
  return {{"fitted_on", fitted_on_}, {"terms", std::move(terms)}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  try {
    const auto& rows = j.at("terms");
    std::vector<std::string> terms(rows.size());
    std::vector<double> idf(rows.size(), 0.0);
    std::vector<bool> filled(rows.size(), false);
    for (const auto& row : rows) {
      const auto index = row.at("index").get<std::size_t>();
      if (index >= rows.size() || filled[index]) {
        throw Error(ErrorCode::Parse, "vocabulary indices must be dense and unique");
      }
      filled[index] = true;
      terms[index] = row.at("term").get<std::string>();
      idf[index] = row.at("idf").get<double>();
    }
    return Vocabulary(std::move(terms), std::move(idf), j.at("fitted_on").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("vocabulary JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

Vocabulary fit_vocabulary(std::span<const std::string> texts, std::size_t min_df,
                          std::size_t max_features) {
  if (texts.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot fit a vocabulary on zero documents");
  if (min_df < 1 || max_features < 1) {
    throw Error(ErrorCode::InvalidConfig, "min_df and max_features must be >= 1");
  }

  std::map<std::string, std::size_t> df;
  for (const auto& text : texts) {
    auto tokens = tokenize(text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[std::move(t)];
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, count] : df) {
    if (count >= min_df) kept.emplace_back(term, count);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::EmptyVocabulary, "no term reaches min_df=" + std::to_string(min_df));
  }
  if (kept.size() > max_features) {
    // kept is already in term order, so a stable sort by df breaks ties lexicographically.
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    kept.resize(max_features);
    std::sort(kept.begin(), kept.end());
  }

  const double n = static_cast<double>(texts.size());
  std::vector<std::string> terms;
  std::vector<double> idf;
  terms.reserve(kept.size());
  idf.reserve(kept.size());
  for (auto& [term, count] : kept) {
    terms.push_back(std::move(term));
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return Vocabulary(std::move(terms), std::move(idf), texts.size());
}

Vocabulary fit_vocabulary(std::span<const Document> corpus, std::size_t min_df,
                          std::size_t max_features) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& doc : corpus) texts.push_back(doc.text);
  return fit_vocabulary(std::span<const std::string>(texts), min_df, max_features);
}

Vocabulary fit_vocabulary(std::span<const std::string> texts, const VocabularyOptions& options) {
  const std::size_t min_df = texts.size() < options.small_corpus_threshold ? 1 : options.min_df;
  return fit_vocabulary(texts, min_df, options.max_features);
}

SparseVector vectorize(std::string_view text, const Vocabulary& vocab) {
  std::map<std::size_t, double> counts;
  for (const auto& token : tokenize(text)) {
    const auto idx = vocab.index_of(token);
    if (idx >= 0) counts[static_cast<std::size_t>(idx)] += 1.0;
  }
  SparseVector v;
  v.dim = vocab.size();
  if (counts.empty()) return v;

  v.entries.reserve(counts.size());
  double sum_sq = 0.0;
  for (const auto& [idx, count] : counts) {
    const double w = count * vocab.idf()[idx];
    v.entries.push_back({idx, w});
    sum_sq += w * w;
  }
  const double norm = std::sqrt(sum_sq);
  for (auto& e : v.entries) e.value /= norm;
  return v;
}

}  // namespace alearn
