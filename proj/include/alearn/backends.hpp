#pragma once

#include "alearn/corpus.hpp"
#include "alearn/loop.hpp"

#include <chrono>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace alearn {

/// An external zero-shot predictor reachable over HTTP.
///
/// Wire contract: POST {endpoint_url} with `{"texts": [...], "labels": [...]}`,
/// expecting HTTP 200 and `{"probs": [[...], ...]}` with one row of length C
/// per text.
struct BackendDescriptor {
  std::string name;
  std::string endpoint_url;
  std::chrono::milliseconds timeout{5000};
  std::size_t max_batch = 64;

  /// Throws InvalidConfig on a malformed URL, non-positive timeout or zero max_batch.
  void validate() const;
};

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 80;
  std::string path;
};

/// Accepts `http://host[:port][/path]`. Throws InvalidConfig.
ParsedUrl parse_url(std::string_view url);

/// Scales a non-negative vector to sum 1; an all-zero vector becomes uniform.
/// Throws BackendProtocolError on negative or non-finite components.
std::vector<double> renormalize(std::vector<double> v);

/// One request carrying every text. Throws BackendUnavailable on transport
/// failure, timeout or a non-200 status, BackendProtocolError on a malformed
/// body or wrongly shaped rows, InvalidConfig when texts is empty or larger
/// than max_batch.
std::vector<std::vector<double>> predict_external(const BackendDescriptor& backend,
                                                  std::span<const std::string> texts,
                                                  const LabelSchema& schema);

using LabelHints = std::map<std::string, std::vector<std::string>>;

/// softmax over per-label counts of hint tokens present in tokenize(text).
/// Throws NoHints when no label has a hint, UnknownLabel for hints keyed by
/// a label outside the schema.
std::vector<double> lexical_zero_shot(std::string_view text, const LabelSchema& schema, const LabelHints& hints);

/// Cold-start adapter for sessions: chunks documents by max_batch.
ColdStartFn external_cold_start(BackendDescriptor backend, LabelSchema schema);
ColdStartFn lexical_cold_start(LabelSchema schema, LabelHints hints);

}  // namespace alearn
