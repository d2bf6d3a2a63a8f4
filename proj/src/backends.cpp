#include "alearn/backends.hpp"

#include "alearn/classifier.hpp"
#include "alearn/error.hpp"
#include "alearn/featurizer.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <set>

namespace alearn {

ParsedUrl parse_url(std::string_view url) {
  ParsedUrl out;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, "URL lacks a scheme: " + std::string(url));
  out.scheme = std::string(url.substr(0, sep));
  if (out.scheme != "http") {
    throw Error(ErrorCode::InvalidConfig, "only http:// endpoints are supported: " + std::string(url));
  }
  auto rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  out.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const auto port = authority.substr(colon + 1);
    if (port.empty() || port.find_first_not_of("0123456789") != std::string_view::npos || port.size() > 5) {
      throw Error(ErrorCode::InvalidConfig, "bad port in URL: " + std::string(url));
    }
    out.port = std::stoi(std::string(port));
    if (out.port < 1 || out.port > 65535) throw Error(ErrorCode::InvalidConfig, "port out of range: " + std::string(url));
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw Error(ErrorCode::InvalidConfig, "URL has no host: " + std::string(url));
  out.host = std::string(authority);
  return out;
}

void BackendDescriptor::validate() const {
  parse_url(endpoint_url);
  if (timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "backend timeout must be positive");
  if (max_batch < 1) throw Error(ErrorCode::InvalidConfig, "backend max_batch must be >= 1");
}

std::vector<double> renormalize(std::vector<double> v) {
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::BackendProtocolError, "probability rows must be finite and non-negative");
    }
    sum += x;
  }
  if (sum == 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    return v;
  }
  for (auto& x : v) x /= sum;
  return v;
}

std::vector<std::vector<double>> predict_external(const BackendDescriptor& backend,
                                                  std::span<const std::string> texts,
                                                  const LabelSchema& schema) {
  backend.validate();
  if (texts.empty()) throw Error(ErrorCode::InvalidConfig, "predict_external needs at least one text");
  if (texts.size() > backend.max_batch) {
    throw Error(ErrorCode::InvalidConfig, std::to_string(texts.size()) + " texts exceed max_batch " +
                                              std::to_string(backend.max_batch));
  }
  const auto url = parse_url(backend.endpoint_url);

  httplib::Client client(url.host, url.port);
  const auto secs = backend.timeout.count() / 1000;
  const auto usecs = (backend.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  const nlohmann::json request = {{"texts", std::vector<std::string>(texts.begin(), texts.end())},
                                  {"labels", schema.labels()}};
  auto result = client.Post(url.path, request.dump(), "application/json");
  if (!result) {
    throw Error(ErrorCode::BackendUnavailable,
                backend.name + ": " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw Error(ErrorCode::BackendUnavailable, backend.name + ": HTTP " + std::to_string(result->status));
  }

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BackendProtocolError, backend.name + ": " + e.what());
  }
  if (!body.is_object() || !body.contains("probs") || !body["probs"].is_array()) {
    throw Error(ErrorCode::BackendProtocolError, backend.name + ": response lacks a probs array");
  }
  const auto& rows = body["probs"];
  if (rows.size() != texts.size()) {
    throw Error(ErrorCode::BackendProtocolError, backend.name + ": " + std::to_string(rows.size()) +
                                                     " rows for " + std::to_string(texts.size()) + " texts");
  }
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != schema.size()) {
      throw Error(ErrorCode::BackendProtocolError, backend.name + ": row length differs from label count");
    }
    std::vector<double> v;
    v.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw Error(ErrorCode::BackendProtocolError, backend.name + ": non-numeric probability");
      v.push_back(x.get<double>());
    }
    out.push_back(renormalize(std::move(v)));
  }
  return out;
}

std::vector<double> lexical_zero_shot(std::string_view text, const LabelSchema& schema, const LabelHints& hints) {
  std::vector<std::set<std::string>> terms(schema.size());
  bool any = false;
  for (const auto& [label, words] : hints) {
    const auto c = schema.index_of(label);
    for (const auto& w : words) {
      for (auto& t : tokenize(w)) {
        terms[c].insert(std::move(t));
        any = true;
      }
    }
  }
  if (!any) throw Error(ErrorCode::NoHints, "no label has a hint term");

  std::vector<double> scores(schema.size(), 0.0);
  for (const auto& token : tokenize(text)) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (terms[c].contains(token)) scores[c] += 1.0;
    }
  }
  return softmax(scores);
}

ColdStartFn external_cold_start(BackendDescriptor backend, LabelSchema schema) {
  return [backend = std::move(backend), schema = std::move(schema)](std::span<const Document> docs)
             -> std::optional<std::vector<std::vector<double>>> {
    std::vector<std::vector<double>> out;
    out.reserve(docs.size());
    for (std::size_t start = 0; start < docs.size(); start += backend.max_batch) {
      const auto end = std::min(docs.size(), start + backend.max_batch);
      std::vector<std::string> texts;
      for (std::size_t i = start; i < end; ++i) texts.push_back(docs[i].text);
      for (auto& row : predict_external(backend, texts, schema)) out.push_back(std::move(row));
    }
    return out;
  };
}

ColdStartFn lexical_cold_start(LabelSchema schema, LabelHints hints) {
  return [schema = std::move(schema), hints = std::move(hints)](std::span<const Document> docs)
             -> std::optional<std::vector<std::vector<double>>> {
    std::vector<std::vector<double>> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) out.push_back(lexical_zero_shot(doc.text, schema, hints));
    return out;
  };
}

}  // namespace alearn
