#include "negkb/remote.hpp"

#include <algorithm>

// Eigen first: httplib drags in <resolv.h>, whose `_res` macro clashes with Eigen.
#include "negkb/embedding_store.hpp"

#include <httplib.h>
#include <json.hpp>

#include "negkb/error.hpp"
#include "negkb/text.hpp"

namespace negkb {

using nlohmann::json;

ModelServiceClient::ModelServiceClient(std::string endpoint, double timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  if (endpoint_.empty()) throw ProviderError("model service endpoint is empty");
}

std::string ModelServiceClient::post(const std::string& path, const std::string& body) const {
  httplib::Client client(endpoint_);
  auto secs = static_cast<time_t>(timeout_seconds_);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  auto res = client.Post(path, body, "application/json");
  if (!res) {
    throw ProviderError("model service " + endpoint_ + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProviderError("model service " + endpoint_ + path + ": HTTP " +
                        std::to_string(res->status) + " " + res->body);
  }
  if (res->has_header("X-Model-Id")) {
    std::lock_guard lock(model_mutex_);
    model_id_ = res->get_header_value("X-Model-Id");
  }
  return res->body;
}

std::string ModelServiceClient::model_id() const {
  std::lock_guard lock(model_mutex_);
  return model_id_;
}

std::vector<std::vector<double>> ModelServiceClient::embed(const std::vector<std::string>& texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += kMaxEmbedBatch) {
    auto end = std::min(texts.size(), start + kMaxEmbedBatch);
    json request{{"texts", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                                     texts.begin() + static_cast<std::ptrdiff_t>(end))}};
    auto body = json::parse(post("/embed", request.dump()), nullptr, false);
    if (body.is_discarded() || !body.contains("embeddings") || !body["embeddings"].is_array()) {
      throw ProviderError("model service /embed: malformed response");
    }
    const auto& vecs = body["embeddings"];
    if (vecs.size() != end - start) {
      throw ProviderError("model service /embed: expected " + std::to_string(end - start) +
                          " vectors, got " + std::to_string(vecs.size()));
    }
    for (const auto& v : vecs) {
      if (!v.is_array() || v.empty()) throw ProviderError("model service /embed: empty vector");
      std::vector<double> row;
      row.reserve(v.size());
      for (const auto& x : v) {
        if (!x.is_number()) throw ProviderError("model service /embed: non-numeric component");
        row.push_back(x.get<double>());
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::vector<std::string> ModelServiceClient::predict_masked(std::string_view probe,
                                                            std::size_t top_k) const {
  json request{{"template", std::string(probe)}, {"top_k", top_k}};
  auto body = json::parse(post("/predict_masked", request.dump()), nullptr, false);
  if (body.is_discarded() || !body.contains("tokens") || !body["tokens"].is_array()) {
    throw ProviderError("model service /predict_masked: malformed response");
  }
  std::vector<std::string> tokens;
  for (const auto& t : body["tokens"]) {
    if (!t.is_string()) throw ProviderError("model service /predict_masked: non-string token");
    tokens.push_back(t.get<std::string>());
  }
  if (tokens.size() > top_k) tokens.resize(top_k);
  return tokens;
}

std::string ModelServiceClient::health() const {
  httplib::Client client(endpoint_);
  auto secs = static_cast<time_t>(timeout_seconds_);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  auto res = client.Get("/health");
  if (!res || res->status != 200) throw ProviderError("model service " + endpoint_ + "/health unavailable");
  return res->body;
}

double RemoteSimilarity::similarity(std::string_view a, std::string_view b) const {
  auto na = normalize(a);
  auto nb = normalize(b);
  if (na == nb) return 1.0;
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mutex_);
    if (!vectors_.contains(na)) missing.push_back(na);
    if (!vectors_.contains(nb)) missing.push_back(nb);
  }
  if (!missing.empty()) {
    auto vecs = client_->embed(missing);
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i) vectors_.emplace(missing[i], std::move(vecs[i]));
  }
  std::lock_guard lock(mutex_);
  const auto& va = vectors_.find(na)->second;
  const auto& vb = vectors_.find(nb)->second;
  if (va.size() != vb.size()) throw ProviderError("model service returned mismatched dimensions");
  Eigen::Map<const Eigen::VectorXd> ea(va.data(), static_cast<Eigen::Index>(va.size()));
  Eigen::Map<const Eigen::VectorXd> eb(vb.data(), static_cast<Eigen::Index>(vb.size()));
  if (ea.squaredNorm() == 0 || eb.squaredNorm() == 0) {
    throw ProviderError("model service returned a zero vector");
  }
  return std::clamp(cosine(ea, eb), -1.0, 1.0);
}

std::vector<std::string> RemoteMaskPredictor::predict(std::string_view probe, std::size_t top_k) const {
  return client_->predict_masked(probe, top_k);
}

}  // namespace negkb
