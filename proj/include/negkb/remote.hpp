#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "negkb/providers.hpp"

namespace negkb {

/// Environment variable holding the model-service base URL.
inline constexpr const char* kEndpointEnv = "NEGKB_MODEL_ENDPOINT";

/// Largest batch the service accepts on /embed.
inline constexpr std::size_t kMaxEmbedBatch = 256;

/// JSON-over-HTTP client for the model service:
///   POST /embed           {"texts": [..]}                 -> {"embeddings": [[..], ..]}
///   POST /predict_masked  {"template": "..", "top_k": n}  -> {"tokens": [..]}
///   GET  /health                                          -> {"models": {..}, ..}
/// The serving model is echoed in the X-Model-Id response header.
/// Every failure surfaces as ProviderError.
class ModelServiceClient {
 public:
  /// `endpoint` like "http://127.0.0.1:8000".
  explicit ModelServiceClient(std::string endpoint, double timeout_seconds = 30.0);

  /// Splits into batches of at most kMaxEmbedBatch.
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const;
  std::vector<std::string> predict_masked(std::string_view probe, std::size_t top_k) const;
  std::string health() const;

  const std::string& endpoint() const { return endpoint_; }
  /// Last X-Model-Id seen, empty before the first call.
  std::string model_id() const;

 private:
  std::string post(const std::string& path, const std::string& body) const;

  std::string endpoint_;
  double timeout_seconds_;
  mutable std::mutex model_mutex_;
  mutable std::string model_id_;
};

/// Cosine similarity of service embeddings; vectors are memoized per phrase.
class RemoteSimilarity final : public PhraseSimilarity {
 public:
  explicit RemoteSimilarity(std::shared_ptr<const ModelServiceClient> client)
      : client_(std::move(client)) {}
  double similarity(std::string_view a, std::string_view b) const override;

 private:
  std::shared_ptr<const ModelServiceClient> client_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

class RemoteMaskPredictor final : public MaskPredictor {
 public:
  explicit RemoteMaskPredictor(std::shared_ptr<const ModelServiceClient> client)
      : client_(std::move(client)) {}
  std::vector<std::string> predict(std::string_view probe, std::size_t top_k) const override;

 private:
  std::shared_ptr<const ModelServiceClient> client_;
};

}  // namespace negkb
