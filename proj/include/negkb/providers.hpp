#pragma once

#include <cstddef>
#include <fstream>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace negkb {

/// Symmetric phrase similarity in [-1, 1]. Implementations throw
/// ProviderError (or CacheMissError) when they cannot answer.
class PhraseSimilarity {
 public:
  virtual ~PhraseSimilarity() = default;
  virtual double similarity(std::string_view a, std::string_view b) const = 0;
};

/// Masked-token prediction: model-ranked, duplicate-free tokens for a
/// template with one mask slot, at most `top_k` of them.
class MaskPredictor {
 public:
  virtual ~MaskPredictor() = default;
  virtual std::vector<std::string> predict(std::string_view probe, std::size_t top_k) const = 0;
};

inline constexpr std::string_view kMaskToken = "[MASK]";

/// "[MASK] <phrase>."
std::string probe_template(std::string_view phrase);

std::size_t count_mask_slots(std::string_view probe);

/// The part of a concept a single predicted token can match: the last word.
std::string probe_match_term(std::string_view concept_name);

/// Case-insensitive match allowing a plural "s"/"es" on either side.
bool token_matches(std::string_view token, std::string_view term);

/// 1-based rank of the first of the top-`tau` predictions matching the
/// concept, if any. Throws MalformedProbeError unless the probe has exactly
/// one mask slot, std::invalid_argument when tau == 0.
std::optional<std::size_t> probe_rank(const MaskPredictor& predictor, std::string_view probe,
                                      std::string_view concept_name, std::size_t tau);

/// Serializes appends to a cache file. Opened lazily, append mode.
class CacheAppender {
 public:
  explicit CacheAppender(std::string path) : path_(std::move(path)) {}
  void append(const std::string& record_line);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mutex_;
  std::ofstream out_;
};

/// Phrase-pair similarities keyed on the unordered pair of normalized
/// phrases. JSONL on disk: {"a":..,"b":..,"sim":..} with a <= b, plus an
/// optional {"model":..} header record.
///
/// On a miss, consults the fallback provider if one is set and records the
/// answer (in memory and through the appender); otherwise throws
/// CacheMissError naming the pair.
class SimilarityCache final : public PhraseSimilarity {
 public:
  SimilarityCache() = default;

  /// Reads records, rejecting out-of-order keys, values outside [-1,1], and
  /// conflicting duplicates.
  void read(std::istream& in);
  void read_file(const std::string& path);
  void write(std::ostream& out) const;

  void insert(std::string_view a, std::string_view b, double sim);
  std::optional<double> find(std::string_view a, std::string_view b) const;
  std::size_t size() const;
  const std::string& model_id() const { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }

  void set_fallback(std::shared_ptr<const PhraseSimilarity> fallback,
                    std::shared_ptr<CacheAppender> appender = nullptr);

  double similarity(std::string_view a, std::string_view b) const override;

 private:
  using Key = std::pair<std::string, std::string>;
  static Key key(std::string_view a, std::string_view b);

  mutable std::shared_mutex mutex_;
  mutable std::map<Key, double> table_;
  std::string model_id_;
  std::shared_ptr<const PhraseSimilarity> fallback_;
  std::shared_ptr<CacheAppender> appender_;
};

/// Stored masked-prediction lists keyed by probe template. JSONL on disk:
/// {"template":..,"tokens":[..]}. Lists hold the top-τmax tokens seen when
/// the cache was dumped; `predict` truncates to the requested depth.
class ProbeCache final : public MaskPredictor {
 public:
  ProbeCache() = default;

  /// Rejects records with duplicate tokens, conflicting templates, or a
  /// mask-slot count other than one.
  void read(std::istream& in);
  void read_file(const std::string& path);
  void write(std::ostream& out) const;

  void insert(std::string_view probe, std::vector<std::string> tokens);
  std::size_t size() const;
  const std::string& model_id() const { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }

  /// Fallback requests are made at max(top_k, fallback_depth) so later,
  /// deeper cutoffs are answered from the cache.
  void set_fallback(std::shared_ptr<const MaskPredictor> fallback, std::size_t fallback_depth,
                    std::shared_ptr<CacheAppender> appender = nullptr);

  std::vector<std::string> predict(std::string_view probe, std::size_t top_k) const override;

 private:
  mutable std::shared_mutex mutex_;
  mutable std::map<std::string, std::vector<std::string>, std::less<>> table_;
  std::string model_id_;
  std::shared_ptr<const MaskPredictor> fallback_;
  std::size_t fallback_depth_ = 0;
  std::shared_ptr<CacheAppender> appender_;
};

}  // namespace negkb
