#include "negkb/providers.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "negkb/error.hpp"
#include "negkb/text.hpp"

namespace negkb {

using nlohmann::json;

namespace {

// Probe keys keep case ("[MASK]") but collapse whitespace.
std::string probe_key(std::string_view probe) {
  std::string out;
  bool space = false;
  for (char c : trim(probe)) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = true;
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

bool equals_plural(std::string_view longer, std::string_view shorter) {
  if (longer.size() == shorter.size() + 1) {
    return longer.back() == 's' && longer.substr(0, shorter.size()) == shorter;
  }
  if (longer.size() == shorter.size() + 2) {
    return longer.substr(shorter.size()) == "es" && longer.substr(0, shorter.size()) == shorter;
  }
  return false;
}

}  // namespace

std::string probe_template(std::string_view phrase) {
  std::string out(kMaskToken);
  out += ' ';
  out += phrase;
  out += '.';
  return out;
}

std::size_t count_mask_slots(std::string_view probe) {
  std::size_t n = 0;
  for (auto pos = probe.find(kMaskToken); pos != std::string_view::npos;
       pos = probe.find(kMaskToken, pos + kMaskToken.size())) {
    ++n;
  }
  return n;
}

std::string probe_match_term(std::string_view concept_name) {
  auto c = normalize(concept_name);
  auto space = c.rfind(' ');
  return space == std::string::npos ? c : c.substr(space + 1);
}

bool token_matches(std::string_view token, std::string_view term) {
  auto t = to_lower(trim(token));
  auto c = to_lower(trim(term));
  if (t.empty() || c.empty()) return false;
  return t == c || equals_plural(t, c) || equals_plural(c, t);
}

std::optional<std::size_t> probe_rank(const MaskPredictor& predictor, std::string_view probe,
                                      std::string_view concept_name, std::size_t tau) {
  if (tau == 0) throw std::invalid_argument("probe_rank: tau must be >= 1");
  if (auto slots = count_mask_slots(probe); slots != 1) {
    throw MalformedProbeError("probe '" + std::string(probe) + "' has " + std::to_string(slots) +
                              " mask slots, expected 1");
  }
  const auto term = probe_match_term(concept_name);
  const auto tokens = predictor.predict(probe, tau);
  const auto depth = std::min(tau, tokens.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (token_matches(tokens[i], term)) return i + 1;
  }
  return std::nullopt;
}

void CacheAppender::append(const std::string& record_line) {
  std::lock_guard lock(mutex_);
  if (!out_.is_open()) {
    out_.open(path_, std::ios::app);
    if (!out_) throw ProviderError("cannot append to cache " + path_);
  }
  out_ << record_line << '\n';
  out_.flush();
}

// ---- SimilarityCache ----

SimilarityCache::Key SimilarityCache::key(std::string_view a, std::string_view b) {
  auto na = normalize(a);
  auto nb = normalize(b);
  if (nb < na) std::swap(na, nb);
  return {std::move(na), std::move(nb)};
}

void SimilarityCache::insert(std::string_view a, std::string_view b, double sim) {
  if (!std::isfinite(sim) || sim < -1.0 || sim > 1.0) {
    throw std::invalid_argument("similarity outside [-1,1]");
  }
  std::unique_lock lock(mutex_);
  table_[key(a, b)] = sim;
}

std::optional<double> SimilarityCache::find(std::string_view a, std::string_view b) const {
  auto k = key(a, b);
  std::shared_lock lock(mutex_);
  auto it = table_.find(k);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::size_t SimilarityCache::size() const {
  std::shared_lock lock(mutex_);
  return table_.size();
}

void SimilarityCache::set_fallback(std::shared_ptr<const PhraseSimilarity> fallback,
                                   std::shared_ptr<CacheAppender> appender) {
  fallback_ = std::move(fallback);
  appender_ = std::move(appender);
}

double SimilarityCache::similarity(std::string_view a, std::string_view b) const {
  auto k = key(a, b);
  if (k.first == k.second) return 1.0;
  {
    std::shared_lock lock(mutex_);
    auto it = table_.find(k);
    if (it != table_.end()) return it->second;
  }
  if (!fallback_) {
    throw CacheMissError("similarity cache miss: (\"" + k.first + "\", \"" + k.second + "\")");
  }
  double sim = std::clamp(fallback_->similarity(k.first, k.second), -1.0, 1.0);
  bool fresh = false;
  {
    std::unique_lock lock(mutex_);
    fresh = table_.emplace(k, sim).second;
  }
  if (fresh && appender_) {
    appender_->append(json{{"a", k.first}, {"b", k.second}, {"sim", sim}}.dump());
  }
  return sim;
}

void SimilarityCache::read(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto where = "similarity cache line " + std::to_string(number) + ": ";
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(where + "invalid JSON");
    if (!j.contains("a") && j.contains("model")) {
      model_id_ = j["model"].is_string() ? j["model"].get<std::string>() : j["model"].dump();
      continue;
    }
    if (!j.contains("a") || !j.contains("b") || !j.contains("sim") || !j["a"].is_string() ||
        !j["b"].is_string() || !j["sim"].is_number()) {
      throw Error(where + "expected {\"a\": string, \"b\": string, \"sim\": number}");
    }
    auto a = normalize(j["a"].get<std::string>());
    auto b = normalize(j["b"].get<std::string>());
    double sim = j["sim"].get<double>();
    if (b < a) throw Error(where + "keys out of order (a must be <= b)");
    if (!std::isfinite(sim) || sim < -1.0 || sim > 1.0) throw Error(where + "sim outside [-1,1]");
    auto [it, inserted] = table_.emplace(Key{a, b}, sim);
    if (!inserted && it->second != sim) throw Error(where + "conflicting duplicate pair");
  }
}

void SimilarityCache::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read similarity cache " + path);
  read(in);
}

void SimilarityCache::write(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  if (!model_id_.empty()) out << json{{"model", model_id_}, {"kind", "similarity"}}.dump() << '\n';
  for (const auto& [k, sim] : table_) {
    out << json{{"a", k.first}, {"b", k.second}, {"sim", sim}}.dump() << '\n';
  }
}

// ---- ProbeCache ----

void ProbeCache::insert(std::string_view probe, std::vector<std::string> tokens) {
  std::set<std::string_view> seen;
  for (const auto& t : tokens) {
    if (!seen.insert(t).second) throw std::invalid_argument("duplicate predicted token: " + t);
  }
  std::unique_lock lock(mutex_);
  table_[probe_key(probe)] = std::move(tokens);
}

std::size_t ProbeCache::size() const {
  std::shared_lock lock(mutex_);
  return table_.size();
}

void ProbeCache::set_fallback(std::shared_ptr<const MaskPredictor> fallback,
                              std::size_t fallback_depth, std::shared_ptr<CacheAppender> appender) {
  fallback_ = std::move(fallback);
  fallback_depth_ = fallback_depth;
  appender_ = std::move(appender);
}

std::vector<std::string> ProbeCache::predict(std::string_view probe, std::size_t top_k) const {
  auto k = probe_key(probe);
  {
    std::shared_lock lock(mutex_);
    auto it = table_.find(k);
    if (it != table_.end()) {
      const auto& tokens = it->second;
      auto n = std::min(top_k, tokens.size());
      return {tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n)};
    }
  }
  if (!fallback_) throw CacheMissError("probe cache miss: \"" + k + "\"");
  auto tokens = fallback_->predict(k, std::max(top_k, fallback_depth_));
  // Remote lists are deduplicated here too; first occurrence keeps its rank.
  std::set<std::string> seen;
  std::vector<std::string> unique;
  for (auto& t : tokens) {
    if (seen.insert(t).second) unique.push_back(std::move(t));
  }
  bool fresh = false;
  {
    std::unique_lock lock(mutex_);
    fresh = table_.emplace(k, unique).second;
  }
  if (fresh && appender_) appender_->append(json{{"template", k}, {"tokens", unique}}.dump());
  if (unique.size() > top_k) unique.resize(top_k);
  return unique;
}

void ProbeCache::read(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto where = "probe cache line " + std::to_string(number) + ": ";
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(where + "invalid JSON");
    if (!j.contains("template") && j.contains("model")) {
      model_id_ = j["model"].is_string() ? j["model"].get<std::string>() : j["model"].dump();
      continue;
    }
    if (!j.contains("template") || !j["template"].is_string() || !j.contains("tokens") ||
        !j["tokens"].is_array()) {
      throw Error(where + "expected {\"template\": string, \"tokens\": [string, ...]}");
    }
    auto probe = probe_key(j["template"].get<std::string>());
    if (count_mask_slots(probe) != 1) throw Error(where + "template needs exactly one [MASK]");
    std::vector<std::string> tokens;
    std::set<std::string> seen;
    for (const auto& t : j["tokens"]) {
      if (!t.is_string()) throw Error(where + "non-string token");
      auto s = t.get<std::string>();
      if (!seen.insert(s).second) throw Error(where + "duplicate token '" + s + "'");
      tokens.push_back(std::move(s));
    }
    auto [it, inserted] = table_.emplace(probe, tokens);
    if (!inserted && it->second != tokens) throw Error(where + "conflicting duplicate template");
  }
}

void ProbeCache::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read probe cache " + path);
  read(in);
}

void ProbeCache::write(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  if (!model_id_.empty()) out << json{{"model", model_id_}, {"kind", "probe"}}.dump() << '\n';
  for (const auto& [probe, tokens] : table_) {
    out << json{{"template", probe}, {"tokens", tokens}}.dump() << '\n';
  }
}

}  // namespace negkb
