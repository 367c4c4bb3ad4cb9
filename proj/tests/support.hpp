#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "negkb/kb_store.hpp"
#include "negkb/pipeline.hpp"
#include "negkb/providers.hpp"
#include "negkb/siblings.hpp"
#include "negkb/text.hpp"

namespace testing {

inline std::string fixture(const std::string& name) {
  return std::string(NEGKB_FIXTURES) + "/" + name;
}

inline std::string elephant(const std::string& name) { return fixture("elephant/" + name); }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("negkb_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// The elephant fixture at the settings used throughout the suite.
inline negkb::RunConfig elephant_config(const std::string& out_dir) {
  negkb::RunConfig c;
  negkb::apply_config_file(c, elephant("run.conf"));
  c.kb_path = elephant("kb.tsv");
  c.taxonomy_path = elephant("taxonomy.tsv");
  c.embeddings_path = elephant("embeddings.txt");
  c.sim_cache_path = elephant("sim_cache.jsonl");
  c.probe_cache_path = elephant("probe_cache.jsonl");
  c.output_dir = out_dir;
  return c;
}

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::string phrase_name(std::size_t i) { return "trait " + std::to_string(i); }
inline std::string concept_label(std::size_t i) { return "thing " + std::to_string(i); }

// Small random KB: up to `max_concepts` concepts, each with 1..max_phrases
// phrases drawn from a shared pool so overlaps are common.
struct RandomKb {
  negkb::KbIndex kb;
  std::map<std::string, std::set<std::string>> truth;  // independent copy for oracles
  std::vector<std::string> phrase_pool;
};

inline RandomKb random_kb(Rng& rng, std::size_t max_concepts = 20, std::size_t max_phrases = 15,
                          std::size_t pool = 25) {
  RandomKb out;
  for (std::size_t i = 0; i < pool; ++i) out.phrase_pool.push_back(phrase_name(i));
  auto n = pick(rng, 2, max_concepts);
  for (std::size_t c = 0; c < n; ++c) {
    auto name = concept_label(c);
    auto k = pick(rng, 1, max_phrases);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& p = out.phrase_pool[pick(rng, 0, pool - 1)];
      out.kb.add(*negkb::Statement::make(name, p));
      out.truth[name].insert(p);
    }
  }
  return out;
}

// Random sibling set: a random subset of the KB concepts other than target,
// in random order, with a nominal gamma at least as large as the set.
inline negkb::SiblingSet random_sibling_set(Rng& rng, const RandomKb& r, const std::string& target) {
  std::vector<std::string> others;
  for (const auto& [c, _] : r.truth) {
    if (c != target) others.push_back(c);
  }
  std::shuffle(others.begin(), others.end(), rng);
  others.resize(pick(rng, 0, others.size()));
  negkb::SiblingSet s;
  s.target = target;
  s.gamma = std::max<std::size_t>(1, others.size() + pick(rng, 0, 2));
  for (std::size_t i = 0; i < others.size(); ++i) {
    s.siblings.push_back({others[i], 1.0 - 0.01 * static_cast<double>(i)});
  }
  return s;
}

// Every pair of `phrases` gets a similarity on a 0.05 grid.
inline void random_similarity(Rng& rng, const std::vector<std::string>& phrases, negkb::SimilarityCache& cache) {
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    for (std::size_t j = i + 1; j < phrases.size(); ++j) {
      cache.insert(phrases[i], phrases[j], static_cast<double>(pick(rng, 0, 20)) * 0.05);
    }
  }
}

// Predictor returning a fixed list per probe; unknown probes throw.
class TablePredictor final : public negkb::MaskPredictor {
 public:
  std::map<std::string, std::vector<std::string>, std::less<>> table;
  std::vector<std::string> predict(std::string_view probe, std::size_t top_k) const override {
    auto it = table.find(probe);
    if (it == table.end()) throw negkb::ProviderError("no prediction for " + std::string(probe));
    std::vector<std::string> out = it->second;
    if (out.size() > top_k) out.resize(top_k);
    return out;
  }
};

// Similarity provider that always fails; exercises fail-open paths.
class BrokenSimilarity final : public negkb::PhraseSimilarity {
 public:
  double similarity(std::string_view, std::string_view) const override {
    throw negkb::ProviderError("backend down");
  }
};

}  // namespace testing
