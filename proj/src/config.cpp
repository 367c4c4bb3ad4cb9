#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>

#include "negkb/error.hpp"
#include "negkb/pipeline.hpp"
#include "negkb/text.hpp"

namespace negkb {

namespace {

std::size_t parse_count(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  std::string s(value);
  char* end = nullptr;
  double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + s + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  auto v = to_lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

FilterStage parse_stage(std::string_view name) {
  auto n = to_lower(trim(name));
  if (n == "kb" || n == "kb_similarity") return FilterStage::kb_similarity;
  if (n == "lm" || n == "lm_probe") return FilterStage::lm_probe;
  if (n == "generic") return FilterStage::generic;
  throw ConfigError("filter_order: unknown stage '" + std::string(name) + "'");
}

const char* stage_name(FilterStage s) {
  switch (s) {
    case FilterStage::kb_similarity: return "kb_similarity";
    case FilterStage::lm_probe: return "lm_probe";
    case FilterStage::generic: return "generic";
  }
  return "?";
}

void apply_ablation(RunConfig& c, std::string_view name) {
  auto n = to_lower(name);
  if (n == "none") return;
  if (n == "no-comparable" || n == "no_comparable") {
    c.use_siblings = false;
  } else if (n == "no-quality" || n == "no_quality") {
    c.use_generic_filter = false;
  } else if (n == "no-plausibility" || n == "no_plausibility") {
    c.use_kb_filter = false;
    c.use_lm_filter = false;
  } else if (n == "no-ranking" || n == "no_ranking") {
    c.use_ranking = false;
  } else {
    throw ConfigError("unknown ablation '" + std::string(name) + "'");
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void apply_setting(RunConfig& c, std::string_view raw_key, std::string_view raw_value) {
  std::string key(trim(raw_key));
  std::replace(key.begin(), key.end(), '-', '_');
  std::string_view value = trim(raw_value);

  if (key == "gamma") c.gamma = parse_count(key, value);
  else if (key == "lambda") c.lambda = parse_real(key, value);
  else if (key == "tau") c.tau = parse_count(key, value);
  else if (key == "beta") c.beta = parse_real(key, value);
  else if (key == "top_k") c.top_k = parse_count(key, value);
  else if (key == "rank_mode") {
    try {
      c.rank_mode = parse_rank_mode(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  else if (key == "hypernym_k") c.hypernym_k = parse_count(key, value);
  else if (key == "horizon") c.horizon = parse_count(key, value);
  else if (key == "use_siblings") c.use_siblings = parse_bool(key, value);
  else if (key == "use_kb_filter") c.use_kb_filter = parse_bool(key, value);
  else if (key == "use_lm_filter") c.use_lm_filter = parse_bool(key, value);
  else if (key == "use_generic_filter") c.use_generic_filter = parse_bool(key, value);
  else if (key == "use_ranking") c.use_ranking = parse_bool(key, value);
  else if (key == "ablation") apply_ablation(c, value);
  else if (key == "filter_order") {
    std::vector<FilterStage> order;
    for (auto part : split(value, ',')) order.push_back(parse_stage(part));
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    require(sorted.size() == 3 && std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "filter_order must name kb, lm and generic once each");
    c.filter_order = std::move(order);
  }
  else if (key == "provider_mode") {
    auto v = to_lower(value);
    if (v == "cache-only" || v == "cache_only") c.provider_mode = ProviderMode::cache_only;
    else if (v == "cache+remote" || v == "cache_and_remote") c.provider_mode = ProviderMode::cache_and_remote;
    else throw ConfigError("provider_mode must be cache-only or cache+remote");
  }
  else if (key == "strictness" || key == "fail_mode") {
    auto v = to_lower(value);
    if (v == "fail-open" || v == "fail_open") c.fail_mode = FailMode::fail_open;
    else if (v == "fail-closed" || v == "fail_closed") c.fail_mode = FailMode::fail_closed;
    else throw ConfigError("strictness must be fail-open or fail-closed");
  }
  else if (key == "remote_endpoint") c.remote_endpoint = std::string(value);
  else if (key == "probe_cache_depth") c.probe_cache_depth = parse_count(key, value);
  else if (key == "seed") c.seed = parse_count(key, value);
  else if (key == "jobs") c.jobs = parse_count(key, value);
  else if (key == "kb") c.kb_path = std::string(value);
  else if (key == "concept_filter") c.concept_filter_path = std::string(value);
  else if (key == "taxonomy") c.taxonomy_path = std::string(value);
  else if (key == "embeddings") c.embeddings_path = std::string(value);
  else if (key == "sim_cache") c.sim_cache_path = std::string(value);
  else if (key == "probe_cache") c.probe_cache_path = std::string(value);
  else if (key == "targets") c.targets_path = std::string(value);
  else if (key == "target") c.targets.emplace_back(value);
  else if (key == "output_dir" || key == "out") c.output_dir = std::string(value);
  else if (key == "dump_candidates") c.dump_candidates = parse_bool(key, value);
  else if (key == "verbose") c.write_verbose = parse_bool(key, value);
  else if (key == "truth") c.truth_path = std::string(value);
  else if (key == "mcqa") c.mcqa_path = std::string(value);
  else if (key == "relation_map") c.relation_map_path = std::string(value);
  else if (key == "report") c.report_path = std::string(value);
  else if (key == "recall_depth") c.recall_depth = parse_count(key, value);
  else if (key == "recall_at") c.recall_at = parse_count(key, value);
  else if (key == "recall_lambda") c.recall_lambda = parse_real(key, value);
  else if (key == "mcqa_lambda") c.mcqa_lambda = parse_real(key, value);
  else throw ConfigError("unknown setting '" + key + "'");
}

void apply_config_file(RunConfig& config, std::istream& in) {
  IngestStats stats;
  for_each_data_line(in, stats, [&](std::size_t number, std::string_view line) {
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (auto hash = value.find(" #"); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    apply_setting(config, line.substr(0, eq), value);
  });
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  apply_config_file(config, in);
}

void RunConfig::validate_settings() const {
  require(gamma >= 1, "gamma must be >= 1");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
  require(tau >= 1, "tau must be >= 1");
  require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0,1]");
  require(top_k >= 1, "top_k must be >= 1");
  require(hypernym_k >= 1, "hypernym_k must be >= 1");
  require(jobs >= 1, "jobs must be >= 1");
  require(recall_depth >= 1 && recall_at >= 1, "recall depths must be >= 1");
  require(!recall_lambda || (*recall_lambda >= 0.0 && *recall_lambda <= 1.0),
          "recall_lambda must lie in [0,1]");
  require(mcqa_lambda >= 0.0 && mcqa_lambda <= 1.0, "mcqa_lambda must lie in [0,1]");
}

void RunConfig::validate() const {
  validate_settings();
  const bool remote = provider_mode == ProviderMode::cache_and_remote;
  if (use_kb_filter || use_ranking) {
    require(remote || !sim_cache_path.empty(),
            "similarity is needed (kb filter or ranking) but neither sim_cache nor cache+remote is set");
  }
  if (use_lm_filter) {
    require(remote || !probe_cache_path.empty(),
            "masked prediction is needed (lm filter) but neither probe_cache nor cache+remote is set");
  }
}

nlohmann::json result_affecting_settings(const RunConfig& c) {
  nlohmann::json order = nlohmann::json::array();
  for (auto s : c.filter_order) order.push_back(stage_name(s));
  return {
      {"gamma", c.gamma},
      {"lambda", c.lambda},
      {"tau", c.tau},
      {"beta", c.beta},
      {"top_k", c.top_k},
      {"rank_mode", to_string(c.rank_mode)},
      {"hypernym_k", c.hypernym_k},
      {"horizon", c.horizon},
      {"use_siblings", c.use_siblings},
      {"use_kb_filter", c.use_kb_filter},
      {"use_lm_filter", c.use_lm_filter},
      {"use_generic_filter", c.use_generic_filter},
      {"use_ranking", c.use_ranking},
      {"filter_order", order},
      {"provider_mode", c.provider_mode == ProviderMode::cache_only ? "cache-only" : "cache+remote"},
      {"strictness", c.fail_mode == FailMode::fail_open ? "fail-open" : "fail-closed"},
      {"probe_cache_depth", c.probe_cache_depth},
      {"seed", c.seed},
  };
}

}  // namespace negkb
