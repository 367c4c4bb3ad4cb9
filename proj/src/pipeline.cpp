#include "negkb/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "negkb/error.hpp"
#include "negkb/records.hpp"
#include "negkb/remote.hpp"
#include "negkb/text.hpp"

namespace negkb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json stats_json(const IngestStats& s) {
  return {{"rows", s.rows},         {"accepted", s.accepted}, {"malformed", s.malformed},
          {"duplicates", s.duplicates}, {"filtered", s.filtered}};
}

void record_input(Resources& res, const char* name, const std::string& path) {
  res.inputs[name] = {{"path", path}, {"digest", file_digest(path)}};
}

std::string resolve_endpoint(const RunConfig& config) {
  if (!config.remote_endpoint.empty()) return config.remote_endpoint;
  if (const char* env = std::getenv(kEndpointEnv); env != nullptr && *env != '\0') return env;
  throw ConfigError(std::string("cache+remote mode needs remote_endpoint or $") + kEndpointEnv);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> resolve_targets(const RunConfig& config, const KbIndex& kb) {
  std::set<std::string> targets;
  for (const auto& t : config.targets) {
    auto n = normalize(t);
    if (!n.empty()) targets.insert(std::move(n));
  }
  if (!config.targets_path.empty()) {
    for (auto& t : load_concept_list_file(config.targets_path)) targets.insert(t);
  }
  if (targets.empty() && config.targets.empty() && config.targets_path.empty()) {
    auto all = kb.concepts();
    targets.insert(all.begin(), all.end());
  }
  return {targets.begin(), targets.end()};
}

void shuffle_seeded(std::vector<NegationCandidate>& cands, std::uint64_t seed, std::string_view target) {
  std::mt19937_64 rng(fnv1a64(target, seed ^ 0x51ed270b27a3f1c5ULL));
  for (std::size_t i = cands.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng() % i);
    std::swap(cands[i - 1], cands[j]);
  }
}

}  // namespace

Resources load_resources(const RunConfig& config) {
  config.validate();
  Resources res;
  if (config.kb_path.empty()) throw ConfigError("kb path is required");

  std::optional<ConceptSet> filter;
  if (!config.concept_filter_path.empty()) {
    filter = load_concept_list_file(config.concept_filter_path);
    record_input(res, "concept_filter", config.concept_filter_path);
    if (filter->empty()) throw ConfigError("concept filter " + config.concept_filter_path + " is empty");
  }
  IngestStats kb_stats;
  res.kb = load_kb_file(config.kb_path, filter, kb_stats);
  record_input(res, "kb", config.kb_path);
  res.ingestion["kb"] = stats_json(kb_stats);

  if (!config.taxonomy_path.empty()) {
    IngestStats tax_stats;
    res.taxonomy = load_taxonomy_file(config.taxonomy_path, tax_stats);
    record_input(res, "taxonomy", config.taxonomy_path);
    res.ingestion["taxonomy"] = stats_json(tax_stats);
  } else if (config.use_siblings) {
    throw ConfigError("taxonomy path is required for sibling selection");
  }

  if (config.use_siblings) {
    if (config.embeddings_path.empty()) throw ConfigError("embeddings path is required for sibling selection");
    res.embeddings = load_embeddings_file<float>(config.embeddings_path);
    record_input(res, "embeddings", config.embeddings_path);
  }

  const bool remote = config.provider_mode == ProviderMode::cache_and_remote;
  std::shared_ptr<const ModelServiceClient> client;
  if (remote) client = std::make_shared<ModelServiceClient>(resolve_endpoint(config));

  auto sim = std::make_shared<SimilarityCache>();
  if (!config.sim_cache_path.empty()) {
    if (fs::exists(config.sim_cache_path) || !remote) {
      sim->read_file(config.sim_cache_path);
      record_input(res, "sim_cache", config.sim_cache_path);
    }
  }
  if (remote) {
    auto appender = config.sim_cache_path.empty() ? nullptr
                                                  : std::make_shared<CacheAppender>(config.sim_cache_path);
    sim->set_fallback(std::make_shared<RemoteSimilarity>(client), appender);
  }
  res.similarity = sim;

  auto probes = std::make_shared<ProbeCache>();
  if (!config.probe_cache_path.empty()) {
    if (fs::exists(config.probe_cache_path) || !remote) {
      probes->read_file(config.probe_cache_path);
      record_input(res, "probe_cache", config.probe_cache_path);
    }
  }
  if (remote) {
    auto appender = config.probe_cache_path.empty()
                        ? nullptr
                        : std::make_shared<CacheAppender>(config.probe_cache_path);
    probes->set_fallback(std::make_shared<RemoteMaskPredictor>(client),
                         std::max(config.tau, config.probe_cache_depth), appender);
  }
  res.predictor = probes;
  return res;
}

TargetResult process_target(const Resources& res, const RunConfig& config, const std::string& target) {
  TargetResult r;
  r.target = target;
  if (config.use_siblings) {
    if (!res.embeddings) throw ConfigError("sibling selection needs embeddings");
    r.siblings = select_siblings(res.kb, res.taxonomy, *res.embeddings, target,
                                 {config.gamma, config.hypernym_k, config.horizon});
  } else {
    r.siblings = random_siblings(res.kb, target, config.gamma, config.seed);
  }

  auto cands = infer_candidates(res.kb, r.siblings);
  r.stages.push_back({"candidates", true, cands.size()});

  auto absorb = [&](FilterResult&& fr) {
    for (auto& d : fr.dropped) r.dropped.push_back(std::move(d));
    cands = std::move(fr.kept);
  };
  for (auto stage : config.filter_order) {
    switch (stage) {
      case FilterStage::kb_similarity:
        if (config.use_kb_filter) {
          absorb(filter_kb_similarity(std::move(cands), res.kb, *res.similarity, config.lambda,
                                      config.fail_mode));
        }
        r.stages.push_back({std::string(kKbSimilarityFilter), config.use_kb_filter, cands.size()});
        break;
      case FilterStage::lm_probe:
        if (config.use_lm_filter) {
          absorb(filter_lm_probe(std::move(cands), *res.predictor, probe_template, config.tau,
                                 config.fail_mode));
        }
        r.stages.push_back({std::string(kLmProbeFilter), config.use_lm_filter, cands.size()});
        break;
      case FilterStage::generic:
        if (config.use_generic_filter) absorb(filter_generic(std::move(cands), res.kb, config.beta));
        r.stages.push_back({std::string(kGenericFilter), config.use_generic_filter, cands.size()});
        break;
    }
  }

  if (config.use_ranking) {
    score_candidates(cands, r.siblings, res.kb, *res.similarity, config.lambda, config.fail_mode);
    cands = merge_near_duplicates(std::move(cands), *res.similarity, config.lambda, config.fail_mode);
    r.stages.push_back({"merge", true, cands.size()});
    cands = rank(std::move(cands), config.rank_mode, config.top_k);
    for (auto& c : cands) {
      if (!c.relaxed_holders.empty()) {
        c.provenance = generate_provenance(c.relaxed_holders, res.taxonomy, target);
      }
    }
  } else {
    r.stages.push_back({"merge", false, cands.size()});
    std::sort(cands.begin(), cands.end(),
              [](const NegationCandidate& a, const NegationCandidate& b) { return a.phrase < b.phrase; });
    shuffle_seeded(cands, config.seed, target);
    if (cands.size() > config.top_k) cands.resize(config.top_k);
  }
  r.stages.push_back({"emitted", true, cands.size()});
  r.emitted = std::move(cands);
  std::sort(r.dropped.begin(), r.dropped.end(),
            [](const NegationCandidate& a, const NegationCandidate& b) { return a.phrase < b.phrase; });
  return r;
}

std::vector<std::pair<std::string, std::string>> assign_slugs(std::vector<std::string> concepts) {
  std::sort(concepts.begin(), concepts.end());
  concepts.erase(std::unique(concepts.begin(), concepts.end()), concepts.end());
  std::set<std::string> used;
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& c : concepts) {
    auto base = slugify(c);
    auto slug = base;
    for (int n = 2; !used.insert(slug).second; ++n) slug = base + "-" + std::to_string(n);
    out.emplace_back(std::move(slug), std::move(c));
  }
  return out;
}

RunSummary run_pipeline(const RunConfig& config) { return run_pipeline(config, load_resources(config)); }

RunSummary run_pipeline(const RunConfig& config, const Resources& res) {
  config.validate();
  const auto targets = resolve_targets(config, res.kb);
  const auto slugs = assign_slugs(targets);

  json settings = result_affecting_settings(config);
  settings["targets"] = targets;
  RunSummary summary;
  json digests = json::object();
  for (const auto& [name, input] : res.inputs.items()) digests[name] = input["digest"];
  summary.config_hash = hex64(fnv1a64(settings.dump() + digests.dump()));

  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir / "negations");
  if (config.dump_candidates) fs::create_directories(out_dir / "candidates");
  if (config.write_verbose) fs::create_directories(out_dir / "verbose");

  const auto n = slugs.size();
  std::vector<std::optional<TargetResult>> results(n);
  std::vector<std::string> failures(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex log_mutex;

  auto work = [&] {
    for (std::size_t i; !abort && (i = next++) < n;) {
      const auto& [slug, concept_name] = slugs[i];
      try {
        auto r = process_target(res, config, concept_name);
        std::string lines;
        for (const auto& c : r.emitted) lines += negation_record(c).dump() + "\n";
        write_text(out_dir / "negations" / (slug + ".jsonl"), lines);
        if (config.dump_candidates) {
          std::string dump;
          for (const auto& c : r.emitted) dump += candidate_record(c).dump() + "\n";
          for (const auto& c : r.dropped) dump += candidate_record(c).dump() + "\n";
          write_text(out_dir / "candidates" / (slug + ".jsonl"), dump);
        }
        if (config.write_verbose) {
          std::string text;
          for (const auto& c : r.emitted) text += render_verbose(c) + "\n";
          write_text(out_dir / "verbose" / (slug + ".txt"), text);
        }
        results[i] = std::move(r);
      } catch (const std::exception& e) {
        errors[i] = std::current_exception();
        failures[i] = e.what();
        std::lock_guard lock(log_mutex);
        std::cerr << "negkb: target '" << concept_name << "' failed: " << e.what() << '\n';
        if (config.fail_mode == FailMode::fail_closed) abort = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(config.jobs, n); ++t) pool.emplace_back(work);
    work();
  }
  if (config.fail_mode == FailMode::fail_closed) {
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  json entries = json::array();
  std::map<std::string, std::size_t> totals;
  std::vector<std::string> stage_order;
  std::string index;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [slug, concept_name] = slugs[i];
    index += slug + "\t" + concept_name + "\n";
    json entry{{"concept", concept_name}, {"slug", slug}};
    if (!results[i]) {
      entry["status"] = "failed";
      entry["error"] = failures[i];
      ++summary.failed;
      entries.push_back(std::move(entry));
      continue;
    }
    const auto& r = *results[i];
    ++summary.succeeded;
    entry["status"] = "ok";
    entry["siblings"] = r.siblings.names();
    entry["underpopulated"] = r.siblings.underpopulated();
    json stages = json::array();
    for (const auto& s : r.stages) {
      stages.push_back({{"stage", s.stage}, {"enabled", s.enabled}, {"count", s.count}});
      if (!totals.contains(s.stage)) stage_order.push_back(s.stage);
      totals[s.stage] += s.count;
    }
    entry["stages"] = std::move(stages);
    entries.push_back(std::move(entry));
  }
  json total_stages = json::array();
  for (const auto& s : stage_order) total_stages.push_back({{"stage", s}, {"count", totals[s]}});

  json& m = summary.manifest;
  m["config"] = settings;
  m["config_hash"] = summary.config_hash;
  m["inputs"] = res.inputs;
  m["ingestion"] = res.ingestion;
  m["seed"] = config.seed;
  m["targets"] = std::move(entries);
  m["totals"] = {{"succeeded", summary.succeeded}, {"failed", summary.failed}, {"stages", total_stages}};
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
  write_text(out_dir / "index.tsv", index);
  return summary;
}

namespace {

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IncompatibleRunError("no run manifest in " + dir.string());
  auto m = json::parse(in, nullptr, false);
  if (m.is_discarded() || !m.contains("targets")) {
    throw IncompatibleRunError("unreadable run manifest in " + dir.string());
  }
  return m;
}

}  // namespace

NegationLists read_run_outputs(const std::string& output_dir) {
  const fs::path dir(output_dir);
  const auto manifest = read_manifest(dir);
  NegationLists out;
  for (const auto& t : manifest["targets"]) {
    if (t.value("status", "") != "ok") continue;
    const auto slug = t["slug"].get<std::string>();
    std::ifstream in(dir / "negations" / (slug + ".jsonl"));
    if (!in) throw IncompatibleRunError("run output for '" + slug + "' is missing");
    auto& list = out[t["concept"].get<std::string>()];
    std::string rec;
    while (std::getline(in, rec)) {
      if (trim(rec).empty()) continue;
      auto j = json::parse(rec, nullptr, false);
      if (j.is_discarded() || !j.contains("negation") || !j["negation"].is_string()) {
        throw Error("malformed output record in " + slug + ".jsonl");
      }
      list.push_back(j["negation"].get<std::string>());
    }
  }
  return out;
}

json run_eval(const RunConfig& config) {
  if (config.truth_path.empty() && config.mcqa_path.empty()) {
    throw ConfigError("eval needs a truth file, an MCQA file, or both");
  }
  if (config.kb_path.empty()) throw ConfigError("eval needs the KB used for the run");
  const fs::path dir(config.output_dir);
  const auto manifest = read_manifest(dir);
  const auto kb_digest = file_digest(config.kb_path);
  if (manifest["inputs"].contains("kb") && manifest["inputs"]["kb"].value("digest", "") != kb_digest) {
    throw IncompatibleRunError("run in " + config.output_dir + " was built from a different KB");
  }
  std::optional<ConceptSet> filter;
  if (!config.concept_filter_path.empty()) filter = load_concept_list_file(config.concept_filter_path);
  const auto kb = [&] {
    IngestStats stats;
    return load_kb_file(config.kb_path, filter, stats);
  }();
  const auto outputs = read_run_outputs(config.output_dir);

  // A concept outside the KB legitimately has no negations; one inside it
  // but absent from the run means the run does not match this evaluation.
  auto negations_for = [&](const std::string& concept_name) -> std::vector<std::string> {
    if (auto it = outputs.find(concept_name); it != outputs.end()) return it->second;
    if (!kb.has_concept(concept_name)) return {};
    throw IncompatibleRunError("run in " + config.output_dir + " has no output for KB concept '" +
                               concept_name + "'");
  };

  // Eval only reads caches; remote fallback stays off so reports are reproducible.
  auto sim = std::make_shared<SimilarityCache>();
  if (!config.sim_cache_path.empty()) sim->read_file(config.sim_cache_path);

  json report;
  report["run_config_hash"] = manifest.value("config_hash", "");

  if (!config.truth_path.empty()) {
    RelationMap relations = default_relation_map();
    if (!config.relation_map_path.empty()) {
      std::ifstream rin(config.relation_map_path);
      if (!rin) throw Error("cannot read relation map " + config.relation_map_path);
      for (auto& [k, v] : load_relation_map(rin)) relations[k] = v;
    }
    std::ifstream tin(config.truth_path);
    if (!tin) throw Error("cannot read truth file " + config.truth_path);
    const auto truth = load_truth(tin, relations);
    if (truth.empty()) throw Error("truth file " + config.truth_path + " has no statements");

    NegationLists lists;
    std::vector<GroundTruthNegation> in_kb;
    for (const auto& t : truth) {
      lists.emplace(t.concept_name, negations_for(t.concept_name));
      if (kb.has_concept(t.concept_name)) in_kb.push_back(t);
    }
    const double lambda = config.recall_lambda.value_or(config.lambda);
    auto block = [&](std::span<const GroundTruthNegation> subset) {
      json b{{"denominator", subset.size()}};
      if (subset.empty()) return b;
      for (auto mode : {MatchMode::strict, MatchMode::relaxed}) {
        RecallOptions full{mode, std::nullopt, config.recall_depth, lambda};
        RecallOptions at{mode, config.recall_at, config.recall_depth, lambda};
        auto rf = recall(lists, subset, full, *sim);
        auto ra = recall(lists, subset, at, *sim);
        b[mode == MatchMode::strict ? "strict" : "relaxed"] = {
            {"full", rf.value()}, {"full_recalled", rf.recalled},
            {"at_k", ra.value()}, {"at_k_recalled", ra.recalled}};
      }
      return b;
    };
    report["recall"] = {{"lambda", lambda},
                        {"depth", config.recall_depth},
                        {"k", config.recall_at},
                        {"all", block(truth)},
                        {"in_kb", block(in_kb)}};
  }

  if (!config.mcqa_path.empty()) {
    std::ifstream min(config.mcqa_path);
    if (!min) throw Error("cannot read MCQA file " + config.mcqa_path);
    const auto items = load_mcqa(min);
    std::vector<std::vector<OptionVerdict>> verdicts;
    json per_item = json::array();
    for (const auto& item : items) {
      auto negs = negations_for(item.concept_name);
      verdicts.push_back(eliminate(item, negs, *sim, config.mcqa_lambda));
      json options = json::array();
      for (const auto& v : verdicts.back()) {
        json o{{"option", v.option}, {"eliminated", v.eliminated}};
        if (v.eliminated) o["matched_negation"] = v.matched_negation;
        options.push_back(std::move(o));
      }
      per_item.push_back({{"concept", item.concept_name}, {"correct", item.correct}, {"options", options}});
    }
    auto t = tally(verdicts, items);
    report["mcqa"] = {{"items", items.size()},
                      {"lambda", config.mcqa_lambda},
                      {"helpful", t.helpful},
                      {"unhelpful", t.unhelpful},
                      {"verdicts", per_item}};
  }

  const auto path = config.report_path.empty() ? (dir / "eval_report.json").string() : config.report_path;
  write_text(path, report.dump(2) + "\n");
  return report;
}

}  // namespace negkb
