#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "negkb/candidate.hpp"
#include "negkb/embedding_store.hpp"
#include "negkb/eval.hpp"
#include "negkb/kb_store.hpp"
#include "negkb/negation_pipeline.hpp"
#include "negkb/providers.hpp"
#include "negkb/ranker.hpp"
#include "negkb/siblings.hpp"
#include "negkb/taxonomy.hpp"

namespace negkb {

enum class FilterStage { kb_similarity, lm_probe, generic };

enum class ProviderMode { cache_only, cache_and_remote };

struct RunConfig {
  // Hyperparameters.
  std::size_t gamma = 30;
  double lambda = 0.7;
  std::size_t tau = 50;
  double beta = 0.05;
  std::size_t top_k = 1000;
  RankMode rank_mode = RankMode::strict;
  std::size_t hypernym_k = 5;
  std::size_t horizon = 0;

  // Stage toggles.
  bool use_siblings = true;
  bool use_kb_filter = true;
  bool use_lm_filter = true;
  bool use_generic_filter = true;
  bool use_ranking = true;
  std::vector<FilterStage> filter_order{FilterStage::kb_similarity, FilterStage::lm_probe,
                                        FilterStage::generic};

  ProviderMode provider_mode = ProviderMode::cache_only;
  FailMode fail_mode = FailMode::fail_open;
  std::string remote_endpoint;  // falls back to $NEGKB_MODEL_ENDPOINT
  std::size_t probe_cache_depth = 100;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  // Inputs.
  std::string kb_path;
  std::string concept_filter_path;
  std::string taxonomy_path;
  std::string embeddings_path;
  std::string sim_cache_path;
  std::string probe_cache_path;
  std::string targets_path;
  std::vector<std::string> targets;

  // Outputs.
  std::string output_dir = "negkb-out";
  bool dump_candidates = false;
  bool write_verbose = false;

  // Evaluation.
  std::string truth_path;
  std::string mcqa_path;
  std::string relation_map_path;
  std::string report_path;  // defaults to <output_dir>/eval_report.json
  std::size_t recall_depth = kDefaultRecallDepth;
  std::size_t recall_at = 10;
  std::optional<double> recall_lambda;  // defaults to lambda
  double mcqa_lambda = kEliminationThreshold;

  /// Throws ConfigError on out-of-range values or a filter with no provider.
  void validate() const;
  /// Range checks only; what an evaluation of a finished run needs.
  void validate_settings() const;
};

/// Applies one `key = value` setting (keys are the field names above, plus
/// `ablation` and `target`). Throws ConfigError on unknown keys or bad values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// `key = value` lines, `#` comments, optional double quotes around values.
void apply_config_file(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::string& path);

/// Settings that change results, as canonical JSON (paths and parallelism
/// excluded; input digests are hashed separately).
nlohmann::json result_affecting_settings(const RunConfig& config);

/// Loaded inputs shared read-only by every target.
struct Resources {
  KbIndex kb;
  TaxonomyIndex taxonomy;
  std::optional<ConceptEmbeddings> embeddings;
  std::shared_ptr<const PhraseSimilarity> similarity;
  std::shared_ptr<const MaskPredictor> predictor;

  nlohmann::json inputs = nlohmann::json::object();     // path + digest per input
  nlohmann::json ingestion = nlohmann::json::object();  // per-file stats
};

/// Reads every configured input and wires the providers. Throws Error for
/// unreadable files.
Resources load_resources(const RunConfig& config);

struct StageCount {
  std::string stage;
  bool enabled = true;
  std::size_t count = 0;
};

struct TargetResult {
  std::string target;
  SiblingSet siblings;
  std::vector<NegationCandidate> emitted;
  std::vector<NegationCandidate> dropped;  // filtered, with their drop verdicts
  std::vector<StageCount> stages;
};

/// Siblings -> infer -> filters -> score/merge/rank/provenance for one target.
TargetResult process_target(const Resources& res, const RunConfig& config, const std::string& target);

struct RunSummary {
  std::string config_hash;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  nlohmann::json manifest;
};

/// Runs every target and writes, under config.output_dir:
///   negations/<slug>.jsonl   ranked output records
///   index.tsv                slug<TAB>concept
///   manifest.json            config, hash, input digests, per-stage counts
///   candidates/<slug>.jsonl  (dump_candidates) every candidate with its trace
///   verbose/<slug>.txt       (write_verbose) provenance-extended sentences
/// Per-target failures are logged and skipped in fail-open mode and rethrown
/// in fail-closed mode.
RunSummary run_pipeline(const RunConfig& config, const Resources& res);
RunSummary run_pipeline(const RunConfig& config);

/// Unique slugs for concepts, assigned in ascending concept order.
std::vector<std::pair<std::string, std::string>> assign_slugs(std::vector<std::string> concepts);

/// Reads ranked negations of a finished run, keyed by concept.
NegationLists read_run_outputs(const std::string& output_dir);

/// Recall and MCQA evaluation of a finished run; writes and returns the
/// report. Throws IncompatibleRunError when the run does not cover the
/// evaluated concepts or was built from a different KB.
nlohmann::json run_eval(const RunConfig& config);

}  // namespace negkb
