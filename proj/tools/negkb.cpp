// negkb: materialize and evaluate ranked negative statements for a
// commonsense KB.
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "negkb/error.hpp"
#include "negkb/pipeline.hpp"

namespace {

struct Setting {
  const char* key;
  const char* help;
};

// Flags mirror RunConfig; each maps onto apply_setting().
const std::vector<Setting> kRunSettings = {
    {"gamma", "number of comparable concepts (default 30)"},
    {"lambda", "similarity threshold in [0,1] (default 0.7)"},
    {"tau", "masked-probe rank cutoff (default 50)"},
    {"beta", "generic-phrase frequency threshold in [0,1] (default 0.05)"},
    {"top-k", "negations kept per concept (default 1000)"},
    {"rank-mode", "strict | relaxed (default strict)"},
    {"hypernym-k", "hypernyms per concept in the common-hypernym check (default 5)"},
    {"horizon", "max ranked neighbours scanned, 0 = all (default 0)"},
    {"use-siblings", "true | false; false draws random comparable concepts"},
    {"use-kb-filter", "true | false"},
    {"use-lm-filter", "true | false"},
    {"use-generic-filter", "true | false"},
    {"use-ranking", "true | false"},
    {"ablation", "none | no-comparable | no-quality | no-plausibility | no-ranking"},
    {"filter-order", "comma list of kb,lm,generic (default kb,lm,generic)"},
    {"provider-mode", "cache-only | cache+remote (default cache-only)"},
    {"strictness", "fail-open | fail-closed (default fail-open)"},
    {"remote-endpoint", "model service URL (default $NEGKB_MODEL_ENDPOINT)"},
    {"probe-cache-depth", "tokens requested per remote probe (default 100)"},
    {"seed", "seed for random siblings and unranked order (default 0)"},
    {"jobs", "worker threads (default 1)"},
    {"kb", "assertion file (TSV or JSONL)"},
    {"concept-filter", "allow-list of concepts, one per line"},
    {"taxonomy", "hyponym<TAB>hypernym<TAB>confidence file"},
    {"embeddings", "concept embedding text file"},
    {"sim-cache", "similarity cache (JSONL)"},
    {"probe-cache", "masked-prediction cache (JSONL)"},
    {"targets", "file of target concepts, one per line (default: every KB concept)"},
    {"out", "output directory (default negkb-out)"},
    {"dump-candidates", "true | false; write every candidate with its filter trace"},
    {"verbose", "true | false; write provenance-extended sentences"},
};

const std::vector<Setting> kEvalSettings = {
    {"truth", "ground-truth negations: concept<TAB>relation<TAB>tail or concept<TAB>phrase"},
    {"mcqa", "MCQA items (JSONL)"},
    {"relation-map", "Relation<TAB>text overrides for truth phrase assembly"},
    {"report", "report path (default <out>/eval_report.json)"},
    {"recall-depth", "negations per concept considered at full depth (default 200)"},
    {"recall-at", "cutoff for recall@k (default 10)"},
    {"recall-lambda", "relaxed-recall threshold (default: lambda)"},
    {"mcqa-lambda", "elimination threshold (default 0.7)"},
};

struct Flags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::vector<std::string> targets;
  std::vector<std::pair<std::string, CLI::Option*>> options;
};

void add_settings(CLI::App* app, Flags& flags, const std::vector<Setting>& settings) {
  for (const auto& s : settings) {
    auto* opt = app->add_option(std::string("--") + s.key, flags.values[s.key], s.help);
    flags.options.emplace_back(s.key, opt);
  }
}

void add_common(CLI::App* app, Flags& flags) {
  app->add_option("--config", flags.config_file, "key = value config file; flags override it");
  app->add_option("--target", flags.targets, "target concept (repeatable)");
  add_settings(app, flags, kRunSettings);
}

negkb::RunConfig build_config(const Flags& flags, bool for_eval) {
  negkb::RunConfig config;
  if (!flags.config_file.empty()) negkb::apply_config_file(config, flags.config_file);
  for (const auto& [key, opt] : flags.options) {
    if (opt->count() > 0) negkb::apply_setting(config, key, flags.values.at(key));
  }
  for (const auto& t : flags.targets) negkb::apply_setting(config, "target", t);
  if (for_eval) {
    config.validate_settings();
  } else {
    config.validate();
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranked, provenance-annotated negative statements from a commonsense KB"};
  app.require_subcommand(1);

  Flags run_flags;
  auto* run = app.add_subcommand("run", "generate ranked negations per target concept");
  add_common(run, run_flags);

  Flags eval_flags;
  auto* eval = app.add_subcommand("eval", "recall and MCQA-elimination evaluation of a finished run");
  add_common(eval, eval_flags);
  add_settings(eval, eval_flags, kEvalSettings);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto config = build_config(run_flags, false);
      auto summary = negkb::run_pipeline(config);
      std::cout << "config " << summary.config_hash << ": " << summary.succeeded << " targets written, "
                << summary.failed << " failed -> " << config.output_dir << '\n';
      return summary.failed == 0 ? 0 : 3;
    }
    auto config = build_config(eval_flags, true);
    auto report = negkb::run_eval(config);
    std::cout << report.dump(2) << '\n';
    return 0;
  } catch (const negkb::ConfigError& e) {
    std::cerr << "negkb: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "negkb: " << e.what() << '\n';
    return 1;
  }
}
