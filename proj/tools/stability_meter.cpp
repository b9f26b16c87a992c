// stability-meter: replay a labeled event log, evaluate online outcome
// classifiers prequentially and report performance-stability meta-measures.

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stability_meter/advisor.hpp"
#include "stability_meter/errors.hpp"
#include "stability_meter/pipeline.hpp"
#include "stability_meter/synthgen.hpp"

namespace sm = stability_meter;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFormat = 3;
constexpr int kExitIo = 4;

// Flags shared by `run` and `compare`, kept as text where parsing can fail so
// the error surfaces as a config error rather than a CLI11 usage dump.
struct RunFlags {
  sm::RunConfig config;
  std::string model = "incremental";
  std::string k_max = "auto";
  std::string metric = "all";
  std::string attrs;
};

void add_run_flags(CLI::App* app, RunFlags& f, bool with_model) {
  sm::RunConfig& c = f.config;
  app->add_option("--log", c.log_path, "event log CSV (case_id,activity,timestamp,label,...)")
      ->required();
  if (with_model) {
    app->add_option("--model", f.model, "incremental|window-retrain|static")
        ->capture_default_str();
    app->add_option("--name", c.name, "configuration name (default: the model name)");
  }
  app->add_option("--grace", c.grace, "labels used only for training")->capture_default_str();
  app->add_option("--eval-window", c.eval_window, "completed cases per evaluation window")
      ->capture_default_str();
  app->add_option("--eval-every", c.eval_every, "append a point every r-th label")
      ->capture_default_str();
  app->add_option("--ma-window", c.ma_window, "moving-average window M")->capture_default_str();
  app->add_option("--k-min", c.k_min, "minimum prefix length")->capture_default_str();
  app->add_option("--k-max", f.k_max, "maximum prefix length or 'auto' (median case length)")
      ->capture_default_str();
  app->add_option("--metric", f.metric, "accuracy|precision|recall|f1|all (comma list allowed)")
      ->capture_default_str();
  app->add_option("--attrs", f.attrs, "comma-separated attribute columns to encode");
  app->add_option("--train-window", c.model.train_window, "window-retrain training window")
      ->capture_default_str();
  app->add_option("--tree-depth", c.model.tree_depth, "decision tree max depth")
      ->capture_default_str();
  app->add_option("--retrain-every", c.model.retrain_every, "retrain after every r labels")
      ->capture_default_str();
  app->add_option("--seed", c.seed, "seed recorded with the run")->capture_default_str();
  app->add_option("--out", c.out_dir, "output directory")->capture_default_str();
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  while (!text.empty()) {
    const auto at = text.find(sep);
    std::string_view token = text.substr(0, at);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) out.emplace_back(token);
    if (at == std::string_view::npos) break;
    text.remove_prefix(at + 1);
  }
  return out;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw sm::ConfigError(fmt::format("{} expects a non-negative integer, got '{}'", key, text));
  }
  return v;
}

sm::RunConfig resolve(const RunFlags& f) {
  sm::RunConfig c = f.config;
  c.policy = sm::parse_policy(f.model);
  c.metrics = sm::parse_metrics(f.metric);
  c.attrs = split(f.attrs, ',');
  if (f.k_max == "auto") {
    c.k_max.reset();
  } else {
    c.k_max = parse_count("--k-max", f.k_max);
  }
  return c;
}

// "name=C1;model=static;tree-depth=4" applied on top of the shared flags.
sm::RunConfig apply_config_spec(sm::RunConfig base, std::string_view spec) {
  for (const auto& pair : split(spec, ';')) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) throw sm::ConfigError(fmt::format("expected key=value: '{}'", pair));
    const std::string key = pair.substr(0, eq);
    const std::string value = pair.substr(eq + 1);
    if (key == "name") {
      base.name = value;
    } else if (key == "model") {
      base.policy = sm::parse_policy(value);
    } else if (key == "train-window") {
      base.model.train_window = parse_count(key, value);
    } else if (key == "tree-depth") {
      base.model.tree_depth = parse_count(key, value);
    } else if (key == "retrain-every") {
      base.model.retrain_every = parse_count(key, value);
    } else if (key == "min-leaf") {
      base.model.min_leaf = parse_count(key, value);
    } else if (key == "eval-window") {
      base.eval_window = parse_count(key, value);
    } else if (key == "metric") {
      base.metrics = sm::parse_metrics(value);
    } else {
      throw sm::ConfigError(fmt::format("unknown configuration key '{}'", key));
    }
  }
  return base;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stability-meter: performance-stability meta-measures for online outcome prediction"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "evaluate one configuration over a log");
  add_run_flags(run_cmd, run_flags, true);

  RunFlags cmp_flags;
  std::vector<std::string> cmp_models;
  std::vector<std::string> cmp_specs;
  auto* cmp_cmd = app.add_subcommand("compare", "evaluate several configurations side by side");
  add_run_flags(cmp_cmd, cmp_flags, false);
  cmp_cmd->add_option("--model", cmp_models, "model per configuration (repeatable)");
  cmp_cmd->add_option("--config", cmp_specs,
                      "configuration spec 'name=..;model=..;train-window=..;tree-depth=..;"
                      "retrain-every=..;min-leaf=..;eval-window=..;metric=..' (repeatable)");

  std::string rank_meta_path;
  std::string rank_scenario = "hf-hr";
  std::string rank_profile;
  std::string rank_out;
  auto* rank_cmd = app.add_subcommand("rank", "rank configurations for a business scenario");
  rank_cmd->add_option("--meta", rank_meta_path, "meta.json from run or compare")->required();
  rank_cmd->add_option("--scenario", rank_scenario, "hf-lr|lf-hr|hf-hr")->capture_default_str();
  rank_cmd->add_option("--profile", rank_profile, "override criteria, e.g. \"R_avg,M_avg\"");
  rank_cmd->add_option("--out", rank_out, "directory for ranking.json (default: beside --meta)");

  sm::DriftLogSpec synth_spec;
  std::string synth_out = "log.csv";
  auto* synth_cmd = app.add_subcommand("synth", "generate a labeled log with one abrupt drift");
  synth_cmd->add_option("--cases", synth_spec.n_cases, "number of cases")->capture_default_str();
  synth_cmd->add_option("--drift-at", synth_spec.drift_at, "last case of the first regime")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth_spec.noise, "label-flip probability")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_spec.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "output CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) {
      const sm::RunConfig config = resolve(run_flags);
      const sm::RunReport report = sm::run(config);
      sm::write_summary(std::cout, report);
      std::cout << fmt::format("artifacts written to {}\n", config.out_dir.generic_string());
    } else if (cmp_cmd->parsed()) {
      cmp_flags.model = "incremental";
      const sm::RunConfig base = resolve(cmp_flags);
      std::vector<sm::RunConfig> configs;
      for (const auto& m : cmp_models) {
        sm::RunConfig c = base;
        c.policy = sm::parse_policy(m);
        configs.push_back(std::move(c));
      }
      for (const auto& spec : cmp_specs) configs.push_back(apply_config_spec(base, spec));
      const sm::CompareReport report = sm::compare(configs, base.out_dir);
      sm::write_compare_table(std::cout, report.runs);
      for (const auto s : sm::kAllScenarios) {
        const auto profile = sm::ScenarioProfile::defaults(s);
        std::cout << '\n';
        sm::write_ranking_table(std::cout, profile, sm::rank_meta(report.meta, profile));
      }
      std::cout << fmt::format("\nartifacts written to {}\n", base.out_dir.generic_string());
    } else if (rank_cmd->parsed()) {
      std::ifstream in(rank_meta_path);
      if (!in) throw sm::IoError(fmt::format("cannot open '{}'", rank_meta_path));
      nlohmann::json meta;
      try {
        meta = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw sm::FormatError(fmt::format("{} is not valid JSON: {}", rank_meta_path, e.what()));
      }
      const sm::Scenario scenario = sm::parse_scenario(rank_scenario);
      const sm::ScenarioProfile profile = rank_profile.empty()
                                              ? sm::ScenarioProfile::defaults(scenario)
                                              : sm::ScenarioProfile::parse(scenario, rank_profile);
      const auto groups = sm::rank_meta(meta, profile);
      sm::write_ranking_table(std::cout, profile, groups);
      const std::filesystem::path dir =
          rank_out.empty() ? std::filesystem::path(rank_meta_path).parent_path()
                           : std::filesystem::path(rank_out);
      sm::write_file_atomic(dir / "ranking.json",
                            sm::ranking_document(profile, groups).dump(2) + "\n");
    } else if (synth_cmd->parsed()) {
      const sm::SyntheticLog log = sm::generate(synth_spec);
      std::ostringstream csv;
      sm::write_synthetic_log(csv, log);
      sm::write_file_atomic(synth_out, csv.str());
      std::cout << fmt::format("wrote {} cases to {}\n", log.traces.size(), synth_out);
    }
  } catch (const sm::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sm::IoError& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return kExitIo;
  } catch (const sm::FormatError& e) {
    std::cerr << "error: format: " << e.what() << '\n';
    return kExitFormat;
  } catch (const sm::ValueError& e) {
    std::cerr << "error: format: " << e.what() << '\n';
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
