#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "stability_meter/advisor.hpp"
#include "stability_meter/classifiers.hpp"
#include "stability_meter/evaluation.hpp"
#include "stability_meter/stability.hpp"

namespace stability_meter {

struct RunConfig {
  std::filesystem::path log_path;
  std::string name;  // empty: the policy name
  UpdatePolicy policy = UpdatePolicy::incremental;
  ModelSettings model;
  std::size_t grace = 200;
  std::size_t eval_window = 100;
  std::size_t eval_every = 1;
  std::size_t ma_window = 30;
  std::size_t k_min = 2;
  std::optional<std::size_t> k_max;  // nullopt: median case length
  std::vector<Metric> metrics{std::begin(kAllMetrics), std::end(kAllMetrics)};
  std::vector<std::string> attrs;
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";

  std::string display_name() const;
  void validate() const;
};

struct SeriesReport {
  PerformanceSeries series;
  double avg_metric = 0.0;
  MetaMeasures meta;
  std::vector<AnnotatedRow> rows;
};

struct RunReport {
  std::string name;
  RunConfig config;
  BucketConfig buckets;
  bool k_max_auto = false;
  std::size_t n_cases = 0;
  std::size_t n_events = 0;
  EvaluationResult evaluation;
  std::vector<SeriesReport> series;  // only series with at least one point

  const SeriesReport* find(std::size_t bucket, Metric metric) const;
};

/// Evaluates one configuration over an already parsed log. No file output.
RunReport execute(const RunConfig& config, const EventLog& log);

/// Loads the log, evaluates, and writes performance.csv, meta.json,
/// plot/bucket_<k>_<metric>.csv and summary.txt into config.out_dir.
RunReport run(const RunConfig& config);

struct CompareReport {
  std::vector<RunReport> runs;
  nlohmann::json meta;      // merged meta.json document
  nlohmann::json rankings;  // ranking.json document for all three scenarios
};

/// Runs every configuration over the same log (in parallel, capped by
/// STABILITY_METER_THREADS), then writes per-config artifacts under
/// out_dir/<name>/ plus merged meta.json, compare.csv and ranking.json.
CompareReport compare(std::span<const RunConfig> configs, const std::filesystem::path& out_dir);

// Report building blocks, exposed for tests and the rank subcommand.
nlohmann::json meta_document(std::span<const RunReport> runs);
void write_performance_csv(std::ostream& out, const RunReport& report);
void write_plot_csv(std::ostream& out, const SeriesReport& series);
void write_summary(std::ostream& out, const RunReport& report);
void write_compare_table(std::ostream& out, std::span<const RunReport> runs);

struct RankingGroup {
  std::size_t bucket = 0;
  std::string metric;
  std::vector<std::string> order;
};

/// Groups meta.json entries by (bucket, metric) and ranks the configurations
/// of each group under the profile.
std::vector<RankingGroup> rank_meta(const nlohmann::json& meta, const ScenarioProfile& profile);
nlohmann::json ranking_document(const ScenarioProfile& profile,
                                std::span<const RankingGroup> groups);
void write_ranking_table(std::ostream& out, const ScenarioProfile& profile,
                         std::span<const RankingGroup> groups);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Worker cap from STABILITY_METER_THREADS (default: hardware concurrency).
std::size_t thread_cap();

}  // namespace stability_meter
