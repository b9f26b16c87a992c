#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stability_meter/classifiers.hpp"
#include "stability_meter/event_model.hpp"
#include "stability_meter/prefixing.hpp"

namespace stability_meter {

enum class Metric : std::uint8_t { accuracy, precision, recall, f1 };

inline constexpr Metric kAllMetrics[] = {Metric::accuracy, Metric::precision, Metric::recall,
                                         Metric::f1};

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);
/// "all" or a comma-separated list of metric names.
std::vector<Metric> parse_metrics(std::string_view text);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  void add(Outcome predicted, Outcome actual);
};

/// Zero denominators yield 0. Returns nullopt for an empty matrix.
std::optional<double> metric_value(const ConfusionCounts& counts, Metric metric);

/// A prediction waiting for its case's label.
struct PredictionRecord {
  std::string case_id;
  std::size_t bucket = 0;
  Outcome predicted = Outcome::negative;
  std::uint64_t model_version = 0;
  std::size_t issued_at = 0;  // stream index of the case's k-th event
};

/// A prediction after its label arrived.
struct ResolvedPrediction {
  PredictionRecord record;
  Outcome actual = Outcome::negative;
  std::size_t label_index = 0;  // 1-based ordinal of the resolving label
};

/// The most recent `capacity` resolved predictions of one bucket, oldest
/// evicted first. Confusion counts are maintained incrementally.
class EvalWindow {
 public:
  EvalWindow(std::size_t bucket, std::size_t capacity);

  void push(Outcome predicted, Outcome actual);

  std::size_t bucket() const { return bucket_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const ConfusionCounts& counts() const { return counts_; }
  const std::deque<std::pair<Outcome, Outcome>>& entries() const { return entries_; }

 private:
  std::size_t bucket_;
  std::size_t capacity_;
  std::deque<std::pair<Outcome, Outcome>> entries_;  // (predicted, actual)
  ConfusionCounts counts_;
};

std::optional<double> window_metric(const EvalWindow& window, Metric metric);

struct SeriesPoint {
  std::size_t label_index = 0;
  double value = 0.0;
};

struct PerformanceSeries {
  std::size_t bucket = 0;
  Metric metric = Metric::accuracy;
  std::vector<SeriesPoint> points;

  std::vector<double> values() const;
};

struct EvaluationConfig {
  std::size_t grace = 200;
  std::size_t eval_window = 100;
  std::size_t eval_every = 1;
  BucketConfig buckets;
  std::vector<Metric> metrics{std::begin(kAllMetrics), std::end(kAllMetrics)};

  void validate() const;
};

struct EvaluationResult {
  std::vector<PerformanceSeries> series;  // ordered by (bucket, metric order in config)
  std::vector<ResolvedPrediction> resolved;
  std::size_t labels_seen = 0;
  std::size_t predictions_issued = 0;
  std::size_t skipped_not_ready = 0;
  std::optional<std::size_t> grace_end_stream_index;

  const PerformanceSeries* find(std::size_t bucket, Metric metric) const;
};

/// Prequential evaluation of a prediction framework over a replayed stream.
///
/// The first `grace` labels only train. Afterwards every arriving k-th event
/// with k in the bucket range is predicted with the model as it is at that
/// moment (buckets whose model is still untrained are skipped). When a case's
/// label arrives its pending predictions enter the bucket windows, the models
/// learn from the case's prefixes, and each bucket with a nonempty window
/// appends one point per metric (every `eval_every`-th post-grace label).
EvaluationResult run_stream(std::span<const StreamItem> stream, PredictionFramework& framework,
                            PrefixEncoder& encoder, const EvaluationConfig& config);

}  // namespace stability_meter
