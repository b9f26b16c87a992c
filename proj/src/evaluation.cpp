#include "stability_meter/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <unordered_map>

#include "stability_meter/errors.hpp"

namespace stability_meter {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::accuracy:
      return "accuracy";
    case Metric::precision:
      return "precision";
    case Metric::recall:
      return "recall";
    case Metric::f1:
      return "f1";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  for (const Metric m : kAllMetrics) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError(fmt::format("unknown metric '{}' (accuracy|precision|recall|f1|all)", text));
}

std::vector<Metric> parse_metrics(std::string_view text) {
  if (text == "all") return {std::begin(kAllMetrics), std::end(kAllMetrics)};
  std::vector<Metric> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const Metric m = parse_metric(text.substr(0, comma));
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("no metric selected");
  return out;
}

void ConfusionCounts::add(Outcome predicted, Outcome actual) {
  if (actual == Outcome::positive) {
    ++(predicted == Outcome::positive ? tp : fn);
  } else {
    ++(predicted == Outcome::positive ? fp : tn);
  }
}

std::optional<double> metric_value(const ConfusionCounts& c, Metric metric) {
  if (c.total() == 0) return std::nullopt;
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  const double precision = ratio(c.tp, c.tp + c.fp);
  const double recall = ratio(c.tp, c.tp + c.fn);
  switch (metric) {
    case Metric::accuracy:
      return ratio(c.tp + c.tn, c.total());
    case Metric::precision:
      return precision;
    case Metric::recall:
      return recall;
    case Metric::f1:
      return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  }
  return std::nullopt;
}

EvalWindow::EvalWindow(std::size_t bucket, std::size_t capacity)
    : bucket_(bucket), capacity_(capacity) {
  if (capacity_ < 1) throw ConfigError("evaluation window must hold at least one case");
}

void EvalWindow::push(Outcome predicted, Outcome actual) {
  entries_.emplace_back(predicted, actual);
  counts_.add(predicted, actual);
  if (entries_.size() > capacity_) {
    const auto [p, a] = entries_.front();
    entries_.pop_front();
    if (a == Outcome::positive) {
      --(p == Outcome::positive ? counts_.tp : counts_.fn);
    } else {
      --(p == Outcome::positive ? counts_.fp : counts_.tn);
    }
  }
}

std::optional<double> window_metric(const EvalWindow& window, Metric metric) {
  return metric_value(window.counts(), metric);
}

std::vector<double> PerformanceSeries::values() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.value);
  return out;
}

void EvaluationConfig::validate() const {
  if (grace < 1) throw ConfigError("grace period must be >= 1 label");
  if (eval_window < 1) throw ConfigError("evaluation window must be >= 1");
  if (eval_every < 1) throw ConfigError("eval-every must be >= 1");
  if (metrics.empty()) throw ConfigError("no metric selected");
  buckets.validate();
}

const PerformanceSeries* EvaluationResult::find(std::size_t bucket, Metric metric) const {
  for (const auto& s : series) {
    if (s.bucket == bucket && s.metric == metric) return &s;
  }
  return nullptr;
}

EvaluationResult run_stream(std::span<const StreamItem> stream, PredictionFramework& framework,
                            PrefixEncoder& encoder, const EvaluationConfig& config) {
  config.validate();
  const BucketConfig& buckets = config.buckets;
  if (buckets.k_min != framework.buckets().k_min || buckets.k_max != framework.buckets().k_max) {
    throw ConfigError("evaluation buckets differ from the framework's buckets");
  }

  struct OpenCase {
    std::vector<Event> events;
    std::vector<PredictionRecord> pending;
  };
  std::unordered_map<std::string, OpenCase> open;

  std::map<std::size_t, EvalWindow> windows;
  std::map<std::size_t, std::vector<EncodedSample>> grace_sets;
  EvaluationResult result;
  for (std::size_t k = buckets.k_min; k <= buckets.k_max; ++k) {
    windows.emplace(k, EvalWindow(k, config.eval_window));
    grace_sets[k];
    for (const Metric m : config.metrics) result.series.push_back({k, m, {}});
  }

  bool grace_done = false;
  std::size_t post_grace_labels = 0;

  for (std::size_t index = 0; index < stream.size(); ++index) {
    const StreamItem& item = stream[index];
    OpenCase& state = open[item.event.case_id];
    state.events.push_back(item.event);
    const std::size_t k = state.events.size();

    if (grace_done && buckets.contains(k)) {
      const OutcomeModel& model = framework.model(k);
      if (model.ready()) {
        const EncodedSample sample = encoder.encode(state.events);
        state.pending.push_back(
            {item.event.case_id, k, model.predict(sample), model.version(), index});
        ++result.predictions_issued;
      } else {
        ++result.skipped_not_ready;
      }
    }

    if (!item.is_case_end) continue;
    if (!item.label) throw ContractError(fmt::format("case end at {} without label", index));
    const Outcome actual = *item.label;
    const std::size_t label_index = ++result.labels_seen;
    const std::size_t upper = std::min(buckets.k_max, state.events.size());

    if (!grace_done) {
      for (std::size_t b = buckets.k_min; b <= upper; ++b) {
        EncodedSample s = encoder.encode(std::span<const Event>(state.events).first(b));
        s.label = actual;
        grace_sets[b].push_back(std::move(s));
      }
      if (label_index == config.grace) {
        for (auto& [b, samples] : grace_sets) framework.model(b).initialize(samples);
        grace_sets.clear();
        grace_done = true;
        result.grace_end_stream_index = index;
      }
      open.erase(item.event.case_id);
      continue;
    }

    for (const PredictionRecord& r : state.pending) {
      windows.at(r.bucket).push(r.predicted, actual);
      result.resolved.push_back({r, actual, label_index});
    }
    for (std::size_t b = buckets.k_min; b <= upper; ++b) {
      EncodedSample s = encoder.encode(std::span<const Event>(state.events).first(b));
      s.label = actual;
      framework.model(b).observe(s);
    }
    open.erase(item.event.case_id);

    if (++post_grace_labels % config.eval_every != 0) continue;
    for (auto& series : result.series) {
      if (const auto v = window_metric(windows.at(series.bucket), series.metric)) {
        series.points.push_back({label_index, *v});
      }
    }
  }
  return result;
}

}  // namespace stability_meter
