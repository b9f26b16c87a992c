#include <deque>
#include <map>
#include <unordered_map>

#include "doctest.h"
#include "stability_meter/errors.hpp"
#include "stability_meter/evaluation.hpp"
#include "stability_meter/synthgen.hpp"
#include "support.hpp"

using namespace stability_meter;
using testing::make_trace;

namespace {

constexpr auto P = Outcome::positive;
constexpr auto N = Outcome::negative;

struct Harness {
  std::vector<Trace> traces;
  std::vector<StreamItem> stream;
  EvaluationConfig config;
  EvaluationResult result;

  Harness(std::vector<Trace> t, EvaluationConfig c, UpdatePolicy policy)
      : traces(std::move(t)), config(std::move(c)) {
    stream = replay(traces);
    PredictionFramework fw(config.buckets, policy, {});
    PrefixEncoder enc;
    result = run_stream(stream, fw, enc, config);
  }
};

std::vector<Trace> generated(std::size_t n, std::uint64_t seed = 42) {
  DriftLogSpec spec;
  spec.n_cases = n;
  spec.drift_at = n / 2;
  spec.seed = seed;
  return generate(spec).traces;
}

// Recomputes every series from the resolved ledger alone.
std::map<std::pair<std::size_t, Metric>, std::vector<SeriesPoint>> replay_ledger(
    const EvaluationResult& r, const EvaluationConfig& c) {
  std::map<std::size_t, std::deque<std::pair<Outcome, Outcome>>> win;
  std::map<std::pair<std::size_t, Metric>, std::vector<SeriesPoint>> out;
  std::size_t cursor = 0;
  std::size_t post_grace = 0;
  for (std::size_t L = c.grace + 1; L <= r.labels_seen; ++L) {
    while (cursor < r.resolved.size() && r.resolved[cursor].label_index == L) {
      const auto& rp = r.resolved[cursor++];
      auto& w = win[rp.record.bucket];
      w.emplace_back(rp.record.predicted, rp.actual);
      if (w.size() > c.eval_window) w.pop_front();
    }
    if (++post_grace % c.eval_every != 0) continue;
    for (std::size_t k = c.buckets.k_min; k <= c.buckets.k_max; ++k) {
      const auto& w = win[k];
      if (w.empty()) continue;
      ConfusionCounts cc;
      for (const auto& [pred, act] : w) cc.add(pred, act);
      for (const Metric m : c.metrics) out[{k, m}].push_back({L, *metric_value(cc, m)});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("metric fixtures") {
  const ConfusionCounts c{3, 1, 2, 4};
  CHECK(*metric_value(c, Metric::accuracy) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(*metric_value(c, Metric::precision) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(*metric_value(c, Metric::recall) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(*metric_value(c, Metric::f1) == doctest::Approx(0.6666666666666665).epsilon(1e-12));

  const ConfusionCounts perfect{5, 0, 0, 5};
  for (const Metric m : kAllMetrics) CHECK(*metric_value(perfect, m) == 1.0);

  const ConfusionCounts no_positive{0, 0, 0, 4};
  CHECK(*metric_value(no_positive, Metric::accuracy) == 1.0);
  CHECK(*metric_value(no_positive, Metric::precision) == 0.0);
  CHECK(*metric_value(no_positive, Metric::recall) == 0.0);
  CHECK(*metric_value(no_positive, Metric::f1) == 0.0);

  CHECK_FALSE(metric_value(ConfusionCounts{}, Metric::accuracy).has_value());
}

TEST_CASE("metric names") {
  CHECK(parse_metric("f1") == Metric::f1);
  CHECK(parse_metrics("all").size() == 4);
  CHECK(parse_metrics("accuracy,recall") == std::vector<Metric>{Metric::accuracy, Metric::recall});
  CHECK_THROWS_AS(parse_metric("auc"), ConfigError);
}

TEST_CASE("evaluation window evicts the oldest entry") {
  EvalWindow w(3, 2);
  CHECK_FALSE(window_metric(w, Metric::accuracy).has_value());
  w.push(P, P);
  w.push(P, N);
  CHECK(*window_metric(w, Metric::accuracy) == 0.5);
  w.push(N, N);
  CHECK(w.size() == 2);
  CHECK(*window_metric(w, Metric::accuracy) == 0.5);
  w.push(N, N);
  CHECK(*window_metric(w, Metric::accuracy) == 1.0);
  CHECK(w.counts().total() == 2);
}

TEST_CASE("configuration validation") {
  EvaluationConfig c;
  c.buckets = {2, 4};
  CHECK_NOTHROW(c.validate());
  c.grace = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.buckets = {2, 4};
  c.eval_window = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.buckets = {2, 4};
  c.metrics.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("grace cases are never predicted") {
  std::vector<Trace> traces{make_trace("a", {"A", "B", "C"}, P, 0),
                            make_trace("b", {"A", "C", "C"}, N, 5),
                            make_trace("c", {"A", "B", "C"}, P, 100)};
  EvaluationConfig c;
  c.grace = 2;
  c.eval_window = 5;
  c.buckets = {2, 3};
  const Harness h(traces, c, UpdatePolicy::incremental);
  CHECK(h.result.labels_seen == 3);
  REQUIRE(h.result.resolved.size() == 2);
  for (const auto& r : h.result.resolved) {
    CHECK(r.record.case_id == "c");
    CHECK(r.label_index == 3);
  }
  const auto* acc = h.result.find(2, Metric::accuracy);
  REQUIRE(acc != nullptr);
  REQUIRE(acc->points.size() == 1);
  CHECK(acc->points[0].label_index == 3);
}

TEST_CASE("window of one tracks the latest outcome") {
  EvaluationConfig c;
  c.grace = 30;
  c.eval_window = 1;
  c.buckets = {2, 4};
  const Harness h(generated(200), c, UpdatePolicy::incremental);
  for (std::size_t k = 2; k <= 4; ++k) {
    const auto* s = h.result.find(k, Metric::accuracy);
    REQUIRE(s != nullptr);
    CHECK_FALSE(s->points.empty());
    for (const auto& pt : s->points) {
      CHECK((pt.value == 0.0 || pt.value == 1.0));
      const ResolvedPrediction* latest = nullptr;
      for (const auto& r : h.result.resolved) {
        if (r.record.bucket == k && r.label_index <= pt.label_index) latest = &r;
      }
      REQUIRE(latest != nullptr);
      CHECK(pt.value == (latest->record.predicted == latest->actual ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("series can be rebuilt from the resolved ledger") {
  for (const auto policy :
       {UpdatePolicy::incremental, UpdatePolicy::window_retrain, UpdatePolicy::static_model}) {
    for (const std::size_t every : {1U, 3U}) {
      EvaluationConfig c;
      c.grace = 40;
      c.eval_window = 15;
      c.eval_every = every;
      c.buckets = {2, 6};
      const Harness h(generated(300, 11), c, policy);
      const auto rebuilt = replay_ledger(h.result, c);
      for (const auto& s : h.result.series) {
        const auto it = rebuilt.find({s.bucket, s.metric});
        const std::size_t n = it == rebuilt.end() ? 0 : it->second.size();
        REQUIRE(s.points.size() == n);
        for (std::size_t i = 0; i < n; ++i) {
          CHECK(s.points[i].label_index == it->second[i].label_index);
          CHECK(s.points[i].value == it->second[i].value);
        }
      }
    }
  }
}

TEST_CASE("every post-grace prefix prediction is resolved exactly once") {
  EvaluationConfig c;
  c.grace = 50;
  c.eval_window = 20;
  c.buckets = {2, 8};
  const Harness h(generated(300, 5), c, UpdatePolicy::incremental);
  REQUIRE(h.result.grace_end_stream_index.has_value());
  const std::size_t grace_end = *h.result.grace_end_stream_index;

  // Stream index of each case's k-th event.
  std::unordered_map<std::string, std::vector<std::size_t>> at;
  for (std::size_t i = 0; i < h.stream.size(); ++i) at[h.stream[i].event.case_id].push_back(i);

  for (std::size_t k = c.buckets.k_min; k <= c.buckets.k_max; ++k) {
    std::size_t expected = 0;
    for (const auto& [id, idx] : at) expected += idx.size() >= k && idx[k - 1] > grace_end ? 1 : 0;
    std::size_t resolved = 0;
    for (const auto& r : h.result.resolved) resolved += r.record.bucket == k ? 1 : 0;
    CHECK(resolved == expected);
  }
  CHECK(h.result.resolved.size() == h.result.predictions_issued);
  CHECK(h.result.skipped_not_ready == 0);
}

TEST_CASE("predictions use only labels received before they were issued") {
  EvaluationConfig c;
  c.grace = 25;
  c.eval_window = 10;
  c.buckets = {2, 5};
  const Harness h(generated(200, 9), c, UpdatePolicy::incremental);

  // Stream index of every case end together with the case length.
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  std::unordered_map<std::string, std::size_t> length;
  for (const auto& t : h.traces) length[t.case_id] = t.length();
  for (std::size_t i = 0; i < h.stream.size(); ++i) {
    if (h.stream[i].is_case_end) ends.emplace_back(i, length[h.stream[i].event.case_id]);
  }
  for (const auto& r : h.result.resolved) {
    std::uint64_t labels_before = 0;
    for (const auto& [idx, len] : ends) {
      if (idx < r.record.issued_at && len >= r.record.bucket) ++labels_before;
    }
    CHECK(r.record.model_version == labels_before);
  }
}

TEST_CASE("no series point is emitted for an empty window") {
  std::vector<Trace> traces{make_trace("a", {"A", "B"}, P, 0), make_trace("b", {"A", "B"}, N, 50),
                            make_trace("c", {"A", "B", "C"}, P, 100)};
  EvaluationConfig c;
  c.grace = 1;
  c.eval_window = 5;
  c.buckets = {2, 3};
  const Harness h(traces, c, UpdatePolicy::incremental);
  CHECK(h.result.find(2, Metric::accuracy)->points.size() == 2);
  // Bucket 3 had no grace sample so its model never became ready.
  CHECK(h.result.find(3, Metric::accuracy)->points.empty());
  CHECK(h.result.skipped_not_ready == 1);
}
