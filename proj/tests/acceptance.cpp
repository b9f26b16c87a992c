// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/series_gen.hpp"
#include "oracles/stability_oracle.hpp"
#include "stability_meter/advisor.hpp"
#include "stability_meter/evaluation.hpp"
#include "stability_meter/pipeline.hpp"
#include "stability_meter/stability.hpp"
#include "stability_meter/synthgen.hpp"

namespace sm = stability_meter;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass_ = false;
    if (++failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome done(std::string detail) const {
    if (pass_) return {true, std::move(detail)};
    return {false, fmt::format("{} [{} failure(s): {}]", detail, failures_, notes_)};
  }

 private:
  bool pass_ = true;
  std::size_t failures_ = 0;
  std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::size_t> drop_indices(const sm::MetaMeasures& m) {
  std::vector<std::size_t> out;
  for (const auto& d : m.drops) {
    for (std::size_t i = d.start; i <= d.end; ++i) out.push_back(i);
  }
  return out;
}

bool within(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

bool within(const std::optional<double>& a, const std::optional<double>& b, double tol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || within(*a, *b, tol);
}

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  oracle::SeriesGenerator gen(20240601);
  Check check;
  for (int t = 0; t < 1000; ++t) {
    const auto c = gen.next(500, 50);
    sm::MovingStatsAccumulator acc(c.M);
    sm::MovingStats stats;
    stats.window = c.M;
    for (const double v : c.points) {
      const auto pt = acc.push(v);
      stats.ma.push_back(pt.ma);
      stats.phi.push_back(pt.phi);
    }
    const auto m = sm::meta_measures(stats, sm::detect_drops(c.points, stats));
    const auto o = oracle::meta(c.points, c.M);
    const std::string id = fmt::format("series {} (n={}, M={})", t, c.points.size(), c.M);
    check.require(m.drop_frequency == o.F, id + ": F");
    check.require(drop_indices(m) == o.drop_indices, id + ": drop index set");
    check.require(m.drop_point_count == o.drop_points, id + ": sum |D|");
    check.require(within(m.volatility, o.V, 1e-12), id + ": V");
    check.require(within(m.max_magnitude, o.M_max, 1e-12), id + ": M_max");
    check.require(within(m.avg_magnitude, o.M_avg, 1e-12), id + ": M_avg");
    check.require(within(m.recovery_rate, o.R_avg, 1e-12), id + ": R_avg");
  }
  const double secs = seconds_since(start);
  check.require(secs < 30.0, fmt::format("runtime {:.2f} s", secs));
  return check.done(fmt::format("1000 series, {:.2f} s", secs));
}

Outcome worked_example() {
  const std::vector<double> p{0.75, 0.65, 0.5};
  sm::MovingStats s;
  s.window = 3;
  s.ma = {0.7, 0.69, 0.66};
  s.phi = {0.03, 0.03, 0.04};
  Check check;
  std::vector<double> flagged;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (sm::is_drop_point(p[i], s.ma[i], s.phi[i])) flagged.push_back(p[i]);
  }
  check.require(flagged == std::vector<double>{0.65, 0.5}, "drop points");
  const auto drops = sm::detect_drops(p, s);
  check.require(drops.size() == 1, "drop count");
  if (drops.size() == 1) check.require(drops[0].length() == 2, "drop length");
  return check.done("drop points {0.65, 0.5}, one drop of length 2");
}

Outcome derived_fixtures() {
  Check check;
  const auto a = sm::meta_measures(std::vector<double>{0.8, 0.8, 0.8, 0.2, 0.8}, 3);
  check.require(a.drop_frequency == 1, "A: F");
  check.require(within(a.volatility, 0.113137, 1e-6), fmt::format("A: V={}", a.volatility));
  check.require(within(a.max_magnitude, 0.4, 1e-6), "A: M_max");
  check.require(within(a.recovery_rate, 1.0, 1e-6), "A: R_avg");

  const auto b =
      sm::meta_measures(std::vector<double>{0.9, 0.9, 0.9, 0.9, 0.9, 0.4, 0.4, 0.9}, 5);
  check.require(b.drop_frequency == 1, "B: F");
  check.require(within(b.recovery_rate, 2.0, 1e-6), "B: R_avg");
  check.require(within(b.avg_magnitude, 0.35, 1e-6), "B: M_avg");
  return check.done(fmt::format("V={:.6f}, M_avg={:.6f}", a.volatility,
                                b.avg_magnitude.value_or(NAN)));
}

Outcome invariance() {
  oracle::SeriesGenerator gen(77);
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> shift(-0.5, 0.5);
  std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));
  Check check;
  for (int t = 0; t < 500; ++t) {
    const auto c = gen.next(500, 50);
    const auto base = sm::meta_measures(c.points, c.M);
    const auto base_idx = drop_indices(base);
    const std::string id = fmt::format("series {}", t);

    const double s = shift(rng);
    std::vector<double> shifted = c.points;
    for (double& v : shifted) v += s;
    const auto ms = sm::meta_measures(shifted, c.M);
    check.require(ms.drop_frequency == base.drop_frequency, id + ": shifted F");
    check.require(drop_indices(ms) == base_idx, id + ": shifted index set");
    check.require(within(ms.max_magnitude, base.max_magnitude, 1e-9), id + ": shifted M_max");
    check.require(within(ms.avg_magnitude, base.avg_magnitude, 1e-9), id + ": shifted M_avg");
    check.require(within(ms.volatility, base.volatility, 1e-9), id + ": shifted V");

    const double a = std::exp(log_scale(rng));
    std::vector<double> scaled = c.points;
    for (double& v : scaled) v *= a;
    const auto mx = sm::meta_measures(scaled, c.M);
    check.require(mx.drop_frequency == base.drop_frequency, id + ": scaled F");
    check.require(drop_indices(mx) == base_idx, id + ": scaled index set");
    check.require(within(mx.volatility, a * base.volatility, 1e-9), id + ": scaled V");
    if (base.max_magnitude && mx.max_magnitude) {
      check.require(within(*mx.max_magnitude, a * *base.max_magnitude, 1e-9), id + ": scaled M_max");
      check.require(within(*mx.avg_magnitude, a * *base.avg_magnitude, 1e-9), id + ": scaled M_avg");
    }
  }
  return check.done("500 series, shift and positive scale");
}

void structural_checks(Check& check, const std::vector<double>& p, std::size_t M,
                       const std::string& id) {
  const auto stats = sm::moving_stats(p, M);
  const auto m = sm::meta_measures(stats, sm::detect_drops(p, stats));
  std::size_t covered = 0;
  for (const auto& d : m.drops) covered += d.length();
  check.require(covered == m.drop_point_count, id + ": sum |D|");
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    flagged += sm::is_drop_point(p[i], stats.ma[i], stats.phi[i]) ? 1 : 0;
    check.require(stats.lb(i) <= stats.ma[i] && stats.ma[i] <= stats.ub(i), id + ": lb<=ma<=ub");
  }
  check.require(flagged == m.drop_point_count, id + ": drop point count");
  if (m.drop_frequency > 0) {
    check.require(*m.max_magnitude >= *m.avg_magnitude && *m.avg_magnitude > 0.0,
                  id + ": M_max >= M_avg > 0");
    check.require(*m.recovery_rate >= 1.0, id + ": R_avg >= 1");
  }
}

Outcome structural_identities(const std::vector<sm::RunReport>& runs) {
  Check check;
  oracle::SeriesGenerator gen(5150);
  for (int t = 0; t < 500; ++t) {
    const auto c = gen.next(500, 50);
    structural_checks(check, c.points, c.M, fmt::format("series {}", t));
  }
  for (const double level : {0.0, 0.5, 0.93, 1.0}) {
    for (const std::size_t M : {1U, 2U, 30U}) {
      const std::vector<double> flat(120, level);
      const auto m = sm::meta_measures(flat, M);
      check.require(m.drop_frequency == 0 && m.volatility == 0.0,
                    fmt::format("constant {} M={}", level, M));
    }
  }
  std::size_t series = 0;
  for (const auto& r : runs) {
    for (const auto& s : r.series) {
      structural_checks(check, s.series.values(), r.config.ma_window,
                        fmt::format("{} bucket {} {}", r.name, s.series.bucket,
                                    sm::to_string(s.series.metric)));
      ++series;
    }
  }
  return check.done(fmt::format("500 random series, constants, {} pipeline series", series));
}

Outcome metric_fixtures() {
  Check check;
  const sm::ConfusionCounts c{3, 1, 2, 4};
  check.require(within(*sm::metric_value(c, sm::Metric::accuracy), 0.7, 1e-6), "accuracy");
  check.require(within(*sm::metric_value(c, sm::Metric::precision), 0.75, 1e-6), "precision");
  check.require(within(*sm::metric_value(c, sm::Metric::recall), 0.6, 1e-6), "recall");
  check.require(within(*sm::metric_value(c, sm::Metric::f1), 0.666667, 1e-6), "f1");
  const sm::ConfusionCounts perfect{4, 0, 0, 6};
  for (const auto m : sm::kAllMetrics) {
    check.require(*sm::metric_value(perfect, m) == 1.0, "perfect " + std::string(to_string(m)));
  }
  const sm::ConfusionCounts negatives{0, 0, 0, 5};
  check.require(*sm::metric_value(negatives, sm::Metric::precision) == 0.0, "precision 0/0");
  check.require(*sm::metric_value(negatives, sm::Metric::recall) == 0.0, "recall 0/0");
  check.require(*sm::metric_value(negatives, sm::Metric::f1) == 0.0, "f1 0/0");
  const sm::ConfusionCounts missed{0, 0, 3, 2};
  check.require(*sm::metric_value(missed, sm::Metric::precision) == 0.0, "precision 0 predicted");
  check.require(*sm::metric_value(missed, sm::Metric::f1) == 0.0, "f1 with zero tp");
  return check.done("(3,1,2,4) and zero-division cases");
}

struct DriftRun {
  sm::RunReport report;
  std::size_t drift_label = 0;  // ordinal of the first label from the second regime
};

Outcome drift_experiment(std::vector<sm::RunReport>& runs_out) {
  const auto start = std::chrono::steady_clock::now();
  sm::DriftLogSpec spec;
  spec.n_cases = 2000;
  spec.drift_at = 1000;
  spec.noise = 0.05;
  spec.seed = 42;
  const sm::SyntheticLog synthetic = sm::generate(spec);
  sm::EventLog log{synthetic.traces, synthetic.attributes};

  std::size_t drift_label = 0;
  {
    std::map<std::string, int> regime;
    for (std::size_t i = 0; i < synthetic.traces.size(); ++i) {
      regime[synthetic.traces[i].case_id] = synthetic.regime[i];
    }
    std::size_t ordinal = 0;
    for (const auto& item : sm::replay(log.traces)) {
      if (!item.is_case_end) continue;
      ++ordinal;
      if (regime[item.event.case_id] == 2) {
        drift_label = ordinal;
        break;
      }
    }
  }

  constexpr std::size_t kBucket = 4;
  auto configure = [](sm::UpdatePolicy policy) {
    sm::RunConfig c;
    c.policy = policy;
    c.eval_window = 100;
    c.ma_window = 30;
    c.metrics = {sm::Metric::accuracy};
    return c;
  };
  const auto incremental = sm::execute(configure(sm::UpdatePolicy::incremental), log);
  const auto frozen = sm::execute(configure(sm::UpdatePolicy::static_model), log);
  const double secs = seconds_since(start);
  runs_out.push_back(incremental);
  runs_out.push_back(frozen);

  Check check;
  const auto* inc = incremental.find(kBucket, sm::Metric::accuracy);
  const auto* st = frozen.find(kBucket, sm::Metric::accuracy);
  if (inc == nullptr || st == nullptr) {
    check.require(false, "bucket 4 accuracy series missing");
    return check.done("");
  }

  // Static: a significant drop starting within the 200 labels after the drift.
  bool static_drop = false;
  for (const auto& d : st->meta.drops) {
    const std::size_t at = st->series.points[d.start].label_index;
    if (at >= drift_label && at <= drift_label + 200) static_drop = true;
  }
  check.require(static_drop, "no static drop within 200 labels of the drift");

  auto post_mean = [&](const sm::SeriesReport& s) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& pt : s.series.points) {
      if (pt.label_index >= drift_label) {
        sum += pt.value;
        ++n;
      }
    }
    return n == 0 ? NAN : sum / double(n);
  };
  const double inc_post = post_mean(*inc);
  const double st_post = post_mean(*st);
  check.require(st_post <= inc_post - 0.10,
                fmt::format("post-drift mean static {:.3f} vs incremental {:.3f}", st_post,
                            inc_post));

  // Incremental: moving average back within 0.05 of its last pre-drift value,
  // after its post-drift low, within 500 labels.
  double pre_level = NAN;
  std::size_t low_at = 0;
  double low = INFINITY;
  for (std::size_t i = 0; i < inc->rows.size(); ++i) {
    const auto& row = inc->rows[i];
    if (row.label_index < drift_label) pre_level = row.ma;
    if (row.label_index >= drift_label && row.label_index <= drift_label + 500 && row.ma < low) {
      low = row.ma;
      low_at = i;
    }
  }
  std::optional<std::size_t> recovered_at;
  for (std::size_t i = low_at; i < inc->rows.size(); ++i) {
    const auto& row = inc->rows[i];
    if (row.label_index > drift_label + 500) break;
    if (row.ma >= pre_level - 0.05) {
      recovered_at = row.label_index;
      break;
    }
  }
  check.require(recovered_at.has_value(),
                fmt::format("incremental ma low {:.3f} never back to {:.3f}-0.05", low, pre_level));
  check.require(secs < 60.0, fmt::format("runtime {:.2f} s", secs));

  return check.done(fmt::format(
      "drift at label {}; static drop: {}; post-drift mean static {:.3f} vs incremental {:.3f}; "
      "incremental ma {:.3f} -> low {:.3f} -> recovered {} labels after drift; {:.2f} s",
      drift_label, static_drop ? "yes" : "no", st_post, inc_post, pre_level, low,
      recovered_at ? fmt::format("{}", *recovered_at - drift_label) : std::string("never"),
      secs));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::current_path() / "acceptance_scratch";
  fs::remove_all(dir);
  fs::create_directories(dir);
  sm::DriftLogSpec spec;
  spec.n_cases = 600;
  spec.drift_at = 300;
  {
    std::ofstream out(dir / "log.csv");
    sm::write_synthetic_log(out, sm::generate(spec));
  }
  Check check;
  for (const auto policy : {sm::UpdatePolicy::incremental, sm::UpdatePolicy::window_retrain,
                            sm::UpdatePolicy::static_model}) {
    std::string perf[2];
    std::string meta[2];
    for (int rep = 0; rep < 2; ++rep) {
      sm::RunConfig c;
      c.log_path = dir / "log.csv";
      c.policy = policy;
      c.out_dir = dir / fmt::format("{}_{}", sm::to_string(policy), rep);
      sm::run(c);
      perf[rep] = slurp(c.out_dir / "performance.csv");
      meta[rep] = slurp(c.out_dir / "meta.json");
    }
    const std::string name(sm::to_string(policy));
    check.require(!perf[0].empty() && perf[0] == perf[1], name + ": performance.csv differs");
    check.require(!meta[0].empty() && meta[0] == meta[1], name + ": meta.json differs");
  }
  return check.done("three policies, two runs each");
}

Outcome advisor_table() {
  const std::vector<sm::RankCandidate> rows{
      {"C1", 0.69, 44, 0.058, 0.290, 0.088, 6.568},
      {"C2", 0.95, 26, 0.018, 0.096, 0.032, 7.692},
      {"C3", 0.94, 24, 0.024, 0.251, 0.041, 11.042},
  };
  Check check;
  const auto hf_hr = sm::rank(rows, sm::ScenarioProfile::defaults(sm::Scenario::hf_hr));
  const auto hf_lr = sm::rank(rows, sm::ScenarioProfile::defaults(sm::Scenario::hf_lr));
  check.require(hf_hr.front() == "C2", "HF_HR first is " + hf_hr.front());
  const auto pos = [](const std::vector<std::string>& v, const char* n) {
    return std::find(v.begin(), v.end(), n) - v.begin();
  };
  check.require(pos(hf_lr, "C1") < pos(hf_lr, "C3"), "HF_LR: C3 above C1");
  return check.done(fmt::format("HF_HR {}; HF_LR {}", fmt::join(hf_hr, ">"),
                                fmt::join(hf_lr, ">")));
}

}  // namespace

int main() {
  std::vector<sm::RunReport> runs;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"worked example", worked_example},
      {"derived fixtures", derived_fixtures},
      {"invariance suites", invariance},
      {"metrics fixtures", metric_fixtures},
      {"drift experiment", [&] { return drift_experiment(runs); }},
      {"structural identities", [&] { return structural_identities(runs); }},
      {"determinism", determinism},
      {"advisor ranking", advisor_table},
  };
  // Printed in criterion order; structural identities run after the drift
  // experiment so they also cover its pipeline series.
  const int number[] = {1, 2, 3, 4, 6, 7, 5, 8, 9};
  std::vector<std::pair<int, std::string>> lines;
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    all = all && o.pass;
    lines.emplace_back(number[i], fmt::format("{} AC{} {}: {}", o.pass ? "PASS" : "FAIL",
                                              number[i], criteria[i].first, o.detail));
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [n, line] : lines) std::cout << line << '\n';
  std::cout << (all ? "all acceptance criteria passed\n" : "acceptance criteria FAILED\n");
  return all ? 0 : 1;
}
