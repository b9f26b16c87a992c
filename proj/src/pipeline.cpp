#include "stability_meter/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "stability_meter/errors.hpp"
#include "stability_meter/event_model.hpp"
#include "stability_meter/prefixing.hpp"

namespace stability_meter {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t thread_cap() {
  std::size_t cap = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STABILITY_METER_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0') cap = std::max<std::size_t>(1, v);
  }
  return cap;
}

namespace {

// Runs fn(0..n-1) on up to thread_cap() workers. Each index is handled by
// exactly one worker; the first exception is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(n, thread_cap());
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::string num(double v) { return fmt::format("{}", v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string fixed3(const std::optional<double>& v) {
  return v ? fmt::format("{:.3f}", *v) : std::string("-");
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> json_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string metric_list(const std::vector<Metric>& metrics) {
  std::string out;
  for (const Metric m : metrics) {
    if (!out.empty()) out += ',';
    out += to_string(m);
  }
  return out;
}

void write_run_artifacts(const RunReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "plot", ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  std::ostringstream perf;
  write_performance_csv(perf, report);
  write_file_atomic(dir / "performance.csv", perf.str());

  const std::vector<RunReport> one{report};
  write_file_atomic(dir / "meta.json", meta_document(one).dump(2) + "\n");

  for (const auto& s : report.series) {
    std::ostringstream plot;
    write_plot_csv(plot, s);
    write_file_atomic(
        dir / "plot" / fmt::format("bucket_{}_{}.csv", s.series.bucket, to_string(s.series.metric)),
        plot.str());
  }

  std::ostringstream summary;
  write_summary(summary, report);
  write_file_atomic(dir / "summary.txt", summary.str());
}

}  // namespace

std::string RunConfig::display_name() const {
  return name.empty() ? std::string(to_string(policy)) : name;
}

void RunConfig::validate() const {
  model.validate();
  if (grace < 1) throw ConfigError("--grace must be >= 1");
  if (eval_window < 1) throw ConfigError("--eval-window must be >= 1");
  if (eval_every < 1) throw ConfigError("--eval-every must be >= 1");
  if (ma_window < 1) throw ConfigError("--ma-window must be >= 1");
  if (k_min < 2) throw ConfigError("--k-min must be >= 2");
  if (k_max && *k_max < k_min) throw ConfigError("--k-max must be >= --k-min");
  if (metrics.empty()) throw ConfigError("no metric selected");
}

const SeriesReport* RunReport::find(std::size_t bucket, Metric metric) const {
  for (const auto& s : series) {
    if (s.series.bucket == bucket && s.series.metric == metric) return &s;
  }
  return nullptr;
}

RunReport execute(const RunConfig& config, const EventLog& log) {
  config.validate();
  if (log.traces.empty()) throw EmptyLogError();

  RunReport report;
  report.name = config.display_name();
  report.config = config;
  report.n_cases = log.traces.size();
  for (const auto& t : log.traces) report.n_events += t.length();

  report.k_max_auto = !config.k_max.has_value();
  report.buckets = {config.k_min, config.k_max.value_or(default_k_max(log.traces))};
  if (report.buckets.k_max < report.buckets.k_min) {
    throw ConfigError(fmt::format("median case length {} is below k_min {}; set --k-max",
                                  report.buckets.k_max, report.buckets.k_min));
  }

  const auto schema = select_attributes(log.attributes, config.attrs);
  PredictionFramework framework(report.buckets, config.policy, schema, config.model);
  PrefixEncoder encoder(schema);
  EvaluationConfig eval{config.grace, config.eval_window, config.eval_every, report.buckets,
                        config.metrics};

  const auto stream = replay(log.traces);
  report.evaluation = run_stream(stream, framework, encoder, eval);

  for (const auto& s : report.evaluation.series) {
    if (!s.points.empty()) report.series.push_back({s, 0.0, {}, {}});
  }
  parallel_for(report.series.size(), [&](std::size_t i) {
    SeriesReport& sr = report.series[i];
    const auto values = sr.series.values();
    sr.avg_metric = std::accumulate(values.begin(), values.end(), 0.0) /
                    static_cast<double>(values.size());
    sr.meta = meta_measures(values, config.ma_window);
    sr.rows = annotate_series(sr.series, config.ma_window);
  });
  return report;
}

RunReport run(const RunConfig& config) {
  config.validate();
  const EventLog log = parse_log_file(config.log_path);
  RunReport report = execute(config, log);
  write_run_artifacts(report, config.out_dir);
  return report;
}

CompareReport compare(std::span<const RunConfig> configs, const fs::path& out_dir) {
  if (configs.size() < 2) throw ConfigError("compare needs at least two configurations");
  for (const auto& c : configs) {
    c.validate();
    if (c.log_path != configs.front().log_path) {
      throw ConfigError("all compared configurations must use the same log");
    }
    if (c.metrics != configs.front().metrics) {
      throw ConfigError(fmt::format("metric sets differ: '{}' vs '{}'", metric_list(c.metrics),
                                    metric_list(configs.front().metrics)));
    }
  }

  std::vector<RunConfig> named(configs.begin(), configs.end());
  std::map<std::string, int> seen;
  for (auto& c : named) {
    const std::string base = c.display_name();
    const int n = ++seen[base];
    c.name = n == 1 ? base : fmt::format("{}#{}", base, n);
    c.out_dir = out_dir / c.name;
  }

  const EventLog log = parse_log_file(named.front().log_path);
  CompareReport result;
  result.runs.resize(named.size());
  parallel_for(named.size(), [&](std::size_t i) { result.runs[i] = execute(named[i], log); });

  for (const auto& r : result.runs) write_run_artifacts(r, r.config.out_dir);

  result.meta = meta_document(result.runs);
  write_file_atomic(out_dir / "meta.json", result.meta.dump(2) + "\n");

  std::ostringstream table;
  write_compare_table(table, result.runs);
  write_file_atomic(out_dir / "compare.txt", table.str());

  std::ostringstream csv;
  csv << "configuration,bucket,metric,avg_metric,drops,volatility,max_magnitude,avg_magnitude,"
         "recovery_rate,drops_per_100_points,n_points\n";
  for (const auto& r : result.runs) {
    for (const auto& s : r.series) {
      csv << r.name << ',' << s.series.bucket << ',' << to_string(s.series.metric) << ','
          << num(s.avg_metric) << ',' << s.meta.drop_frequency << ',' << num(s.meta.volatility)
          << ',' << opt_num(s.meta.max_magnitude) << ',' << opt_num(s.meta.avg_magnitude) << ','
          << opt_num(s.meta.recovery_rate) << ',' << num(s.meta.drops_per_100_points) << ','
          << s.meta.n_points << '\n';
    }
  }
  write_file_atomic(out_dir / "compare.csv", csv.str());

  result.rankings = json::object();
  result.rankings["scenarios"] = json::array();
  for (const Scenario scenario : kAllScenarios) {
    const auto profile = ScenarioProfile::defaults(scenario);
    result.rankings["scenarios"].push_back(
        ranking_document(profile, rank_meta(result.meta, profile)));
  }
  write_file_atomic(out_dir / "ranking.json", result.rankings.dump(2) + "\n");
  return result;
}

json meta_document(std::span<const RunReport> runs) {
  json doc;
  doc["format"] = "stability-meter-meta/1";
  doc["runs"] = json::array();
  doc["entries"] = json::array();
  for (const auto& r : runs) {
    const RunConfig& c = r.config;
    doc["runs"].push_back({
        {"configuration", r.name},
        {"model", to_string(c.policy)},
        {"log", c.log_path.generic_string()},
        {"cases", r.n_cases},
        {"events", r.n_events},
        {"labels", r.evaluation.labels_seen},
        {"grace", c.grace},
        {"eval_window", c.eval_window},
        {"eval_every", c.eval_every},
        {"ma_window", c.ma_window},
        {"k_min", r.buckets.k_min},
        {"k_max", r.buckets.k_max},
        {"k_max_auto", r.k_max_auto},
        {"train_window", c.model.train_window},
        {"tree_depth", c.model.tree_depth},
        {"retrain_every", c.model.retrain_every},
        {"attrs", c.attrs},
        {"seed", c.seed},
    });
    for (const auto& s : r.series) {
      const MetaMeasures& m = s.meta;
      doc["entries"].push_back({
          {"configuration", r.name},
          {"bucket", s.series.bucket},
          {"metric", to_string(s.series.metric)},
          {"avg_metric", s.avg_metric},
          {"drops", m.drop_frequency},
          {"volatility", m.volatility},
          {"max_magnitude", opt_json(m.max_magnitude)},
          {"avg_magnitude", opt_json(m.avg_magnitude)},
          {"recovery_rate", opt_json(m.recovery_rate)},
          {"drops_per_100_points", m.drops_per_100_points},
          {"n_points", m.n_points},
      });
    }
  }
  return doc;
}

void write_performance_csv(std::ostream& out, const RunReport& report) {
  out << "label_index,bucket,metric,value,ma,std,lb,ub,is_drop,drop_id\n";
  for (const auto& s : report.series) {
    const std::string_view metric = to_string(s.series.metric);
    for (const auto& row : s.rows) {
      out << row.label_index << ',' << s.series.bucket << ',' << metric << ',' << num(row.value)
          << ',' << num(row.ma) << ',' << num(row.stddev) << ',' << num(row.lb) << ','
          << num(row.ub) << ',' << (row.is_drop ? "true" : "false") << ',';
      if (row.drop_id) out << *row.drop_id;
      out << '\n';
    }
  }
}

void write_plot_csv(std::ostream& out, const SeriesReport& series) {
  out << "label_index,value,ma,std,lb,ub,is_drop,drop_id\n";
  for (const auto& row : series.rows) {
    out << row.label_index << ',' << num(row.value) << ',' << num(row.ma) << ','
        << num(row.stddev) << ',' << num(row.lb) << ',' << num(row.ub) << ','
        << (row.is_drop ? "true" : "false") << ',';
    if (row.drop_id) out << *row.drop_id;
    out << '\n';
  }
}

void write_summary(std::ostream& out, const RunReport& report) {
  const RunConfig& c = report.config;
  out << fmt::format("configuration: {} (model {})\n", report.name, to_string(c.policy));
  out << fmt::format("log: {} ({} cases, {} events, {} labels)\n", c.log_path.generic_string(),
                     report.n_cases, report.n_events, report.evaluation.labels_seen);
  out << fmt::format("buckets: k_min = {}, K = {}{}\n", report.buckets.k_min,
                     report.buckets.k_max,
                     report.k_max_auto ? " (auto: median events per case)" : "");
  out << fmt::format("grace = {}, eval window l = {}, moving window M = {}\n", c.grace,
                     c.eval_window, c.ma_window);
  out << fmt::format("{:>6}  {:<9}  {:>8}  {:>5}  {:>10}  {:>8}  {:>8}  {:>8}  {:>6}\n", "bucket",
                     "metric", "avg", "Drops", "Volatility", "Max.Mag", "Avg.Mag", "Recovery",
                     "points");
  for (const auto& s : report.series) {
    const MetaMeasures& m = s.meta;
    out << fmt::format("{:>6}  {:<9}  {:>8.3f}  {:>5}  {:>10.3f}  {:>8}  {:>8}  {:>8}  {:>6}\n",
                       s.series.bucket, to_string(s.series.metric), s.avg_metric,
                       m.drop_frequency, m.volatility, fixed3(m.max_magnitude),
                       fixed3(m.avg_magnitude), fixed3(m.recovery_rate), m.n_points);
  }
}

void write_compare_table(std::ostream& out, std::span<const RunReport> runs) {
  out << fmt::format("{:<16}  {:>6}  {:<9}  {:>8}  {:>5}  {:>10}  {:>8}  {:>8}  {:>8}\n",
                     "configuration", "bucket", "metric", "avg", "Drops", "Volatility", "Max.Mag",
                     "Avg.Mag", "Recovery");
  for (const auto& r : runs) {
    for (const auto& s : r.series) {
      const MetaMeasures& m = s.meta;
      out << fmt::format("{:<16}  {:>6}  {:<9}  {:>8.3f}  {:>5}  {:>10.3f}  {:>8}  {:>8}  {:>8}\n",
                         r.name, s.series.bucket, to_string(s.series.metric), s.avg_metric,
                         m.drop_frequency, m.volatility, fixed3(m.max_magnitude),
                         fixed3(m.avg_magnitude), fixed3(m.recovery_rate));
    }
  }
}

std::vector<RankingGroup> rank_meta(const json& meta, const ScenarioProfile& profile) {
  if (!meta.contains("entries") || !meta["entries"].is_array()) {
    throw FormatError("meta.json has no 'entries' array");
  }
  std::map<std::pair<std::size_t, std::string>, std::vector<RankCandidate>> groups;
  try {
    for (const auto& e : meta["entries"]) {
      RankCandidate c;
      c.name = e.at("configuration").get<std::string>();
      c.avg_metric = e.at("avg_metric").get<double>();
      c.drop_frequency = e.at("drops").get<std::size_t>();
      c.volatility = e.at("volatility").get<double>();
      c.max_magnitude = json_opt(e.at("max_magnitude"));
      c.avg_magnitude = json_opt(e.at("avg_magnitude"));
      c.recovery_rate = json_opt(e.at("recovery_rate"));
      groups[{e.at("bucket").get<std::size_t>(), e.at("metric").get<std::string>()}].push_back(
          std::move(c));
    }
  } catch (const json::exception& err) {
    throw FormatError(fmt::format("malformed meta.json entry: {}", err.what()));
  }
  std::vector<RankingGroup> out;
  for (const auto& [key, candidates] : groups) {
    out.push_back({key.first, key.second, rank(candidates, profile)});
  }
  return out;
}

json ranking_document(const ScenarioProfile& profile, std::span<const RankingGroup> groups) {
  json doc;
  doc["scenario"] = to_string(profile.scenario);
  doc["criteria"] = json::array();
  for (const Criterion c : profile.criteria) doc["criteria"].push_back(to_string(c));
  doc["rankings"] = json::array();
  for (const auto& g : groups) {
    doc["rankings"].push_back({{"bucket", g.bucket}, {"metric", g.metric}, {"order", g.order}});
  }
  return doc;
}

void write_ranking_table(std::ostream& out, const ScenarioProfile& profile,
                         std::span<const RankingGroup> groups) {
  std::string criteria;
  for (const Criterion c : profile.criteria) {
    if (!criteria.empty()) criteria += ", ";
    criteria += to_string(c);
  }
  out << fmt::format("scenario {} (lexicographic: {})\n", to_string(profile.scenario), criteria);
  for (const auto& g : groups) {
    out << fmt::format("bucket {} / {}:\n", g.bucket, g.metric);
    for (std::size_t i = 0; i < g.order.size(); ++i) {
      out << fmt::format("  {}. {}\n", i + 1, g.order[i]);
    }
  }
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(fmt::format("cannot create '{}'", path.parent_path().string()));
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", tmp.string()));
    out << contents;
    out.flush();
    if (!out) throw IoError(fmt::format("write failed for '{}'", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot move '{}' into place: {}", path.string(), ec.message()));
}

}  // namespace stability_meter
