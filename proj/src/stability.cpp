#include "stability_meter/stability.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "stability_meter/errors.hpp"

namespace stability_meter {

MovingStatsAccumulator::MovingStatsAccumulator(std::size_t window) : window_(window) {
  if (window_ < 1) throw ConfigError(fmt::format("moving window must be >= 1, got {}", window_));
}

MovingStatsAccumulator::Point MovingStatsAccumulator::push(double value) {
  buffer_.push_back(value);
  if (buffer_.size() > window_) buffer_.pop_front();

  // Mean shifted by the oldest value: a constant window yields phi == 0 exactly.
  const double n = static_cast<double>(buffer_.size());
  const double ref = buffer_.front();
  double offset = 0.0;
  for (const double v : buffer_) offset += v - ref;
  const double mean = ref + offset / n;
  double sq = 0.0;
  for (const double v : buffer_) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / n)};
}

MovingStats moving_stats(std::span<const double> points, std::size_t window) {
  MovingStatsAccumulator acc(window);
  if (points.empty()) throw ContractError("moving statistics need a nonempty series");
  MovingStats stats;
  stats.window = window;
  stats.ma.reserve(points.size());
  stats.phi.reserve(points.size());
  for (const double p : points) {
    const auto [ma, phi] = acc.push(p);
    stats.ma.push_back(ma);
    stats.phi.push_back(phi);
  }
  return stats;
}

bool is_drop_point(double p, double ma, double phi) {
  const double slack = kDropTieTolerance * (std::abs(ma) + phi);
  return p < (ma - phi) - slack;
}

std::vector<SignificantDrop> detect_drops(std::span<const double> points,
                                          const MovingStats& stats) {
  if (stats.ma.size() != points.size() || stats.phi.size() != points.size()) {
    throw ContractError("moving statistics do not match the series length");
  }
  std::vector<SignificantDrop> drops;
  std::optional<SignificantDrop> open;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (is_drop_point(points[i], stats.ma[i], stats.phi[i])) {
      if (!open) open = SignificantDrop{i, i, {}, {}};
      open->end = i;
      open->points.push_back(points[i]);
      open->magnitudes.push_back(std::abs(points[i] - stats.ma[i]));
    } else if (open) {
      drops.push_back(std::move(*open));
      open.reset();
    }
  }
  if (open) drops.push_back(std::move(*open));
  return drops;
}

MetaMeasures meta_measures(const MovingStats& stats, std::vector<SignificantDrop> drops) {
  MetaMeasures m;
  m.n_points = stats.size();
  if (m.n_points == 0) throw ContractError("meta-measures need a nonempty series");
  double phi_sum = 0.0;
  for (const double phi : stats.phi) phi_sum += phi;
  m.volatility = phi_sum / static_cast<double>(m.n_points);

  m.drop_frequency = drops.size();
  m.drops_per_100_points =
      100.0 * static_cast<double>(m.drop_frequency) / static_cast<double>(m.n_points);
  if (!drops.empty()) {
    double max_mag = 0.0;
    double sum_mag = 0.0;
    for (const auto& d : drops) {
      m.drop_point_count += d.length();
      for (const double mag : d.magnitudes) {
        max_mag = std::max(max_mag, mag);
        sum_mag += mag;
      }
    }
    m.max_magnitude = max_mag;
    m.avg_magnitude = sum_mag / static_cast<double>(m.drop_point_count);
    m.recovery_rate =
        static_cast<double>(m.drop_point_count) / static_cast<double>(m.drop_frequency);
  }
  m.drops = std::move(drops);
  return m;
}

MetaMeasures meta_measures(std::span<const double> points, std::size_t window) {
  const MovingStats stats = moving_stats(points, window);
  return meta_measures(stats, detect_drops(points, stats));
}

std::vector<AnnotatedRow> annotate_series(const PerformanceSeries& series, std::size_t window) {
  const std::vector<double> values = series.values();
  if (values.empty()) return {};
  const MovingStats stats = moving_stats(values, window);
  const auto drops = detect_drops(values, stats);

  std::vector<AnnotatedRow> rows(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    rows[i] = {series.points[i].label_index, values[i], stats.ma[i], stats.phi[i],
               stats.lb(i), stats.ub(i), false, std::nullopt};
  }
  for (std::size_t d = 0; d < drops.size(); ++d) {
    for (std::size_t i = drops[d].start; i <= drops[d].end; ++i) {
      rows[i].is_drop = true;
      rows[i].drop_id = d + 1;
    }
  }
  return rows;
}

}  // namespace stability_meter
