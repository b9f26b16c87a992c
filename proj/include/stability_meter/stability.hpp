#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "stability_meter/evaluation.hpp"

namespace stability_meter {

/// Moving average and moving (population) standard deviation of a series.
///
/// Point i (0-based) uses the last min(i + 1, window) points including itself,
/// so the first `window - 1` points are cumulative warm-up statistics.
struct MovingStats {
  std::size_t window = 1;
  std::vector<double> ma;
  std::vector<double> phi;

  std::size_t size() const { return ma.size(); }
  double lb(std::size_t i) const { return ma[i] - phi[i]; }
  double ub(std::size_t i) const { return ma[i] + phi[i]; }
};

/// Streaming form of moving_stats: one push per new performance value.
class MovingStatsAccumulator {
 public:
  struct Point {
    double ma = 0.0;
    double phi = 0.0;
  };

  explicit MovingStatsAccumulator(std::size_t window);

  Point push(double value);
  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  std::deque<double> buffer_;
};

/// Throws ConfigError when window < 1 and ContractError on an empty series.
MovingStats moving_stats(std::span<const double> points, std::size_t window);

/// Relative slack applied to the strict `p < lb` test. Mathematically tied
/// points (e.g. the lower of two values in a two-point window, where lb equals
/// that value exactly) must not flip into drops through rounding error.
inline constexpr double kDropTieTolerance = 1e-12;

/// p < ma - phi, evaluated with kDropTieTolerance slack.
bool is_drop_point(double p, double ma, double phi);

/// A maximal run of consecutive drop points. Indices are 0-based and inclusive.
struct SignificantDrop {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<double> points;
  std::vector<double> magnitudes;  // |p_i - ma_i|

  std::size_t length() const { return end - start + 1; }
};

std::vector<SignificantDrop> detect_drops(std::span<const double> points,
                                          const MovingStats& stats);

struct MetaMeasures {
  std::size_t n_points = 0;
  std::size_t drop_frequency = 0;      // number of significant drops
  std::size_t drop_point_count = 0;    // sum of drop lengths
  double volatility = 0.0;             // mean phi over all points
  std::optional<double> max_magnitude;  // absent when there is no drop
  std::optional<double> avg_magnitude;
  std::optional<double> recovery_rate;  // mean drop length
  double drops_per_100_points = 0.0;
  std::vector<SignificantDrop> drops;
};

MetaMeasures meta_measures(std::span<const double> points, std::size_t window);
MetaMeasures meta_measures(const MovingStats& stats, std::vector<SignificantDrop> drops);

struct AnnotatedRow {
  std::size_t label_index = 0;
  double value = 0.0;
  double ma = 0.0;
  double stddev = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  bool is_drop = false;
  std::optional<std::size_t> drop_id;  // 1-based index into the drop inventory
};

std::vector<AnnotatedRow> annotate_series(const PerformanceSeries& series, std::size_t window);

}  // namespace stability_meter
