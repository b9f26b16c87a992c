#pragma once

// From-scratch reference for the stability measures. Every window is recomputed
// with plain index loops and significant drops are found by enumerating all
// (u, v) pairs against the four maximality conditions. Shares no code with the
// library beyond the tie slack constant that is part of the drop predicate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

inline constexpr double kTieSlack = 1e-12;

struct Stats {
  std::vector<double> ma;
  std::vector<double> phi;
};

inline Stats window_stats(const std::vector<double>& p, std::size_t M) {
  Stats s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t lo = i + 1 > M ? i + 1 - M : 0;
    const double n = static_cast<double>(i - lo + 1);
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += p[j];
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sq += (p[j] - mean) * (p[j] - mean);
    s.ma.push_back(mean);
    s.phi.push_back(std::sqrt(sq / n));
  }
  return s;
}

inline bool drop_point(double p, double ma, double phi) {
  return p < (ma - phi) - kTieSlack * (std::fabs(ma) + phi);
}

// All (u, v), 0-based inclusive, satisfying: every point in [u, v] is a drop
// point, u - 1 is not (or u = 0), v + 1 is not (or v = n - 1).
inline std::vector<std::pair<std::size_t, std::size_t>> drops(const std::vector<double>& p,
                                                              const Stats& s) {
  const std::size_t n = p.size();
  std::vector<int> is_drop(n);
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    is_drop[i] = drop_point(p[i], s.ma[i], s.phi[i]) ? 1 : 0;
    prefix[i + 1] = prefix[i] + static_cast<std::size_t>(is_drop[i]);
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u; v < n; ++v) {
      if (prefix[v + 1] - prefix[u] != v - u + 1) break;  // condition (1)-(2) fails for larger v too
      const bool before_ok = u == 0 || !is_drop[u - 1];
      const bool after_ok = v + 1 == n || !is_drop[v + 1];
      if (before_ok && after_ok) out.emplace_back(u, v);
    }
  }
  return out;
}

struct Meta {
  std::size_t F = 0;
  std::size_t drop_points = 0;
  double V = 0.0;
  std::optional<double> M_max;
  std::optional<double> M_avg;
  std::optional<double> R_avg;
  std::vector<std::size_t> drop_indices;
};

inline Meta meta(const std::vector<double>& p, std::size_t M) {
  const Stats s = window_stats(p, M);
  const auto ds = drops(p, s);
  Meta m;
  m.F = ds.size();
  double phi_sum = 0.0;
  for (const double phi : s.phi) phi_sum += phi;
  m.V = phi_sum / static_cast<double>(p.size());
  if (!ds.empty()) {
    double mx = 0.0;
    double total = 0.0;
    std::size_t len_sum = 0;
    for (const auto& [u, v] : ds) {
      len_sum += v - u + 1;
      for (std::size_t i = u; i <= v; ++i) {
        const double mag = std::fabs(p[i] - s.ma[i]);
        mx = std::max(mx, mag);
        total += mag;
        m.drop_indices.push_back(i);
      }
    }
    m.drop_points = len_sum;
    m.M_max = mx;
    m.M_avg = total / static_cast<double>(len_sum);
    m.R_avg = static_cast<double>(len_sum) / static_cast<double>(ds.size());
  }
  return m;
}

}  // namespace oracle
