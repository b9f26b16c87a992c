#include "stability_meter/advisor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "stability_meter/errors.hpp"

namespace stability_meter {

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::hf_lr:
      return "hf-lr";
    case Scenario::lf_hr:
      return "lf-hr";
    case Scenario::hf_hr:
      return "hf-hr";
  }
  return "?";
}

Scenario parse_scenario(std::string_view text) {
  for (const Scenario s : kAllScenarios) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError(fmt::format("unknown scenario '{}' (hf-lr|lf-hr|hf-hr)", text));
}

std::string_view to_string(Criterion criterion) {
  switch (criterion) {
    case Criterion::drop_frequency:
      return "F";
    case Criterion::volatility:
      return "V";
    case Criterion::max_magnitude:
      return "M_max";
    case Criterion::avg_magnitude:
      return "M_avg";
    case Criterion::recovery_rate:
      return "R_avg";
    case Criterion::avg_metric:
      return "avg_metric";
  }
  return "?";
}

Criterion parse_criterion(std::string_view text) {
  struct Alias {
    std::string_view name;
    Criterion criterion;
  };
  static constexpr Alias aliases[] = {
      {"F", Criterion::drop_frequency},       {"drops", Criterion::drop_frequency},
      {"V", Criterion::volatility},           {"volatility", Criterion::volatility},
      {"M_max", Criterion::max_magnitude},    {"max_magnitude", Criterion::max_magnitude},
      {"M_avg", Criterion::avg_magnitude},    {"avg_magnitude", Criterion::avg_magnitude},
      {"R_avg", Criterion::recovery_rate},    {"recovery_rate", Criterion::recovery_rate},
      {"avg_metric", Criterion::avg_metric},
  };
  for (const auto& a : aliases) {
    if (a.name == text) return a.criterion;
  }
  throw ConfigError(fmt::format("unknown meta-measure '{}' in profile", text));
}

ScenarioProfile ScenarioProfile::defaults(Scenario scenario) {
  switch (scenario) {
    case Scenario::hf_lr:
      return {scenario, {Criterion::recovery_rate, Criterion::avg_magnitude}};
    case Scenario::lf_hr:
      return {scenario,
              {Criterion::drop_frequency, Criterion::volatility, Criterion::max_magnitude}};
    case Scenario::hf_hr:
      return {scenario,
              {Criterion::volatility, Criterion::drop_frequency, Criterion::recovery_rate,
               Criterion::avg_magnitude}};
  }
  throw ConfigError("unknown scenario");
}

ScenarioProfile ScenarioProfile::parse(Scenario scenario, std::string_view criteria) {
  ScenarioProfile profile{scenario, {}};
  while (!criteria.empty()) {
    const auto comma = criteria.find(',');
    std::string_view token = criteria.substr(0, comma);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    profile.criteria.push_back(parse_criterion(token));
    if (comma == std::string_view::npos) break;
    criteria.remove_prefix(comma + 1);
  }
  if (profile.criteria.empty()) throw ConfigError("profile needs at least one meta-measure");
  return profile;
}

RankCandidate RankCandidate::from(std::string name, double avg_metric, const MetaMeasures& meta) {
  return {std::move(name),   avg_metric,         meta.drop_frequency, meta.volatility,
          meta.max_magnitude, meta.avg_magnitude, meta.recovery_rate};
}

namespace {

// Lower is better for every key.
double sort_key(const RankCandidate& c, Criterion criterion) {
  constexpr double best = -std::numeric_limits<double>::infinity();
  switch (criterion) {
    case Criterion::drop_frequency:
      return static_cast<double>(c.drop_frequency);
    case Criterion::volatility:
      return c.volatility;
    case Criterion::max_magnitude:
      return c.max_magnitude.value_or(best);
    case Criterion::avg_magnitude:
      return c.avg_magnitude.value_or(best);
    case Criterion::recovery_rate:
      return c.recovery_rate.value_or(best);
    case Criterion::avg_metric:
      return -c.avg_metric;
  }
  return 0.0;
}

}  // namespace

std::vector<std::string> rank(std::span<const RankCandidate> candidates,
                              const ScenarioProfile& profile) {
  if (profile.criteria.empty()) throw ConfigError("profile needs at least one meta-measure");
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const RankCandidate& x = candidates[a];
    const RankCandidate& y = candidates[b];
    for (const Criterion c : profile.criteria) {
      const double kx = sort_key(x, c);
      const double ky = sort_key(y, c);
      if (kx != ky) return kx < ky;
    }
    if (x.avg_metric != y.avg_metric) return x.avg_metric > y.avg_metric;
    return x.name < y.name;
  });
  std::vector<std::string> names;
  names.reserve(order.size());
  for (const std::size_t i : order) names.push_back(candidates[i].name);
  return names;
}

}  // namespace stability_meter
