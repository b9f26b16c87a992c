#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stability_meter/stability.hpp"

namespace stability_meter {

/// Cells of the frequency x risk matrix that call for a model choice.
enum class Scenario : std::uint8_t { hf_lr, lf_hr, hf_hr };

inline constexpr Scenario kAllScenarios[] = {Scenario::hf_lr, Scenario::lf_hr, Scenario::hf_hr};

std::string_view to_string(Scenario scenario);
/// hf-lr | lf-hr | hf-hr
Scenario parse_scenario(std::string_view text);

enum class Criterion : std::uint8_t {
  drop_frequency,  // F
  volatility,      // V
  max_magnitude,   // M_max
  avg_magnitude,   // M_avg
  recovery_rate,   // R_avg
  avg_metric,      // higher is better; every other criterion is lower-is-better
};

std::string_view to_string(Criterion criterion);
/// Short names (F, V, M_max, M_avg, R_avg, avg_metric) or the meta.json field names.
Criterion parse_criterion(std::string_view text);

struct ScenarioProfile {
  Scenario scenario = Scenario::hf_hr;
  std::vector<Criterion> criteria;

  /// HF_LR: R_avg, M_avg. LF_HR: F, V, M_max. HF_HR: V, F, R_avg, M_avg.
  static ScenarioProfile defaults(Scenario scenario);
  /// Comma-separated criteria, e.g. "R_avg,M_avg".
  static ScenarioProfile parse(Scenario scenario, std::string_view criteria);
};

/// What the advisor needs to know about one configuration.
struct RankCandidate {
  std::string name;
  double avg_metric = 0.0;
  std::size_t drop_frequency = 0;
  double volatility = 0.0;
  std::optional<double> max_magnitude;
  std::optional<double> avg_magnitude;
  std::optional<double> recovery_rate;

  static RankCandidate from(std::string name, double avg_metric, const MetaMeasures& meta);
};

/// Lexicographic order over the profile's criteria. Absent drop fields count
/// as the best possible value. Ties fall back to higher avg_metric, then name.
std::vector<std::string> rank(std::span<const RankCandidate> candidates,
                              const ScenarioProfile& profile);

}  // namespace stability_meter
