#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stability_meter/event_model.hpp"

namespace stability_meter {

/// SplitMix64; small, seedable and identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

 private:
  std::uint64_t state_;
};

struct Transition {
  std::string next;
  double weight = 0.0;
};

/// One process regime: an activity-transition table plus the outcome rule
/// "positive iff the activity at position 2 equals `positive_branch`".
struct RegimeSpec {
  std::vector<std::pair<std::string, std::vector<Transition>>> transitions;
  std::string positive_branch;

  const std::vector<Transition>& successors(const std::string& activity) const;
};

struct DriftLogSpec {
  std::size_t n_cases = 2000;
  std::size_t drift_at = 1000;  // cases 1..drift_at follow regime 1, the rest regime 2
  std::uint64_t seed = 42;
  double noise = 0.05;          // label-flip probability
  std::size_t min_length = 4;
  std::size_t max_length = 16;
  std::array<RegimeSpec, 2> regimes = default_regimes();

  /// Regime 2 reverses which branch leads to a positive outcome and routes each
  /// branch through a check activity that regime 1 never produces.
  static std::array<RegimeSpec, 2> default_regimes();

  void validate() const;
};

struct SyntheticLog {
  std::vector<Trace> traces;               // case order
  std::vector<AttributeColumn> attributes;
  std::vector<int> regime;                 // 1 or 2, per trace
};

inline constexpr std::string_view kStartActivity = "register";
inline constexpr std::string_view kEndActivity = "close";

SyntheticLog generate(const DriftLogSpec& spec);

/// Noise-free outcome of a trace under a regime's rule.
Outcome oracle_label(const Trace& trace, const RegimeSpec& regime);

/// 1 for case numbers (1-based) up to drift_at, 2 after.
int regime_of(std::size_t case_number, std::size_t drift_at);

void write_synthetic_log(std::ostream& out, const SyntheticLog& log);

}  // namespace stability_meter
