#include "stability_meter/synthgen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <ostream>

#include "stability_meter/errors.hpp"

namespace stability_meter {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::int64_t SplitMix64::between(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return std::min(hi, lo + static_cast<std::int64_t>(uniform() * span));
}

const std::vector<Transition>& RegimeSpec::successors(const std::string& activity) const {
  for (const auto& [from, to] : transitions) {
    if (from == activity) return to;
  }
  throw ConfigError(fmt::format("regime has no transitions out of '{}'", activity));
}

std::array<RegimeSpec, 2> DriftLogSpec::default_regimes() {
  const std::vector<Transition> start{{"route_a", 0.5}, {"route_b", 0.5}};
  const std::vector<Transition> after_review{{"review", 0.2}, {"assess", 0.4}, {"notify", 0.4}};
  const std::vector<Transition> after_assess{{"review", 0.3}, {"assess", 0.2}, {"notify", 0.5}};
  const std::vector<Transition> after_notify{{"review", 0.4}, {"assess", 0.4}, {"notify", 0.2}};
  const std::vector<Transition> after_route{{"review", 0.4}, {"assess", 0.35}, {"notify", 0.25}};

  RegimeSpec before;
  before.positive_branch = "route_a";
  before.transitions = {{"register", start},         {"route_a", after_route},
                        {"route_b", after_route},    {"review", after_review},
                        {"assess", after_assess},    {"notify", after_notify}};

  RegimeSpec after;
  after.positive_branch = "route_b";
  after.transitions = {{"register", start},
                       {"route_a", {{"manual_check", 1.0}}},
                       {"route_b", {{"auto_check", 1.0}}},
                       {"manual_check", {{"review", 0.5}, {"assess", 0.5}}},
                       {"auto_check", {{"review", 0.5}, {"notify", 0.5}}},
                       {"review", after_review},
                       {"assess", after_assess},
                       {"notify", after_notify}};
  return {before, after};
}

void DriftLogSpec::validate() const {
  if (n_cases < 1) throw ConfigError("need at least one case");
  if (drift_at < 1 || drift_at > n_cases) {
    throw ConfigError(fmt::format("drift-at must lie in [1, {}], got {}", n_cases, drift_at));
  }
  if (!(noise >= 0.0 && noise < 0.5)) {
    throw ConfigError(fmt::format("noise must lie in [0, 0.5), got {}", noise));
  }
  if (min_length < 4 || max_length > 16 || min_length > max_length) {
    throw ConfigError("case lengths must satisfy 4 <= min <= max <= 16");
  }
  for (const auto& regime : regimes) {
    if (regime.positive_branch.empty()) throw ConfigError("regime needs a positive branch");
    for (const auto& [from, to] : regime.transitions) {
      double total = 0.0;
      for (const auto& t : to) {
        if (!(t.weight >= 0.0)) throw ConfigError("transition weights must be >= 0");
        total += t.weight;
      }
      if (!(total > 0.0)) throw ConfigError(fmt::format("no outgoing weight from '{}'", from));
    }
  }
}

int regime_of(std::size_t case_number, std::size_t drift_at) {
  return case_number <= drift_at ? 1 : 2;
}

Outcome oracle_label(const Trace& trace, const RegimeSpec& regime) {
  if (trace.events.size() < 2) return Outcome::negative;
  return trace.events[1].activity == regime.positive_branch ? Outcome::positive
                                                            : Outcome::negative;
}

namespace {

std::uint64_t case_seed(std::uint64_t seed, std::size_t case_number) {
  SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(case_number) + 1)));
  return mix.next();
}

const std::string& pick(const std::vector<Transition>& options, SplitMix64& rng) {
  double total = 0.0;
  for (const auto& t : options) total += t.weight;
  double u = rng.uniform() * total;
  for (const auto& t : options) {
    if (u < t.weight) return t.next;
    u -= t.weight;
  }
  return options.back().next;
}

constexpr std::int64_t kArrivalGapMs = 1000;
constexpr std::int64_t kMinStepMs = 200;
constexpr std::int64_t kMaxStepMs = 3000;
constexpr const char* kChannels[] = {"web", "phone", "office"};

}  // namespace

SyntheticLog generate(const DriftLogSpec& spec) {
  spec.validate();
  SyntheticLog log;
  log.attributes = {{"amount", AttributeKind::numeric}, {"channel", AttributeKind::categorical}};
  log.traces.reserve(spec.n_cases);
  log.regime.reserve(spec.n_cases);

  const std::size_t width = std::max<std::size_t>(5, fmt::formatted_size("{}", spec.n_cases));
  for (std::size_t c = 1; c <= spec.n_cases; ++c) {
    // Each case draws from its own stream, so ranges of cases can be generated independently.
    SplitMix64 rng(case_seed(spec.seed, c));
    const int regime_no = regime_of(c, spec.drift_at);
    const RegimeSpec& regime = spec.regimes[static_cast<std::size_t>(regime_no - 1)];

    Trace trace;
    trace.case_id = fmt::format("case_{:0{}}", c, width);
    const auto length = static_cast<std::size_t>(rng.between(
        static_cast<std::int64_t>(spec.min_length), static_cast<std::int64_t>(spec.max_length)));
    const std::string channel = kChannels[rng.between(0, 2)];

    std::vector<std::string> path{std::string(kStartActivity)};
    while (path.size() + 1 < length) path.push_back(pick(regime.successors(path.back()), rng));
    path.emplace_back(kEndActivity);

    std::int64_t t = static_cast<std::int64_t>(c - 1) * kArrivalGapMs +
                     rng.between(0, kArrivalGapMs - 1);
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i > 0) t += rng.between(kMinStepMs, kMaxStepMs);
      Event e;
      e.case_id = trace.case_id;
      e.activity = path[i];
      e.timestamp_ms = t;
      e.position = i + 1;
      e.attributes = {{"amount", static_cast<double>(rng.between(10, 5000))},
                      {"channel", channel}};
      trace.events.push_back(std::move(e));
    }

    Outcome label = oracle_label(trace, regime);
    if (rng.uniform() < spec.noise) {
      label = label == Outcome::positive ? Outcome::negative : Outcome::positive;
    }
    trace.label = label;
    log.traces.push_back(std::move(trace));
    log.regime.push_back(regime_no);
  }

  // Row numbers follow the serialized order: time, then case, then position.
  struct Ref {
    std::int64_t t;
    std::size_t trace;
    std::size_t event;
  };
  std::vector<Ref> refs;
  for (std::size_t i = 0; i < log.traces.size(); ++i) {
    for (std::size_t j = 0; j < log.traces[i].events.size(); ++j) {
      refs.push_back({log.traces[i].events[j].timestamp_ms, i, j});
    }
  }
  std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) { return a.t < b.t; });
  for (std::size_t row = 0; row < refs.size(); ++row) {
    log.traces[refs[row].trace].events[refs[row].event].row = row;
  }
  return log;
}

void write_synthetic_log(std::ostream& out, const SyntheticLog& log) {
  write_log(out, log.traces, log.attributes);
}

}  // namespace stability_meter
