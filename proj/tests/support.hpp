#pragma once

// Small builders shared by the unit tests.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "stability_meter/event_model.hpp"
#include "stability_meter/prefixing.hpp"

namespace testing {

inline stability_meter::Trace make_trace(const std::string& id,
                                         std::initializer_list<const char*> activities,
                                         stability_meter::Outcome label, std::int64_t t0 = 0,
                                         std::int64_t step = 10) {
  stability_meter::Trace t;
  t.case_id = id;
  t.label = label;
  std::size_t pos = 1;
  for (const char* a : activities) {
    stability_meter::Event e;
    e.case_id = id;
    e.activity = a;
    e.timestamp_ms = t0 + step * static_cast<std::int64_t>(pos - 1);
    e.position = pos++;
    t.events.push_back(std::move(e));
  }
  return t;
}

inline stability_meter::Trace trace_of_length(const std::string& id, std::size_t n) {
  stability_meter::Trace t;
  t.case_id = id;
  t.label = stability_meter::Outcome::negative;
  for (std::size_t i = 1; i <= n; ++i) {
    stability_meter::Event e;
    e.case_id = id;
    e.activity = "a" + std::to_string(i);
    e.timestamp_ms = static_cast<std::int64_t>(i);
    e.position = i;
    t.events.push_back(std::move(e));
  }
  return t;
}

inline stability_meter::EncodedSample sample(std::vector<double> features,
                                             stability_meter::Outcome y, std::size_t bucket = 2) {
  return {bucket, std::move(features), y};
}

}  // namespace testing
