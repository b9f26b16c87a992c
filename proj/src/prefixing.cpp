#include "stability_meter/prefixing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "stability_meter/errors.hpp"

namespace stability_meter {

void BucketConfig::validate() const {
  if (k_min < 2) throw ConfigError(fmt::format("k_min must be >= 2, got {}", k_min));
  if (k_max < k_min) {
    throw ConfigError(fmt::format("k_max ({}) must be >= k_min ({})", k_max, k_min));
  }
}

std::size_t default_k_max(std::span<const Trace> traces) {
  if (traces.empty()) throw ConfigError("cannot derive k_max from an empty log");
  std::vector<std::size_t> lengths;
  lengths.reserve(traces.size());
  for (const auto& t : traces) lengths.push_back(t.length());
  const auto mid = lengths.begin() + static_cast<std::ptrdiff_t>((lengths.size() - 1) / 2);
  std::nth_element(lengths.begin(), mid, lengths.end());
  return std::max<std::size_t>(*mid, 1);
}

std::vector<Prefix> prefixes_of(const Trace& trace, const BucketConfig& cfg) {
  std::vector<Prefix> out;
  const std::size_t upper = std::min(cfg.k_max, trace.length());
  for (std::size_t k = cfg.k_min; k <= upper; ++k) {
    out.push_back({trace.case_id, k, std::span<const Event>(trace.events).first(k)});
  }
  return out;
}

std::int64_t CodeTable::code(std::string_view value) {
  const auto [it, inserted] =
      by_value_.try_emplace(std::string(value), static_cast<std::int64_t>(by_value_.size()) + 1);
  return it->second;
}

std::optional<std::int64_t> CodeTable::find(std::string_view value) const {
  const auto it = by_value_.find(std::string(value));
  if (it == by_value_.end()) return std::nullopt;
  return it->second;
}

FeatureLayout feature_layout(std::size_t k, std::span<const AttributeColumn> schema) {
  FeatureLayout layout(k, FeatureKind::categorical);
  layout.reserve(k * (1 + schema.size()));
  for (std::size_t pos = 0; pos < k; ++pos) {
    for (const auto& col : schema) {
      layout.push_back(col.kind == AttributeKind::numeric ? FeatureKind::numeric
                                                          : FeatureKind::categorical);
    }
  }
  return layout;
}

PrefixEncoder::PrefixEncoder(std::vector<AttributeColumn> schema) : schema_(std::move(schema)) {}

EncodedSample PrefixEncoder::encode(std::span<const Event> prefix_events) {
  if (prefix_events.empty()) throw ContractError("cannot encode an empty prefix");
  EncodedSample sample;
  sample.bucket = prefix_events.size();
  sample.features.reserve(prefix_events.size() * (1 + schema_.size()));
  for (const Event& e : prefix_events) {
    sample.features.push_back(static_cast<double>(codes_.code(e.activity)));
  }
  for (const Event& e : prefix_events) {
    for (const auto& col : schema_) {
      const AttributeValue* v = e.attribute(col.name);
      if (col.kind == AttributeKind::numeric) {
        if (v == nullptr) {
          sample.features.push_back(std::numeric_limits<double>::quiet_NaN());
        } else if (const auto* d = std::get_if<double>(v)) {
          sample.features.push_back(*d);
        } else {
          throw ContractError(
              fmt::format("attribute '{}' is declared numeric but holds a string", col.name));
        }
      } else if (v == nullptr) {
        sample.features.push_back(static_cast<double>(CodeTable::kMissing));
      } else if (const auto* s = std::get_if<std::string>(v)) {
        sample.features.push_back(static_cast<double>(codes_.code(*s)));
      } else {
        sample.features.push_back(
            static_cast<double>(codes_.code(fmt::format("{}", std::get<double>(*v)))));
      }
    }
  }
  return sample;
}

std::vector<AttributeColumn> select_attributes(std::span<const AttributeColumn> available,
                                               std::span<const std::string> names) {
  std::vector<AttributeColumn> out;
  for (const auto& name : names) {
    const auto it = std::find_if(available.begin(), available.end(),
                                 [&](const AttributeColumn& c) { return c.name == name; });
    if (it == available.end()) {
      throw ConfigError(fmt::format("attribute '{}' is not a column of the log", name));
    }
    out.push_back(*it);
  }
  return out;
}

}  // namespace stability_meter
