#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stability_meter/event_model.hpp"

namespace stability_meter {

/// Range of prefix lengths that get their own model.
struct BucketConfig {
  std::size_t k_min = 2;
  std::size_t k_max = 2;

  /// Throws ConfigError unless 2 <= k_min <= k_max.
  void validate() const;
  bool contains(std::size_t k) const { return k >= k_min && k <= k_max; }
  std::size_t bucket_count() const { return k_max - k_min + 1; }
};

/// Lower median of the case lengths. Throws ConfigError on empty input.
std::size_t default_k_max(std::span<const Trace> traces);

struct Prefix {
  std::string case_id;
  std::size_t k = 0;
  std::span<const Event> events;  // first k events of the case, in position order
};

/// One prefix per k in [k_min, min(k_max, N)]; empty when N < k_min.
std::vector<Prefix> prefixes_of(const Trace& trace, const BucketConfig& cfg);

/// First-come-first-served string codes. Code 0 is reserved for MISSING.
class CodeTable {
 public:
  static constexpr std::int64_t kMissing = 0;

  std::int64_t code(std::string_view value);
  std::optional<std::int64_t> find(std::string_view value) const;
  std::size_t size() const { return by_value_.size(); }

 private:
  std::unordered_map<std::string, std::int64_t> by_value_;
};

enum class FeatureKind : std::uint8_t { categorical, numeric };

using FeatureLayout = std::vector<FeatureKind>;

/// Layout of an encoded prefix of length k: k activity codes, then for each
/// position the schema's attributes in schema order.
FeatureLayout feature_layout(std::size_t k, std::span<const AttributeColumn> schema);

struct EncodedSample {
  std::size_t bucket = 0;
  std::vector<double> features;
  std::optional<Outcome> label;
};

/// Index-based encoder. Categorical values share one code table for the whole
/// run. A declared attribute absent from an event encodes as
/// CodeTable::kMissing when categorical and NaN when numeric.
class PrefixEncoder {
 public:
  explicit PrefixEncoder(std::vector<AttributeColumn> schema = {});

  EncodedSample encode(std::span<const Event> prefix_events);
  EncodedSample encode(const Prefix& prefix) { return encode(prefix.events); }

  const std::vector<AttributeColumn>& schema() const { return schema_; }
  const CodeTable& codes() const { return codes_; }

 private:
  std::vector<AttributeColumn> schema_;
  CodeTable codes_;
};

/// Resolves `--attrs` names against the columns found in a log.
std::vector<AttributeColumn> select_attributes(std::span<const AttributeColumn> available,
                                               std::span<const std::string> names);

}  // namespace stability_meter
