#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stability_meter/prefixing.hpp"

namespace stability_meter {

struct TreeSettings {
  std::size_t max_depth = 6;
  std::size_t min_leaf = 5;
};

/// Greedy binary classification tree grown on Gini impurity.
///
/// Categorical features split on equality with one code (`x == c` goes left),
/// numeric features on a midpoint threshold (`x <= t` goes left, NaN right).
/// Candidates are scanned feature by feature in layout order, codes and
/// thresholds ascending; the first candidate with the lowest weighted child
/// impurity wins. A node is split while it is impure, above max_depth, and
/// some candidate leaves at least min_leaf samples on each side. Zero-gain
/// splits are allowed so interaction-only structure (XOR) can still be found.
/// Leaves predict the majority label, ties going to Outcome::negative.
class DecisionTree {
 public:
  DecisionTree() = default;

  static DecisionTree fit(std::span<const EncodedSample> samples, const FeatureLayout& layout,
                          const TreeSettings& settings);

  Outcome predict(std::span<const double> features) const;

  bool empty() const { return nodes_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t depth() const;

  /// Stable text form; hex floats keep thresholds bit-exact.
  std::string serialize() const;

 private:
  struct Node {
    bool leaf = true;
    Outcome value = Outcome::negative;
    std::size_t feature = 0;
    FeatureKind kind = FeatureKind::categorical;
    double pivot = 0.0;  // category code or threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t n0 = 0;
    std::uint32_t n1 = 0;
  };

  std::int32_t grow(std::span<const EncodedSample> samples, std::vector<std::uint32_t>& index,
                    std::size_t begin, std::size_t end, std::size_t depth,
                    const FeatureLayout& layout, const TreeSettings& settings);

  std::vector<Node> nodes_;
};

}  // namespace stability_meter
