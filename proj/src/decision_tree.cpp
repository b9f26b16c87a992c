#include "stability_meter/decision_tree.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stability_meter/errors.hpp"

namespace stability_meter {

namespace {

// n * gini(n0, n1); sums of this over children compare like weighted impurity.
double scaled_gini(double n0, double n1) {
  const double n = n0 + n1;
  if (n == 0.0) return 0.0;
  return n - (n0 * n0 + n1 * n1) / n;
}

struct Candidate {
  bool found = false;
  double score = std::numeric_limits<double>::infinity();
  std::size_t feature = 0;
  FeatureKind kind = FeatureKind::categorical;
  double pivot = 0.0;
};

bool goes_left(FeatureKind kind, double pivot, double x) {
  return kind == FeatureKind::categorical ? x == pivot : x <= pivot;
}

}  // namespace

DecisionTree DecisionTree::fit(std::span<const EncodedSample> samples, const FeatureLayout& layout,
                               const TreeSettings& settings) {
  if (samples.empty()) throw NotReadyError("cannot fit a tree on an empty sample set");
  if (settings.min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  for (const auto& s : samples) {
    if (!s.label) throw ContractError("tree training needs labeled samples");
    if (s.features.size() != layout.size()) {
      throw ContractError(
          fmt::format("expected {} features, got {}", layout.size(), s.features.size()));
    }
  }
  DecisionTree tree;
  std::vector<std::uint32_t> index(samples.size());
  std::iota(index.begin(), index.end(), 0U);
  tree.grow(samples, index, 0, index.size(), 0, layout, settings);
  return tree;
}

std::int32_t DecisionTree::grow(std::span<const EncodedSample> samples,
                                std::vector<std::uint32_t>& index, std::size_t begin,
                                std::size_t end, std::size_t depth, const FeatureLayout& layout,
                                const TreeSettings& settings) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();

  std::uint32_t n0 = 0;
  std::uint32_t n1 = 0;
  for (std::size_t i = begin; i < end; ++i) {
    (*samples[index[i]].label == Outcome::positive ? n1 : n0)++;
  }
  {
    Node& node = nodes_[id];
    node.n0 = n0;
    node.n1 = n1;
    node.value = n1 > n0 ? Outcome::positive : Outcome::negative;
  }

  const std::size_t n = end - begin;
  if (n0 == 0 || n1 == 0 || depth >= settings.max_depth || n < 2 * settings.min_leaf) return id;

  Candidate best;
  std::vector<std::pair<double, int>> column;
  column.reserve(n);
  for (std::size_t f = 0; f < layout.size(); ++f) {
    column.clear();
    double nan0 = 0.0;
    double nan1 = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const EncodedSample& s = samples[index[i]];
      const int y = to_int(*s.label);
      const double x = s.features[f];
      if (std::isnan(x)) {
        (y == 1 ? nan1 : nan0) += 1.0;
      } else {
        column.emplace_back(x, y);
      }
    }
    std::sort(column.begin(), column.end());

    const auto consider = [&](double l0, double l1, double pivot) {
      const double r0 = static_cast<double>(n0) - l0;
      const double r1 = static_cast<double>(n1) - l1;
      const auto min_leaf = static_cast<double>(settings.min_leaf);
      if (l0 + l1 < min_leaf || r0 + r1 < min_leaf) return;
      const double score = scaled_gini(l0, l1) + scaled_gini(r0, r1);
      if (score < best.score) best = {true, score, f, layout[f], pivot};
    };

    if (layout[f] == FeatureKind::categorical) {
      for (std::size_t i = 0; i < column.size();) {
        std::size_t j = i;
        double c0 = 0.0;
        double c1 = 0.0;
        for (; j < column.size() && column[j].first == column[i].first; ++j) {
          (column[j].second == 1 ? c1 : c0) += 1.0;
        }
        consider(c0, c1, column[i].first);
        i = j;
      }
    } else {
      double l0 = 0.0;
      double l1 = 0.0;
      for (std::size_t i = 0; i < column.size();) {
        std::size_t j = i;
        for (; j < column.size() && column[j].first == column[i].first; ++j) {
          (column[j].second == 1 ? l1 : l0) += 1.0;
        }
        if (j < column.size()) consider(l0, l1, std::midpoint(column[i].first, column[j].first));
        i = j;
      }
    }
  }

  if (!best.found) return id;

  const auto mid_it = std::stable_partition(
      index.begin() + static_cast<std::ptrdiff_t>(begin),
      index.begin() + static_cast<std::ptrdiff_t>(end), [&](std::uint32_t s) {
        return goes_left(best.kind, best.pivot, samples[s].features[best.feature]);
      });
  const auto mid = static_cast<std::size_t>(mid_it - index.begin());

  const std::int32_t left = grow(samples, index, begin, mid, depth + 1, layout, settings);
  const std::int32_t right = grow(samples, index, mid, end, depth + 1, layout, settings);
  Node& node = nodes_[id];
  node.leaf = false;
  node.feature = best.feature;
  node.kind = best.kind;
  node.pivot = best.pivot;
  node.left = left;
  node.right = right;
  return id;
}

Outcome DecisionTree::predict(std::span<const double> features) const {
  if (nodes_.empty()) throw NotReadyError("decision tree has not been trained");
  std::int32_t at = 0;
  while (!nodes_[at].leaf) {
    const Node& node = nodes_[at];
    if (node.feature >= features.size()) {
      throw ContractError(fmt::format("feature {} out of range", node.feature));
    }
    at = goes_left(node.kind, node.pivot, features[node.feature]) ? node.left : node.right;
  }
  return nodes_[at].value;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [at, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[at].leaf) {
      stack.emplace_back(nodes_[at].left, d + 1);
      stack.emplace_back(nodes_[at].right, d + 1);
    }
  }
  return deepest;
}

std::string DecisionTree::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.leaf) {
      out += fmt::format("{} leaf {} {} {}\n", i, to_int(n.value), n.n0, n.n1);
    } else {
      out += fmt::format("{} split f{} {} {:a} {} {}\n", i, n.feature,
                         n.kind == FeatureKind::categorical ? "eq" : "le", n.pivot, n.left,
                         n.right);
    }
  }
  return out;
}

}  // namespace stability_meter
