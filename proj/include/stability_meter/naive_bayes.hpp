#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "stability_meter/prefixing.hpp"

namespace stability_meter {

/// Categorical naive Bayes over encoded prefixes with Laplace smoothing.
///
/// Numeric features are discretized with per-feature cut points (deciles of a
/// reference sample); NaN lands in its own bin. For feature i with V_i distinct
/// values seen so far, the class-conditional estimate is
///
///   P(x_i = v | y) = (count(i, v, y) + alpha) / (n_y + alpha * (V_i + 1))
///
/// where the extra slot reserves mass for values not seen yet. The prior is
/// (n_y + alpha) / (n + 2 alpha). When only one class has been observed the
/// model predicts that class; exact score ties go to Outcome::negative.
class NaiveBayes {
 public:
  static constexpr std::int64_t kNanBin = -1;

  explicit NaiveBayes(FeatureLayout layout, double alpha = 1.0);

  /// Nearest-rank deciles (10th..90th percentile), deduplicated, NaN ignored.
  static std::vector<double> decile_cuts(std::vector<double> values);

  /// Sets cut points for every numeric feature from a reference sample.
  void fit_bins(std::span<const EncodedSample> reference);

  std::int64_t discretize(std::size_t feature, double value) const;

  void update(const EncodedSample& sample);
  Outcome predict(std::span<const double> features) const;

  /// Log posterior score per class, up to a shared constant.
  std::array<double, 2> log_scores(std::span<const double> features) const;

  bool trained() const { return class_counts_[0] + class_counts_[1] > 0; }
  std::uint64_t class_count(Outcome y) const { return class_counts_[to_int(y)]; }
  std::uint64_t value_count(std::size_t feature, std::int64_t value, Outcome y) const;
  std::size_t distinct_values(std::size_t feature) const { return counts_.at(feature).size(); }
  const FeatureLayout& layout() const { return layout_; }
  double alpha() const { return alpha_; }

 private:
  FeatureLayout layout_;
  double alpha_;
  std::vector<std::vector<double>> cuts_;  // per feature; empty for categorical
  std::vector<std::map<std::int64_t, std::array<std::uint64_t, 2>>> counts_;
  std::array<std::uint64_t, 2> class_counts_{0, 0};
};

}  // namespace stability_meter
