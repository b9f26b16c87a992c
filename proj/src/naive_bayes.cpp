#include "stability_meter/naive_bayes.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "stability_meter/errors.hpp"

namespace stability_meter {

NaiveBayes::NaiveBayes(FeatureLayout layout, double alpha)
    : layout_(std::move(layout)), alpha_(alpha), cuts_(layout_.size()), counts_(layout_.size()) {
  if (!(alpha_ > 0.0)) throw ConfigError("Laplace alpha must be > 0");
}

std::vector<double> NaiveBayes::decile_cuts(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  std::vector<double> cuts;
  const std::size_t n = values.size();
  for (std::size_t q = 1; q <= 9; ++q) {
    const std::size_t idx = std::min(n - 1, q * n / 10);
    cuts.push_back(values[idx]);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

void NaiveBayes::fit_bins(std::span<const EncodedSample> reference) {
  for (std::size_t f = 0; f < layout_.size(); ++f) {
    if (layout_[f] != FeatureKind::numeric) continue;
    std::vector<double> column;
    column.reserve(reference.size());
    for (const auto& s : reference) column.push_back(s.features.at(f));
    cuts_[f] = decile_cuts(std::move(column));
  }
}

std::int64_t NaiveBayes::discretize(std::size_t feature, double value) const {
  if (layout_[feature] == FeatureKind::categorical) return static_cast<std::int64_t>(value);
  if (std::isnan(value)) return kNanBin;
  const auto& cuts = cuts_[feature];
  return std::upper_bound(cuts.begin(), cuts.end(), value) - cuts.begin();
}

void NaiveBayes::update(const EncodedSample& sample) {
  if (!sample.label) throw ContractError("naive Bayes update needs a labeled sample");
  if (sample.features.size() != layout_.size()) {
    throw ContractError(fmt::format("expected {} features, got {}", layout_.size(),
                                    sample.features.size()));
  }
  const int y = to_int(*sample.label);
  for (std::size_t f = 0; f < layout_.size(); ++f) {
    ++counts_[f][discretize(f, sample.features[f])][y];
  }
  ++class_counts_[y];
}

std::uint64_t NaiveBayes::value_count(std::size_t feature, std::int64_t value, Outcome y) const {
  const auto& table = counts_.at(feature);
  const auto it = table.find(value);
  return it == table.end() ? 0 : it->second[to_int(y)];
}

std::array<double, 2> NaiveBayes::log_scores(std::span<const double> features) const {
  const double n = static_cast<double>(class_counts_[0] + class_counts_[1]);
  std::array<double, 2> score{};
  for (int y = 0; y < 2; ++y) {
    const double ny = static_cast<double>(class_counts_[y]);
    score[y] = std::log((ny + alpha_) / (n + 2.0 * alpha_));
    for (std::size_t f = 0; f < layout_.size(); ++f) {
      const auto& table = counts_[f];
      const auto it = table.find(discretize(f, features[f]));
      const double c = it == table.end() ? 0.0 : static_cast<double>(it->second[y]);
      const double v = static_cast<double>(table.size()) + 1.0;
      score[y] += std::log((c + alpha_) / (ny + alpha_ * v));
    }
  }
  return score;
}

Outcome NaiveBayes::predict(std::span<const double> features) const {
  if (!trained()) throw NotReadyError("naive Bayes model has seen no labels");
  if (features.size() != layout_.size()) {
    throw ContractError(
        fmt::format("expected {} features, got {}", layout_.size(), features.size()));
  }
  if (class_counts_[0] == 0) return Outcome::positive;
  if (class_counts_[1] == 0) return Outcome::negative;
  const auto score = log_scores(features);
  return score[1] > score[0] ? Outcome::positive : Outcome::negative;
}

}  // namespace stability_meter
