#include "stability_meter/classifiers.hpp"

#include <fmt/format.h>

#include "stability_meter/errors.hpp"

namespace stability_meter {

std::string_view to_string(UpdatePolicy policy) {
  switch (policy) {
    case UpdatePolicy::incremental:
      return "incremental";
    case UpdatePolicy::window_retrain:
      return "window-retrain";
    case UpdatePolicy::static_model:
      return "static";
  }
  return "?";
}

UpdatePolicy parse_policy(std::string_view text) {
  if (text == "incremental") return UpdatePolicy::incremental;
  if (text == "window-retrain") return UpdatePolicy::window_retrain;
  if (text == "static") return UpdatePolicy::static_model;
  throw ConfigError(fmt::format("unknown model '{}' (incremental|window-retrain|static)", text));
}

void ModelSettings::validate() const {
  if (train_window < 1) throw ConfigError("train window must be >= 1");
  if (tree_depth < 1) throw ConfigError("tree depth must be >= 1");
  if (min_leaf < 1) throw ConfigError("min leaf size must be >= 1");
  if (!(laplace_alpha > 0.0)) throw ConfigError("Laplace alpha must be > 0");
  if (retrain_every < 1) throw ConfigError("retrain-every must be >= 1");
}

OutcomeModel::OutcomeModel(std::size_t bucket, UpdatePolicy policy, FeatureLayout layout,
                           ModelSettings settings)
    : bucket_(bucket),
      policy_(policy),
      layout_(std::move(layout)),
      settings_(settings),
      bayes_(layout_, settings.laplace_alpha) {
  settings_.validate();
}

bool OutcomeModel::ready() const {
  return policy_ == UpdatePolicy::incremental ? bayes_.trained() : !tree_.empty();
}

Outcome OutcomeModel::predict(const EncodedSample& sample) const {
  if (!ready()) throw NotReadyError(fmt::format("model for bucket {} is not trained", bucket_));
  if (policy_ == UpdatePolicy::incremental) return bayes_.predict(sample.features);
  return tree_.predict(sample.features);
}

void OutcomeModel::require(UpdatePolicy policy, std::string_view op) const {
  if (policy_ != policy) {
    throw ContractError(
        fmt::format("{} is not available for a {} model", op, to_string(policy_)));
  }
}

void OutcomeModel::initialize(std::span<const EncodedSample> grace) {
  switch (policy_) {
    case UpdatePolicy::incremental:
      bayes_.fit_bins(grace);
      for (const auto& s : grace) update_incremental(s);
      break;
    case UpdatePolicy::window_retrain: {
      const std::size_t skip =
          grace.size() > settings_.train_window ? grace.size() - settings_.train_window : 0;
      window_.assign(grace.begin() + static_cast<std::ptrdiff_t>(skip), grace.end());
      if (!window_.empty()) {
        const std::vector<EncodedSample> snapshot(window_.begin(), window_.end());
        retrain_window(snapshot);
      }
      break;
    }
    case UpdatePolicy::static_model:
      // A bucket with no grace labels never gets a static model.
      if (!grace.empty()) train_static(grace);
      break;
  }
}

void OutcomeModel::observe(const EncodedSample& labeled) {
  if (!labeled.label) throw ContractError("observe needs a labeled sample");
  switch (policy_) {
    case UpdatePolicy::incremental:
      update_incremental(labeled);
      break;
    case UpdatePolicy::window_retrain: {
      window_.push_back(labeled);
      while (window_.size() > settings_.train_window) window_.pop_front();
      // Untrained models retrain at once so they become usable immediately.
      if (++labels_since_retrain_ >= settings_.retrain_every || tree_.empty()) {
        const std::vector<EncodedSample> snapshot(window_.begin(), window_.end());
        retrain_window(snapshot);
      }
      break;
    }
    case UpdatePolicy::static_model:
      break;
  }
}

void OutcomeModel::update_incremental(const EncodedSample& labeled) {
  require(UpdatePolicy::incremental, "update_incremental");
  if (!labeled.label) throw ContractError("update_incremental needs a labeled sample");
  bayes_.update(labeled);
  ++version_;
}

void OutcomeModel::retrain_window(std::span<const EncodedSample> window) {
  require(UpdatePolicy::window_retrain, "retrain_window");
  if (window.empty()) throw NotReadyError("cannot retrain on an empty window");
  tree_ = DecisionTree::fit(window, layout_, {settings_.tree_depth, settings_.min_leaf});
  labels_since_retrain_ = 0;
  ++version_;
}

void OutcomeModel::train_static(std::span<const EncodedSample> grace) {
  require(UpdatePolicy::static_model, "train_static");
  if (static_trained_) throw ContractError("static model has already been trained");
  if (grace.empty()) throw NotReadyError("cannot train a static model without samples");
  tree_ = DecisionTree::fit(grace, layout_, {settings_.tree_depth, settings_.min_leaf});
  static_trained_ = true;
  version_ = 1;
}

PredictionFramework::PredictionFramework(const BucketConfig& buckets, UpdatePolicy policy,
                                         std::span<const AttributeColumn> schema,
                                         ModelSettings settings)
    : buckets_(buckets), policy_(policy) {
  buckets_.validate();
  settings.validate();
  for (std::size_t k = buckets_.k_min; k <= buckets_.k_max; ++k) {
    models_.emplace(k, OutcomeModel(k, policy, feature_layout(k, schema), settings));
  }
}

OutcomeModel& PredictionFramework::model(std::size_t k) {
  const auto it = models_.find(k);
  if (it == models_.end()) throw ContractError(fmt::format("no model for bucket {}", k));
  return it->second;
}

const OutcomeModel& PredictionFramework::model(std::size_t k) const {
  const auto it = models_.find(k);
  if (it == models_.end()) throw ContractError(fmt::format("no model for bucket {}", k));
  return it->second;
}

}  // namespace stability_meter
