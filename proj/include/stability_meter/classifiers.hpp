#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stability_meter/decision_tree.hpp"
#include "stability_meter/naive_bayes.hpp"
#include "stability_meter/prefixing.hpp"

namespace stability_meter {

/// How a bucket's model reacts to newly labeled samples.
///   incremental    - naive Bayes counts updated on every label
///   window_retrain - tree refit from scratch on the last `train_window` labels
///   static_model   - tree fit once on the grace-period labels, then frozen
enum class UpdatePolicy : std::uint8_t { incremental, window_retrain, static_model };

std::string_view to_string(UpdatePolicy policy);
/// Accepts the CLI spellings incremental|window-retrain|static.
UpdatePolicy parse_policy(std::string_view text);

struct ModelSettings {
  std::size_t train_window = 200;
  std::size_t tree_depth = 6;
  std::size_t min_leaf = 5;
  double laplace_alpha = 1.0;
  std::size_t retrain_every = 1;

  void validate() const;
};

class OutcomeModel {
 public:
  OutcomeModel(std::size_t bucket, UpdatePolicy policy, FeatureLayout layout,
               ModelSettings settings = {});

  std::size_t bucket() const { return bucket_; }
  UpdatePolicy policy() const { return policy_; }
  std::uint64_t version() const { return version_; }
  bool ready() const;

  /// Throws NotReadyError until the model has been trained.
  Outcome predict(const EncodedSample& sample) const;

  /// End-of-grace training with every grace label for this bucket.
  void initialize(std::span<const EncodedSample> grace);
  /// A label arrived after the grace period; applies the policy.
  void observe(const EncodedSample& labeled);

  void update_incremental(const EncodedSample& labeled);
  void retrain_window(std::span<const EncodedSample> window);
  void train_static(std::span<const EncodedSample> grace);

  const std::deque<EncodedSample>& stored_window() const { return window_; }
  const NaiveBayes& naive_bayes() const { return bayes_; }
  const DecisionTree& tree() const { return tree_; }

 private:
  void require(UpdatePolicy policy, std::string_view op) const;

  std::size_t bucket_;
  UpdatePolicy policy_;
  FeatureLayout layout_;
  ModelSettings settings_;
  std::uint64_t version_ = 0;

  NaiveBayes bayes_;
  DecisionTree tree_;
  std::deque<EncodedSample> window_;
  std::size_t labels_since_retrain_ = 0;
  bool static_trained_ = false;
};

/// One model per bucket, all under the same policy.
class PredictionFramework {
 public:
  PredictionFramework(const BucketConfig& buckets, UpdatePolicy policy,
                      std::span<const AttributeColumn> schema, ModelSettings settings = {});

  const BucketConfig& buckets() const { return buckets_; }
  UpdatePolicy policy() const { return policy_; }

  OutcomeModel& model(std::size_t k);
  const OutcomeModel& model(std::size_t k) const;

 private:
  BucketConfig buckets_;
  UpdatePolicy policy_;
  std::map<std::size_t, OutcomeModel> models_;
};

}  // namespace stability_meter
