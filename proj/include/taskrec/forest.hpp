#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "taskrec/common.hpp"

namespace taskrec::help {

struct ForestConfig {
  std::size_t n_trees = 50;
  std::size_t min_leaf = 2;      // smallest number of samples a split may leave on either side
  std::size_t max_features = 0;  // features tried per split; 0 means round(sqrt(d))
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static ForestConfig from_json(const nlohmann::json& j);
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // x[feature] <= threshold
  int right = -1;
  double p_help = 0.0;  // leaf distribution is (1 - p_help, p_help)
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
};

/// Bagged CART trees with Gini splits.
class RandomForest {
 public:
  RandomForest() = default;

  /// `labels` are 0/1; both classes must be present.
  static RandomForest fit(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                          const ForestConfig& cfg);

  /// Mean of the trees' leaf probabilities for the help class.
  double predict(std::span<const double> x) const;

  const ForestConfig& config() const { return cfg_; }
  std::size_t num_features() const { return num_features_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  nlohmann::json to_json() const;
  static RandomForest from_json(const nlohmann::json& j);

 private:
  ForestConfig cfg_;
  std::size_t num_features_ = 0;
  std::vector<DecisionTree> trees_;
};

}  // namespace taskrec::help
