#pragma once

// CART classifier over the three relative-frequency features.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psyborg/bias_model.hpp"
#include "psyborg/inference.hpp"

namespace psyborg {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;  // taken when value <= threshold
  int right = -1;
  int label = 0;  // majority label of the node's training rows

  bool is_leaf() const { return feature < 0; }
};

struct LabeledFeatures {
  FeatureVector features;
  int label = 0;
};

struct TreeOptions {
  int max_depth = 6;
  int min_samples_split = 2;
  int min_samples_leaf = 10;
};

class DecisionTree {
 public:
  DecisionTree() : nodes_{TreeNode{}} {}
  explicit DecisionTree(std::vector<TreeNode> nodes);

  int predict(const FeatureVector& fv) const;
  int depth() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;  // root at index 0
};

/// Greedy Gini splits at midpoints between consecutive distinct values.
/// Deterministic for a given row order: ties prefer the lower feature index,
/// then the lower threshold; leaf ties prefer the lower label.
DecisionTree train_tree(std::span<const LabeledFeatures> rows, TreeOptions options = {});

/// One tree per bias bit; the predicted state is the concatenation.
class BiasTreeModel {
 public:
  static BiasTreeModel train(std::span<const std::pair<FeatureVector, BiasState>> rows,
                             TreeOptions options = {});

  BiasState classify(const FeatureVector& fv) const;

  const DecisionTree& loss() const { return loss_; }
  const DecisionTree& confirmation() const { return confirmation_; }
  const DecisionTree& sunk_cost() const { return sunk_; }

  std::string to_json() const;
  static BiasTreeModel from_json(std::string_view text);

 private:
  DecisionTree loss_, confirmation_, sunk_;
};

}  // namespace psyborg
