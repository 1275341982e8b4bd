#include "psyborg/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "psyborg/error.hpp"

namespace psyborg {

using nlohmann::json;

namespace {

using Counts = std::map<int, int>;

double gini(const Counts& counts, int total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (const auto& [label, n] : counts) {
    const double p = static_cast<double>(n) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

int majority(const Counts& counts) {
  int best = 0, best_n = -1;
  for (const auto& [label, n] : counts)  // ascending labels: first max wins
    if (n > best_n) {
      best = label;
      best_n = n;
    }
  return best;
}

struct Builder {
  std::span<const LabeledFeatures> rows;
  TreeOptions options;
  std::vector<TreeNode> nodes;

  int build(std::vector<int> idx, int depth) {
    Counts counts;
    for (int i : idx) ++counts[rows[static_cast<std::size_t>(i)].label];
    const int node = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{-1, 0.0, -1, -1, majority(counts)});

    const int n = static_cast<int>(idx.size());
    if (depth >= options.max_depth || counts.size() < 2 || n < options.min_samples_split) return node;

    const double parent = gini(counts, n);
    double best_score = parent - 1e-12;  // require a strict impurity decrease
    int best_feature = -1;
    double best_threshold = 0.0;

    for (int f = 0; f < FeatureVector::kDimension; ++f) {
      std::vector<int> order = idx;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rows[static_cast<std::size_t>(a)].features[f] < rows[static_cast<std::size_t>(b)].features[f];
      });
      Counts left;
      Counts right = counts;
      for (int k = 0; k + 1 < n; ++k) {
        const auto& row = rows[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        ++left[row.label];
        if (--right[row.label] == 0) right.erase(row.label);
        const double v = row.features[f];
        const double next = rows[static_cast<std::size_t>(order[static_cast<std::size_t>(k + 1)])].features[f];
        if (next <= v) continue;
        const int nl = k + 1, nr = n - nl;
        if (nl < options.min_samples_leaf || nr < options.min_samples_leaf) continue;
        const double score = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    if (best_feature < 0) return node;

    std::vector<int> li, ri;
    for (int i : idx)
      (rows[static_cast<std::size_t>(i)].features[best_feature] <= best_threshold ? li : ri).push_back(i);
    nodes[static_cast<std::size_t>(node)].feature = best_feature;
    nodes[static_cast<std::size_t>(node)].threshold = best_threshold;
    const int l = build(std::move(li), depth + 1);
    const int r = build(std::move(ri), depth + 1);
    nodes[static_cast<std::size_t>(node)].left = l;
    nodes[static_cast<std::size_t>(node)].right = r;
    return node;
  }
};

json tree_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes())
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left},
                     {"right", n.right}, {"label", n.label}});
  return nodes;
}

DecisionTree tree_from(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j)
    nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(), n.at("left").get<int>(),
                     n.at("right").get<int>(), n.at("label").get<int>()});
  return DecisionTree(std::move(nodes));
}

}  // namespace

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw IoError("decision tree has no nodes");
  const int n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (node.is_leaf()) continue;
    if (node.feature >= FeatureVector::kDimension || !std::isfinite(node.threshold) ||
        node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)
      throw IoError("decision tree node is malformed");
  }
}

int DecisionTree::predict(const FeatureVector& fv) const {
  int i = 0;
  for (std::size_t guard = 0; guard <= nodes_.size(); ++guard) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) return node.label;
    i = fv[node.feature] <= node.threshold ? node.left : node.right;
  }
  throw IoError("decision tree contains a cycle");
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {  // children follow parents
    const auto& node = nodes_[i];
    if (node.is_leaf()) continue;
    d[static_cast<std::size_t>(node.left)] = d[i] + 1;
    d[static_cast<std::size_t>(node.right)] = d[i] + 1;
    deepest = std::max(deepest, d[i] + 1);
  }
  return deepest;
}

DecisionTree train_tree(std::span<const LabeledFeatures> rows, TreeOptions options) {
  if (rows.empty()) throw PreconditionError("cannot train a tree on an empty dataset");
  if (options.max_depth < 0) throw ConfigError("max_depth must be >= 0");
  if (options.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  Builder b{rows, options, {}};
  std::vector<int> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  b.build(std::move(idx), 0);
  return DecisionTree(std::move(b.nodes));
}

BiasTreeModel BiasTreeModel::train(std::span<const std::pair<FeatureVector, BiasState>> rows,
                                   TreeOptions options) {
  std::vector<LabeledFeatures> loss, conf, sunk;
  for (const auto& [fv, s] : rows) {
    loss.push_back({fv, static_cast<int>(s.loss_aversion())});
    conf.push_back({fv, static_cast<int>(s.confirmation())});
    sunk.push_back({fv, static_cast<int>(s.sunk_cost())});
  }
  BiasTreeModel m;
  m.loss_ = train_tree(loss, options);
  m.confirmation_ = train_tree(conf, options);
  m.sunk_ = train_tree(sunk, options);
  return m;
}

BiasState BiasTreeModel::classify(const FeatureVector& fv) const {
  const auto level = [&fv](const DecisionTree& t) {
    return t.predict(fv) ? BiasLevel::High : BiasLevel::Low;
  };
  return BiasState(level(loss_), level(confirmation_), level(sunk_));
}

std::string BiasTreeModel::to_json() const {
  return json{{"schema", "psyborg.tree_model"},
              {"schema_version", 1},
              {"features", {"p_hat_ua", "p_hat_uc", "f_max"}},
              {"loss_aversion", tree_json(loss_)},
              {"confirmation", tree_json(confirmation_)},
              {"sunk_cost", tree_json(sunk_)}}
      .dump(1);
}

BiasTreeModel BiasTreeModel::from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema") != "psyborg.tree_model" || doc.at("schema_version") != 1)
      throw IoError("not a version-1 tree model");
    BiasTreeModel m;
    m.loss_ = tree_from(doc.at("loss_aversion"));
    m.confirmation_ = tree_from(doc.at("confirmation"));
    m.sunk_ = tree_from(doc.at("sunk_cost"));
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed tree model: ") + e.what());
  }
}

}  // namespace psyborg
