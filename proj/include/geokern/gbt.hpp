#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "geokern/common.hpp"

namespace geokern {

struct GbtParams {
  std::size_t n_rounds = 1000;
  int max_depth = 3;
  double learning_rate = 1e-2;  // shrinkage applied to every tree
  double colsample = 1.0;       // fraction of features drawn per tree
  std::size_t min_samples_leaf = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_depth < 1) throw DataError("gbt: max_depth must be >= 1");
    if (!(learning_rate > 0.0)) throw DataError("gbt: learning_rate must be positive");
    if (!(colsample > 0.0) || colsample > 1.0)
      throw DataError("gbt: colsample must be in (0, 1]");
    if (min_samples_leaf < 1) throw DataError("gbt: min_samples_leaf must be >= 1");
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

// Binary regression tree; rows go left when x[feature] < threshold.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }

  double predict_row(std::span<const double> row) const {
    int idx = 0;
    while (!nodes_[static_cast<std::size_t>(idx)].is_leaf()) {
      const TreeNode& n = nodes_[static_cast<std::size_t>(idx)];
      idx = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                   : n.right;
    }
    return nodes_[static_cast<std::size_t>(idx)].value;
  }

  int depth() const { return depth_below(0); }

 private:
  int depth_below(int idx) const {
    const TreeNode& n = nodes_[static_cast<std::size_t>(idx)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_below(n.left), depth_below(n.right));
  }

  std::vector<TreeNode> nodes_;
};

namespace detail {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

// Best squared-error split over the given rows. Candidate thresholds are
// midpoints between consecutive distinct sorted values; ties in gain keep
// the lower feature index, then the lower threshold (strict > while
// scanning in ascending order).
inline SplitChoice best_split(const Matrix& features,
                              std::span<const double> residuals,
                              std::span<const std::size_t> rows,
                              std::span<const std::size_t> active_features,
                              std::size_t min_samples_leaf) {
  SplitChoice best;
  const std::size_t m = rows.size();
  if (m < 2 * min_samples_leaf) return best;

  double total = 0.0;
  for (std::size_t r : rows) total += residuals[r];

  std::vector<std::pair<double, double>> vals(m);  // (feature value, residual)
  for (std::size_t f : active_features) {
    for (std::size_t k = 0; k < m; ++k)
      vals[k] = {features.at(rows[k], f), residuals[rows[k]]};
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double left_sum = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      left_sum += vals[k].second;
      const std::size_t n_left = k + 1;
      if (n_left < min_samples_leaf) continue;
      if (m - n_left < min_samples_leaf) break;
      if (vals[k].first == vals[k + 1].first) continue;  // no boundary here
      const double right_sum = total - left_sum;
      const double nl = static_cast<double>(n_left);
      const double nr = static_cast<double>(m - n_left);
      const double gain = left_sum * left_sum / nl +
                          right_sum * right_sum / nr -
                          total * total / static_cast<double>(m);
      if (gain > best.gain) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (vals[k].first + vals[k + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

inline int grow_tree(std::vector<TreeNode>& nodes, const Matrix& features,
                     std::span<const double> residuals,
                     std::vector<std::size_t>& rows, int depth,
                     std::span<const std::size_t> active_features,
                     const GbtParams& params) {
  double sum = 0.0;
  double lo = residuals[rows[0]], hi = residuals[rows[0]];
  for (std::size_t r : rows) {
    sum += residuals[r];
    lo = std::min(lo, residuals[r]);
    hi = std::max(hi, residuals[r]);
  }
  const double mean = sum / static_cast<double>(rows.size());

  SplitChoice split;
  if (depth < params.max_depth && lo < hi) {
    split = best_split(features, residuals, rows, active_features,
                       params.min_samples_leaf);
  }
  const int idx = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (!split.found || !(split.gain > 0.0)) {
    nodes[static_cast<std::size_t>(idx)].value = mean;
    return idx;
  }

  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : rows) {
    if (features.at(r, split.feature) < split.threshold)
      left_rows.push_back(r);
    else
      right_rows.push_back(r);
  }
  rows.clear();
  rows.shrink_to_fit();

  nodes[static_cast<std::size_t>(idx)].feature = static_cast<int>(split.feature);
  nodes[static_cast<std::size_t>(idx)].threshold = split.threshold;
  const int left = grow_tree(nodes, features, residuals, left_rows, depth + 1,
                             active_features, params);
  nodes[static_cast<std::size_t>(idx)].left = left;
  const int right = grow_tree(nodes, features, residuals, right_rows, depth + 1,
                              active_features, params);
  nodes[static_cast<std::size_t>(idx)].right = right;
  return idx;
}

}  // namespace detail

// Greedy CART for squared error: each node takes the gain-maximizing split
// among the active features; leaves carry the mean residual of their rows.
inline RegressionTree fit_tree(const Matrix& features,
                               std::span<const double> residuals,
                               const GbtParams& params,
                               std::span<const std::size_t> active_features) {
  params.validate();
  if (features.rows == 0 || residuals.empty())
    throw DataError("fit_tree: empty input");
  if (features.rows != residuals.size())
    throw DataError("fit_tree: " + std::to_string(features.rows) +
                    " feature rows for " + std::to_string(residuals.size()) +
                    " residuals");
  for (std::size_t f : active_features)
    if (f >= features.cols) throw DataError("fit_tree: active feature out of range");

  std::vector<std::size_t> rows(features.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<TreeNode> nodes;
  detail::grow_tree(nodes, features, residuals, rows, 0, active_features, params);
  return RegressionTree(std::move(nodes));
}

struct GbtModel {
  double base_score = 0.0;  // training-target mean
  std::vector<RegressionTree> trees;
  GbtParams params;

  double predict_row(std::span<const double> row) const {
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict_row(row);
    return base_score + params.learning_rate * acc;
  }
};

// Additive residual fitting with shrinkage and per-tree column subsampling.
inline GbtModel fit_gbt(const Matrix& features, std::span<const double> targets,
                        const GbtParams& params) {
  params.validate();
  if (features.rows == 0) throw DataError("fit_gbt: empty input");
  if (features.rows != targets.size())
    throw DataError("fit_gbt: " + std::to_string(features.rows) +
                    " feature rows for " + std::to_string(targets.size()) +
                    " targets");

  GbtModel model;
  model.params = params;
  model.base_score =
      std::accumulate(targets.begin(), targets.end(), 0.0) /
      static_cast<double>(targets.size());

  std::vector<double> pred(targets.size(), model.base_score);
  std::vector<double> residuals(targets.size());
  std::vector<std::size_t> all_features(features.cols);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});
  const std::size_t n_active = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(params.colsample * static_cast<double>(features.cols))));

  Rng rng(params.seed);
  model.trees.reserve(params.n_rounds);
  for (std::size_t round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < targets.size(); ++i)
      residuals[i] = targets[i] - pred[i];

    std::vector<std::size_t> active = all_features;
    if (n_active < features.cols) {
      // partial Fisher-Yates, then sort so split scans stay index-ordered
      for (std::size_t i = 0; i < n_active; ++i) {
        const std::size_t j = i + rng.below(active.size() - i);
        std::swap(active[i], active[j]);
      }
      active.resize(n_active);
      std::sort(active.begin(), active.end());
    }

    RegressionTree tree = fit_tree(features, residuals, params, active);
    for (std::size_t i = 0; i < targets.size(); ++i)
      pred[i] += params.learning_rate * tree.predict_row(features.row(i));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

inline std::vector<double> predict_gbt(const GbtModel& model,
                                       const Matrix& features) {
  for (const auto& tree : model.trees)
    for (const auto& n : tree.nodes())
      if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= features.cols)
        throw DataError("predict_gbt: feature count does not match training");
  std::vector<double> out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i)
    out[i] = model.predict_row(features.row(i));
  return out;
}

}  // namespace geokern
