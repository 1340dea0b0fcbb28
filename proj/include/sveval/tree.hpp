#pragma once

// CART classification trees grown on Gini impurity decrease, and random
// forests of such trees over bootstrap resamples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "sveval/encoding.hpp"
#include "sveval/errors.hpp"
#include "sveval/parallel.hpp"
#include "sveval/rng.hpp"

namespace sveval {

/// 1 - p^2 - (1 - p)^2 for the positive share p of `total`.
inline double gini_impurity(double positive, double total) noexcept {
  if (!(total > 0.0)) return 0.0;
  const double p = positive / total;
  return 2.0 * p * (1.0 - p);
}

struct TreeConfig {
  std::size_t max_depth = 0;      // 0: unlimited
  std::size_t min_node_size = 1;  // nodes with this many records or fewer are leaves
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double split = 0.0;  // x[feature] < split goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double positive_fraction = 0.0;
  std::size_t count = 0;

  bool leaf() const noexcept { return feature < 0; }
};

struct TreeModel {
  std::size_t feature_count = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

namespace detail {

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double split = 0.0;
};

/// Grows one tree over `samples`, a list of dataset rows (repeats allowed).
/// When `feature_rng` is set, `mtry` features are drawn per node.
class TreeGrower {
 public:
  TreeGrower(const Dataset& data, const TreeConfig& config, std::size_t mtry, Rng* feature_rng)
      : data_(data), config_(config), mtry_(mtry), rng_(feature_rng) {}

  TreeModel grow(std::vector<std::size_t> samples) {
    if (samples.empty()) throw DataError("cannot grow a tree on empty data");
    samples_ = std::move(samples);
    model_ = TreeModel{data_.cols, {}};
    features_.resize(data_.cols);
    struct Pending {
      std::size_t node, begin, end, depth;
    };
    std::vector<Pending> stack;
    model_.nodes.emplace_back();
    stack.push_back({0, 0, samples_.size(), 0});
    while (!stack.empty()) {
      const Pending cur = stack.back();
      stack.pop_back();
      double pos = 0.0, total = 0.0;
      for (std::size_t k = cur.begin; k < cur.end; ++k) {
        const double w = data_.weight(samples_[k]);
        total += w;
        if (data_.y[samples_[k]] == 1) pos += w;
      }
      TreeNode& node = model_.nodes[cur.node];
      node.count = cur.end - cur.begin;
      node.positive_fraction = total > 0.0 ? pos / total : 0.0;

      const bool depth_reached = config_.max_depth != 0 && cur.depth >= config_.max_depth;
      if (depth_reached || node.count <= config_.min_node_size || pos == 0.0 || pos == total)
        continue;
      const SplitCandidate best = best_split(cur.begin, cur.end, pos, total);
      if (best.feature < 0) continue;

      const auto f = static_cast<std::size_t>(best.feature);
      const auto mid = std::partition(
          samples_.begin() + static_cast<std::ptrdiff_t>(cur.begin),
          samples_.begin() + static_cast<std::ptrdiff_t>(cur.end),
          [&](std::size_t r) { return data_.x[r * data_.cols + f] < best.split; });
      const auto split_at = static_cast<std::size_t>(mid - samples_.begin());

      const auto left = static_cast<std::int32_t>(model_.nodes.size());
      model_.nodes.emplace_back();
      model_.nodes.emplace_back();
      TreeNode& parent = model_.nodes[cur.node];
      parent.feature = best.feature;
      parent.split = best.split;
      parent.left = left;
      parent.right = left + 1;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({static_cast<std::size_t>(left + 1), split_at, cur.end, cur.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), cur.begin, split_at, cur.depth + 1});
    }
    return std::move(model_);
  }

 private:
  struct Entry {
    double x, pos, w;
  };

  void choose_features() {
    const std::size_t p = data_.cols;
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    candidates_.clear();
    if (rng_ == nullptr || mtry_ == 0 || mtry_ >= p) {
      candidates_.assign(features_.begin(), features_.end());
      return;
    }
    for (std::size_t i = 0; i < mtry_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_->index(p - i));
      std::swap(features_[i], features_[j]);
    }
    candidates_.assign(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(candidates_.begin(), candidates_.end());
  }

  // Exhaustive search over the candidate features and the midpoints between
  // consecutive distinct values. Equal gains keep the lowest feature index,
  // then the smallest split point.
  SplitCandidate best_split(std::size_t begin, std::size_t end, double pos, double total) {
    constexpr double kMinGain = 1e-12;
    choose_features();
    const double parent = gini_impurity(pos, total);
    SplitCandidate best;
    for (std::size_t f : candidates_) {
      buffer_.clear();
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t r = samples_[k];
        const double w = data_.weight(r);
        buffer_.push_back({data_.x[r * data_.cols + f], data_.y[r] == 1 ? w : 0.0, w});
      }
      std::sort(buffer_.begin(), buffer_.end(),
                [](const Entry& a, const Entry& b) { return a.x < b.x; });
      if (buffer_.front().x == buffer_.back().x) continue;
      double left_pos = 0.0, left_w = 0.0;
      for (std::size_t i = 0; i + 1 < buffer_.size(); ++i) {
        left_pos += buffer_[i].pos;
        left_w += buffer_[i].w;
        if (buffer_[i].x == buffer_[i + 1].x) continue;
        const double right_w = total - left_w;
        const double gain = parent - (left_w / total) * gini_impurity(left_pos, left_w) -
                            (right_w / total) * gini_impurity(pos - left_pos, right_w);
        if (gain > best.gain + kMinGain) {
          double split = 0.5 * (buffer_[i].x + buffer_[i + 1].x);
          if (!(split > buffer_[i].x)) split = buffer_[i + 1].x;
          best = {gain, static_cast<int>(f), split};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const TreeConfig& config_;
  std::size_t mtry_;
  Rng* rng_;
  TreeModel model_;
  std::vector<std::size_t> samples_;
  std::vector<std::size_t> features_;
  std::vector<std::size_t> candidates_;
  std::vector<Entry> buffer_;
};

}  // namespace detail

/// Single CART tree on all rows, considering every feature at each split.
inline TreeModel fit_tree(const Dataset& data, const TreeConfig& config = {}) {
  if (data.rows() == 0) throw DataError("fit_tree: empty training data");
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return detail::TreeGrower(data, config, 0, nullptr).grow(std::move(rows));
}

/// Leaf positive proportion for an encoded row.
inline double predict_proba(const TreeModel& tree, std::span<const double> row) {
  if (row.size() != tree.feature_count)
    throw DataError("schema mismatch: tree expects " + std::to_string(tree.feature_count) +
                    " encoded columns");
  std::size_t i = 0;
  while (!tree.nodes[i].leaf()) {
    const TreeNode& n = tree.nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] < n.split ? n.left : n.right);
  }
  return tree.nodes[i].positive_fraction;
}

struct ForestConfig {
  std::size_t trees = 100;
  std::size_t mtry = 0;  // 0: floor(sqrt(feature count)), at least 1
  std::size_t min_node_size = 1;
  std::size_t max_depth = 0;
  bool bootstrap = true;

  std::size_t effective_mtry(std::size_t features) const {
    if (mtry != 0) return std::min(mtry, features);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(features)))));
  }
};

struct ForestModel {
  std::size_t feature_count = 0;
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;
};

/// Random forest: tree t is grown from the stream derive_seed({seed, t}),
/// on a bootstrap resample of size n (or all rows when bootstrap is off),
/// drawing mtry candidate features per node. Rows are first put in a
/// canonical order so the fit does not depend on the input row order.
/// Trees are independent and may be grown on `threads` workers without
/// changing the result.
inline ForestModel fit_forest(const Dataset& data, const ForestConfig& config, std::uint64_t seed,
                              std::size_t threads = 1) {
  const std::size_t n = data.rows();
  if (n == 0) throw DataError("fit_forest: empty training data");
  if (config.trees == 0) throw DataError("fit_forest: tree count must be positive");

  std::vector<std::size_t> canonical(n);
  std::iota(canonical.begin(), canonical.end(), std::size_t{0});
  std::stable_sort(canonical.begin(), canonical.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = data.row(a), rb = data.row(b);
    for (std::size_t j = 0; j < data.cols; ++j)
      if (ra[j] != rb[j]) return ra[j] < rb[j];
    if (data.y[a] != data.y[b]) return data.y[a] < data.y[b];
    return data.weight(a) < data.weight(b);
  });

  ForestModel forest;
  forest.feature_count = data.cols;
  forest.trees.resize(config.trees);
  forest.tree_seeds.resize(config.trees);
  const TreeConfig tree_config{config.max_depth, config.min_node_size};
  const std::size_t mtry = config.effective_mtry(data.cols);

  parallel_for(config.trees, threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed({seed, t});
    Rng rng(tree_seed);
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) rows[i] = canonical[rng.index(n)];
    } else {
      rows = canonical;
    }
    forest.tree_seeds[t] = tree_seed;
    forest.trees[t] = detail::TreeGrower(data, tree_config, mtry, &rng).grow(std::move(rows));
  });
  return forest;
}

/// Mean of the trees' leaf proportions.
inline double predict_proba(const ForestModel& forest, std::span<const double> row) {
  if (row.size() != forest.feature_count)
    throw DataError("schema mismatch: forest expects " + std::to_string(forest.feature_count) +
                    " encoded columns");
  double sum = 0.0;
  for (const TreeModel& tree : forest.trees) sum += predict_proba(tree, row);
  return std::clamp(sum / static_cast<double>(forest.trees.size()), 0.0, 1.0);
}

}  // namespace sveval
