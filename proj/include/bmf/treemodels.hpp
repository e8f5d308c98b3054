#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bmf/matrix.hpp"

namespace bmf {

// Flat tree storage; node 0 is the root. Leaves carry the mean of the
// training targets routed to them (16 outputs for RF, 1 for GBT).
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int n_samples = 0;
  std::vector<double> value;
};

struct Tree {
  std::vector<TreeNode> nodes;

  std::span<const double> predict(std::span<const double> x) const;
};

struct TreeParams {
  int max_depth = 32;
  int min_samples_leaf = 1;
  double max_features = 1.0;  // fraction of features tried per node
};

// Greedy CART on the summed per-output variance reduction. Exact split
// enumeration over sorted unique values; ties break toward the lowest
// feature index, then the lowest threshold.
Tree fit_tree(const Matrix& x, const Matrix& y, const TreeParams& params,
              std::uint64_t rng_seed, const std::vector<int>* row_subset = nullptr);

struct ForestParams {
  int n_trees = 100;
  int max_depth = 32;
  int min_samples_leaf = 1;
  double max_features = 1.0;
  bool bootstrap = true;  // test hook: disable to train every tree on all rows
  bool parallel = true;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestParams params;
  std::uint64_t seed = 0;

  std::vector<double> predict(std::span<const double> x) const;
  std::string to_json() const;
};

ForestModel rf_fit(const Matrix& x, const Matrix& y, const ForestParams& params,
                   std::uint64_t seed);

struct GbtParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 6;
  double lambda_reg = 1.0;  // L2 on leaf weights
  double gamma = 0.0;       // gain threshold per split
  double subsample = 1.0;
  double colsample = 1.0;
  bool parallel = true;
};

struct GbtModel {
  std::vector<double> base_score;       // per horizon
  std::vector<std::vector<Tree>> trees; // [horizon][round]
  GbtParams params;

  std::vector<double> predict(std::span<const double> x) const;
  // Training MSE after each round for one horizon (used by the loss
  // monotonicity property).
  std::vector<std::vector<double>> train_mse_history;
};

// Per-horizon squared-loss boosting with the regularized split gain
// 0.5*[GL^2/(HL+reg) + GR^2/(HR+reg) - (GL+GR)^2/(HL+HR+reg)] - gamma and
// leaf weight -G/(H+reg).
GbtModel gbt_fit(const Matrix& x, const Matrix& y, const GbtParams& params,
                 std::uint64_t seed);

}  // namespace bmf
