#include "bmf/treemodels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bmf/errors.hpp"
#include "bmf/parallel.hpp"
#include "json.hpp"

namespace bmf {

namespace {

// splitmix64: decorrelates per-tree RNG streams derived from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4568bULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<int> sample_features(std::size_t d, double fraction, std::mt19937_64& rng) {
  const int k = std::max(1, static_cast<int>(std::ceil(fraction * static_cast<double>(d))));
  std::vector<int> all(d);
  std::iota(all.begin(), all.end(), 0);
  if (static_cast<std::size_t>(k) >= d) return all;
  // Partial Fisher-Yates, then sorted so tie-breaking stays by feature index.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, d - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

struct TreeBuilder {
  const Matrix& x;
  const Matrix& y;
  TreeParams params;
  std::mt19937_64 rng;
  Tree tree;

  int build(std::vector<int>& rows, int depth) {
    const std::size_t outs = y.cols();
    const double n = static_cast<double>(rows.size());

    std::vector<double> sum(outs, 0.0);
    for (int r : rows) {
      for (std::size_t o = 0; o < outs; ++o) sum[o] += y(r, o);
    }

    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].n_samples = static_cast<int>(rows.size());
    tree.nodes[id].value.resize(outs);
    for (std::size_t o = 0; o < outs; ++o) tree.nodes[id].value[o] = sum[o] / n;

    if (depth >= params.max_depth ||
        rows.size() < static_cast<std::size_t>(2 * params.min_samples_leaf)) {
      return id;
    }

    double parent_score = 0.0;  // sum_o S_o^2 / n
    for (std::size_t o = 0; o < outs; ++o) parent_score += sum[o] * sum[o] / n;

    const auto features = sample_features(x.cols(), params.max_features, rng);

    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const double tiny = 1e-12 * std::max(1.0, std::abs(parent_score));

    std::vector<int> order;
    std::vector<double> prefix(outs);
    for (int f : features) {
      order = rows;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
        return a < b;
      });
      std::fill(prefix.begin(), prefix.end(), 0.0);
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        for (std::size_t o = 0; o < outs; ++o) prefix[o] += y(order[i], o);
        const double xv = x(order[i], f);
        const double xn = x(order[i + 1], f);
        if (xv == xn) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = order.size() - nl;
        if (nl < static_cast<std::size_t>(params.min_samples_leaf) ||
            nr < static_cast<std::size_t>(params.min_samples_leaf)) {
          continue;
        }
        double score = 0.0;
        for (std::size_t o = 0; o < outs; ++o) {
          const double sl = prefix[o];
          const double sr = sum[o] - sl;
          score += sl * sl / static_cast<double>(nl) + sr * sr / static_cast<double>(nr);
        }
        const double gain = score - parent_score;
        if (gain > best_gain + tiny) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (xv + xn);
        }
      }
    }

    if (best_feature < 0) return id;

    std::vector<int> left, right;
    for (int r : rows) {
      (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    const int l = build(left, depth + 1);
    tree.nodes[id].left = l;
    const int rch = build(right, depth + 1);
    tree.nodes[id].right = rch;
    return id;
  }
};

}  // namespace

std::span<const double> Tree::predict(std::span<const double> x) const {
  int id = 0;
  while (nodes[id].feature >= 0) {
    id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].value;
}

Tree fit_tree(const Matrix& x, const Matrix& y, const TreeParams& params,
              std::uint64_t rng_seed, const std::vector<int>* row_subset) {
  if (params.max_features <= 0.0 || params.max_features > 1.0) {
    throw Error(Err::InvalidHyperparam, "max_features must be in (0,1]");
  }
  TreeBuilder b{x, y, params, std::mt19937_64(rng_seed), {}};
  std::vector<int> rows;
  if (row_subset) {
    rows = *row_subset;
  } else {
    rows.resize(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
  }
  if (rows.empty()) throw Error(Err::EmptyInput, "no training rows");
  b.build(rows, 0);
  return std::move(b.tree);
}

ForestModel rf_fit(const Matrix& x, const Matrix& y, const ForestParams& params,
                   std::uint64_t seed) {
  if (params.n_trees < 1) throw Error(Err::InvalidHyperparam, "n_trees >= 1");
  if (params.max_features <= 0.0 || params.max_features > 1.0) {
    throw Error(Err::InvalidHyperparam, "max_features must be in (0,1]");
  }
  ForestModel m;
  m.params = params;
  m.seed = seed;
  m.trees.resize(params.n_trees);
  const std::size_t n = x.rows();
  parallel_for(
      static_cast<std::size_t>(params.n_trees),
      [&](std::size_t t) {
        std::mt19937_64 rng(mix_seed(seed, t));
        std::vector<int> rows;
        if (params.bootstrap) {
          rows.resize(n);
          std::uniform_int_distribution<std::size_t> pick(0, n - 1);
          for (auto& r : rows) r = static_cast<int>(pick(rng));
        }
        TreeParams tp{params.max_depth, params.min_samples_leaf, params.max_features};
        m.trees[t] = fit_tree(x, y, tp, mix_seed(seed, t * 2 + 1),
                              params.bootstrap ? &rows : nullptr);
      },
      params.parallel);
  return m;
}

std::vector<double> ForestModel::predict(std::span<const double> x) const {
  std::vector<double> out(trees.front().predict(x).size(), 0.0);
  for (const auto& t : trees) {
    const auto v = t.predict(x);
    for (std::size_t o = 0; o < out.size(); ++o) out[o] += v[o];
  }
  for (auto& v : out) v /= static_cast<double>(trees.size());
  return out;
}

namespace {

nlohmann::json tree_to_json(const Tree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"f", n.feature},
                     {"t", n.threshold},
                     {"l", n.left},
                     {"r", n.right},
                     {"n", n.n_samples},
                     {"v", n.value}});
  }
  return nodes;
}

}  // namespace

std::string ForestModel::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["seed"] = seed;
  j["n_trees"] = params.n_trees;
  for (const auto& t : trees) j["trees"].push_back(tree_to_json(t));
  return j.dump();
}

namespace {

// One boosting tree on gradients g (hessian is 1 per row).
struct GbtTreeBuilder {
  const Matrix& x;
  const std::vector<double>& grad;
  const GbtParams& params;
  const std::vector<int>& features;  // colsampled, sorted
  Tree tree;

  int build(std::vector<int>& rows, int depth) {
    double g = 0.0;
    for (int r : rows) g += grad[r];
    const double h = static_cast<double>(rows.size());

    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].n_samples = static_cast<int>(rows.size());
    tree.nodes[id].value = {-g / (h + params.lambda_reg)};

    if (depth >= params.max_depth || rows.size() < 2) return id;

    const double parent_term = g * g / (h + params.lambda_reg);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<int> order;
    for (int f : features) {
      order = rows;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
        return a < b;
      });
      double gl = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        gl += grad[order[i]];
        const double xv = x(order[i], f);
        const double xn = x(order[i + 1], f);
        if (xv == xn) continue;
        const double hl = static_cast<double>(i + 1);
        const double hr = h - hl;
        const double gr = g - gl;
        const double gain = 0.5 * (gl * gl / (hl + params.lambda_reg) +
                                   gr * gr / (hr + params.lambda_reg) - parent_term) -
                            params.gamma;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (xv + xn);
        }
      }
    }

    if (best_feature < 0 || best_gain <= 0.0) return id;

    std::vector<int> left, right;
    for (int r : rows) {
      (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    const int l = build(left, depth + 1);
    tree.nodes[id].left = l;
    const int rch = build(right, depth + 1);
    tree.nodes[id].right = rch;
    return id;
  }
};

}  // namespace

GbtModel gbt_fit(const Matrix& x, const Matrix& y, const GbtParams& params,
                 std::uint64_t seed) {
  if (params.n_rounds < 1) throw Error(Err::InvalidHyperparam, "n_rounds >= 1");
  if (params.learning_rate <= 0.0 || params.learning_rate > 1.0) {
    throw Error(Err::InvalidHyperparam, "learning_rate must be in (0,1]");
  }
  if (params.subsample <= 0.0 || params.subsample > 1.0 || params.colsample <= 0.0 ||
      params.colsample > 1.0) {
    throw Error(Err::InvalidHyperparam, "subsample and colsample must be in (0,1]");
  }
  if (params.lambda_reg < 0.0 || params.gamma < 0.0 || params.max_depth < 0) {
    throw Error(Err::InvalidHyperparam, "lambda_reg, gamma >= 0; max_depth >= 0");
  }

  const std::size_t n = x.rows();
  const std::size_t outs = y.cols();
  GbtModel m;
  m.params = params;
  m.base_score.resize(outs);
  m.trees.resize(outs);
  m.train_mse_history.resize(outs);

  parallel_for(
      outs,
      [&](std::size_t hz) {
        std::mt19937_64 rng(mix_seed(seed, hz));
        std::vector<double> target(n), pred(n), grad(n);
        for (std::size_t i = 0; i < n; ++i) target[i] = y(i, hz);
        double base = 0.0;
        for (double v : target) base += v;
        base /= static_cast<double>(n);
        m.base_score[hz] = base;
        std::fill(pred.begin(), pred.end(), base);

        for (int round = 0; round < params.n_rounds; ++round) {
          std::vector<int> rows;
          rows.reserve(n);
          if (params.subsample < 1.0) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
              if (unit(rng) < params.subsample) rows.push_back(static_cast<int>(i));
            }
            if (rows.empty()) rows.push_back(0);
          } else {
            for (std::size_t i = 0; i < n; ++i) rows.push_back(static_cast<int>(i));
          }
          const auto features = sample_features(x.cols(), params.colsample, rng);
          for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - target[i];

          GbtTreeBuilder b{x, grad, params, features, {}};
          std::vector<int> build_rows = rows;
          b.build(build_rows, 0);
          Tree tree = std::move(b.tree);

          // A single zero-weight leaf is a no-op round.
          const bool noop = tree.nodes.size() == 1 && tree.nodes[0].value[0] == 0.0;
          if (!noop) {
            for (std::size_t i = 0; i < n; ++i) {
              std::span<const double> row(&x.data()[i * x.cols()], x.cols());
              pred[i] += params.learning_rate * tree.predict(row)[0];
            }
          }
          m.trees[hz].push_back(std::move(tree));

          double mse = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double e = pred[i] - target[i];
            mse += e * e;
          }
          m.train_mse_history[hz].push_back(mse / static_cast<double>(n));
        }
      },
      params.parallel);
  return m;
}

std::vector<double> GbtModel::predict(std::span<const double> x) const {
  std::vector<double> out(base_score.size());
  for (std::size_t hz = 0; hz < out.size(); ++hz) {
    double v = base_score[hz];
    for (const auto& t : trees[hz]) v += params.learning_rate * t.predict(x)[0];
    out[hz] = v;
  }
  return out;
}

}  // namespace bmf
