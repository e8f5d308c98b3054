#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bmf/linmodels.hpp"
#include "bmf/matrix.hpp"

namespace bmf {

// Feed-forward architecture: flattened input, ReLU dense blocks (1-3 layers
// each), one inverted-dropout layer after the final block, linear output.
struct MlpArchitecture {
  std::vector<int> hidden;        // widths, flattened across blocks
  double dropout_rate = 0.0;      // applied after the last hidden layer
  int output_dim = 16;

  static MlpArchitecture from_blocks(const std::vector<std::vector<int>>& blocks,
                                     double dropout_rate, int output_dim = 16);
};

struct TrainConfig {
  int max_epochs = 300;
  int patience = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
};

// Plain dense network over scalar type T. float is the training precision;
// the gradient check instantiates double.
template <typename T>
struct MlpNet {
  std::vector<int> sizes;              // input, hidden..., output
  std::vector<std::vector<T>> w;       // layer l: sizes[l+1] x sizes[l], row-major
  std::vector<std::vector<T>> b;
  int dropout_layer = -1;              // activation index the mask applies to
  T dropout_rate = 0;

  std::size_t layers() const { return w.size(); }

  void init_he_uniform(std::mt19937_64& rng) {
    for (std::size_t l = 0; l < w.size(); ++l) {
      const T limit = std::sqrt(T(6) / T(sizes[l]));
      std::uniform_real_distribution<double> u(-double(limit), double(limit));
      for (auto& v : w[l]) v = T(u(rng));
      for (auto& v : b[l]) v = 0;
    }
  }

  static MlpNet make(int input_dim, const std::vector<int>& hidden, int output_dim,
                     double dropout_rate) {
    MlpNet net;
    net.sizes.push_back(input_dim);
    for (int h : hidden) net.sizes.push_back(h);
    net.sizes.push_back(output_dim);
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
      net.w.emplace_back(static_cast<std::size_t>(net.sizes[l + 1]) * net.sizes[l]);
      net.b.emplace_back(net.sizes[l + 1]);
    }
    net.dropout_rate = T(dropout_rate);
    net.dropout_layer = dropout_rate > 0 ? static_cast<int>(hidden.size()) : -1;
    return net;
  }

  // Forward pass for a batch; activations[l] has shape n x sizes[l].
  // In training mode an inverted-dropout mask (entries 0 or 1/(1-p)) is
  // drawn from rng and recorded for backward.
  void forward(const std::vector<std::vector<T>>& batch,
               std::vector<std::vector<std::vector<T>>>& activations,
               std::vector<std::vector<T>>* mask, std::mt19937_64* rng) const {
    const std::size_t n = batch.size();
    activations.assign(sizes.size(), {});
    activations[0].assign(batch.begin(), batch.end());
    if (mask) mask->assign(n, {});
    for (std::size_t l = 0; l < layers(); ++l) {
      const int in = sizes[l], out = sizes[l + 1];
      activations[l + 1].resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto& a = activations[l + 1][i];
        a.assign(out, 0);
        const auto& prev = activations[l][i];
        for (int o = 0; o < out; ++o) {
          T z = b[l][o];
          const T* wr = w[l].data() + static_cast<std::size_t>(o) * in;
          for (int j = 0; j < in; ++j) z += wr[j] * prev[j];
          a[o] = (l + 1 < sizes.size() - 1) ? (z > 0 ? z : T(0)) : z;  // ReLU hidden
        }
        if (mask && rng && dropout_layer == static_cast<int>(l + 1) &&
            dropout_rate > 0) {
          std::uniform_real_distribution<double> u(0.0, 1.0);
          auto& mi = (*mask)[i];
          mi.assign(out, 0);
          const T keep_inv = T(1) / (T(1) - dropout_rate);
          for (int o = 0; o < out; ++o) {
            mi[o] = u(*rng) < double(dropout_rate) ? T(0) : keep_inv;
            a[o] *= mi[o];
          }
        }
      }
    }
  }

  // Mean squared error over all batch entries and outputs, with gradient
  // accumulation into gw/gb (same shapes as w/b).
  T backward(const std::vector<std::vector<std::vector<T>>>& activations,
             const std::vector<std::vector<T>>& targets,
             const std::vector<std::vector<T>>* mask, std::vector<std::vector<T>>& gw,
             std::vector<std::vector<T>>& gb) const {
    const std::size_t n = targets.size();
    const std::size_t last = sizes.size() - 1;
    gw.resize(layers());
    gb.resize(layers());
    for (std::size_t l = 0; l < layers(); ++l) {
      gw[l].assign(w[l].size(), 0);
      gb[l].assign(b[l].size(), 0);
    }
    const T scale = T(2) / (T(n) * T(sizes[last]));
    T loss = 0;
    std::vector<std::vector<T>> delta(n);
    for (std::size_t i = 0; i < n; ++i) {
      delta[i].resize(sizes[last]);
      for (int o = 0; o < sizes[last]; ++o) {
        const T e = activations[last][i][o] - targets[i][o];
        loss += e * e;
        delta[i][o] = scale * e;
      }
    }
    loss /= T(n) * T(sizes[last]);

    for (std::size_t l = layers(); l-- > 0;) {
      const int in = sizes[l], out = sizes[l + 1];
      for (std::size_t i = 0; i < n; ++i) {
        const auto& prev = activations[l][i];
        for (int o = 0; o < out; ++o) {
          const T d = delta[i][o];
          if (d == 0) continue;
          T* gwr = gw[l].data() + static_cast<std::size_t>(o) * in;
          for (int j = 0; j < in; ++j) gwr[j] += d * prev[j];
          gb[l][o] += d;
        }
      }
      if (l == 0) break;
      // Propagate to the previous activation, through dropout and ReLU.
      std::vector<std::vector<T>> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        next[i].assign(in, 0);
        for (int o = 0; o < out; ++o) {
          const T d = delta[i][o];
          if (d == 0) continue;
          const T* wr = w[l].data() + static_cast<std::size_t>(o) * in;
          for (int j = 0; j < in; ++j) next[i][j] += d * wr[j];
        }
        if (mask && dropout_layer == static_cast<int>(l) && dropout_rate > 0) {
          for (int j = 0; j < in; ++j) next[i][j] *= (*mask)[i][j];
        }
        for (int j = 0; j < in; ++j) {
          if (activations[l][i][j] <= 0) next[i][j] = 0;  // ReLU gate
        }
      }
      delta = std::move(next);
    }
    return loss;
  }
};

struct MlpModel {
  MlpArchitecture arch;
  MlpNet<double> net;          // weights promoted to double after training
  Standardizer x_std;
  Standardizer y_std;
  std::vector<double> train_history;
  std::vector<double> val_history;
  int best_epoch = -1;

  std::vector<double> predict(std::span<const double> x) const;
  std::string history_csv() const;
  std::string to_json() const;
};

// Trains with Adam on MSE in single precision, seeded shuffles, early
// stopping on validation MSE with best-epoch weight restore.
MlpModel mlp_fit(const Matrix& x_train, const Matrix& y_train, const Matrix& x_val,
                 const Matrix& y_val, const MlpArchitecture& arch,
                 const TrainConfig& config);

// Backprop vs central finite differences (h = 1e-5) on every parameter of a
// small double-precision network; returns the max relative error.
double grad_check(const MlpArchitecture& arch, const Matrix& x, const Matrix& y,
                  std::uint64_t seed);

}  // namespace bmf
