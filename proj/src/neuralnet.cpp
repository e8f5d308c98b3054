#include "bmf/neuralnet.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "bmf/errors.hpp"
#include "json.hpp"

namespace bmf {

MlpArchitecture MlpArchitecture::from_blocks(const std::vector<std::vector<int>>& blocks,
                                             double dropout_rate, int output_dim) {
  MlpArchitecture a;
  for (const auto& block : blocks) {
    for (int w : block) a.hidden.push_back(w);
  }
  a.dropout_rate = dropout_rate;
  a.output_dim = output_dim;
  return a;
}

namespace {

template <typename T>
std::vector<std::vector<T>> to_rows(const Matrix& m) {
  std::vector<std::vector<T>> rows(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows[i].resize(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = T(m(i, j));
  }
  return rows;
}

// Validation MSE in original units.
template <typename T>
double eval_mse(const MlpNet<T>& net, const std::vector<std::vector<T>>& x,
                const Matrix& y_raw, const Standardizer& y_std) {
  std::vector<std::vector<std::vector<T>>> acts;
  net.forward(x, acts, nullptr, nullptr);
  const auto& out = acts.back();
  double mse = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t o = 0; o < out[i].size(); ++o) {
      const double pred = double(out[i][o]) * y_std.scale[o] + y_std.mean[o];
      const double e = pred - y_raw(i, o);
      mse += e * e;
    }
  }
  return mse / (double(out.size()) * double(y_raw.cols()));
}

}  // namespace

MlpModel mlp_fit(const Matrix& x_train, const Matrix& y_train, const Matrix& x_val,
                 const Matrix& y_val, const MlpArchitecture& arch,
                 const TrainConfig& config) {
  if (x_train.rows() != y_train.rows() || x_val.rows() != y_val.rows() ||
      x_train.cols() != x_val.cols() || y_train.cols() != y_val.cols() ||
      static_cast<int>(y_train.cols()) != arch.output_dim) {
    throw Error(Err::ShapeMismatch, "train/val shapes inconsistent");
  }
  if (x_val.rows() == 0) throw Error(Err::ShapeMismatch, "validation set empty");

  MlpModel model;
  model.arch = arch;
  model.x_std = Standardizer::fit(x_train);
  model.y_std = Standardizer::fit(y_train);
  const Matrix xz = model.x_std.apply(x_train);
  const Matrix yz = model.y_std.apply(y_train);
  const Matrix xvz = model.x_std.apply(x_val);

  using T = float;
  auto net = MlpNet<T>::make(static_cast<int>(x_train.cols()), arch.hidden,
                             arch.output_dim, arch.dropout_rate);
  std::mt19937_64 rng(config.seed);
  net.init_he_uniform(rng);

  const auto xrows = to_rows<T>(xz);
  const auto yrows = to_rows<T>(yz);
  const auto xvrows = to_rows<T>(xvz);
  const std::size_t n = xrows.size();

  // Adam state.
  std::vector<std::vector<T>> mw(net.layers()), vw(net.layers()), mb(net.layers()),
      vb(net.layers());
  for (std::size_t l = 0; l < net.layers(); ++l) {
    mw[l].assign(net.w[l].size(), 0);
    vw[l].assign(net.w[l].size(), 0);
    mb[l].assign(net.b[l].size(), 0);
    vb[l].assign(net.b[l].size(), 0);
  }
  long long step = 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  auto best_w = net.w;
  auto best_b = net.b;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<std::vector<std::vector<T>>> acts;
  std::vector<std::vector<T>> mask, gw, gb;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double train_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::vector<std::vector<T>> bx, by;
      bx.reserve(end - start);
      by.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(xrows[order[i]]);
        by.push_back(yrows[order[i]]);
      }
      net.forward(bx, acts, &mask, &rng);
      const double loss = double(net.backward(acts, by, &mask, gw, gb));
      if (!std::isfinite(loss)) {
        throw Error(Err::NonFiniteLoss, "training loss diverged at epoch " +
                                            std::to_string(epoch));
      }
      train_loss += loss;
      ++batches;

      ++step;
      const T lr = T(config.learning_rate);
      const T b1 = T(config.beta1), b2 = T(config.beta2), eps = T(config.eps);
      const T bc1 = T(1) - T(std::pow(config.beta1, double(step)));
      const T bc2 = T(1) - T(std::pow(config.beta2, double(step)));
      for (std::size_t l = 0; l < net.layers(); ++l) {
        for (std::size_t k = 0; k < net.w[l].size(); ++k) {
          mw[l][k] = b1 * mw[l][k] + (T(1) - b1) * gw[l][k];
          vw[l][k] = b2 * vw[l][k] + (T(1) - b2) * gw[l][k] * gw[l][k];
          net.w[l][k] -= lr * (mw[l][k] / bc1) / (std::sqrt(vw[l][k] / bc2) + eps);
        }
        for (std::size_t k = 0; k < net.b[l].size(); ++k) {
          mb[l][k] = b1 * mb[l][k] + (T(1) - b1) * gb[l][k];
          vb[l][k] = b2 * vb[l][k] + (T(1) - b2) * gb[l][k] * gb[l][k];
          net.b[l][k] -= lr * (mb[l][k] / bc1) / (std::sqrt(vb[l][k] / bc2) + eps);
        }
      }
    }

    const double val = eval_mse(net, xvrows, y_val, model.y_std);
    if (!std::isfinite(val)) {
      throw Error(Err::NonFiniteLoss, "validation loss diverged");
    }
    model.train_history.push_back(train_loss / double(std::max<std::size_t>(1, batches)));
    model.val_history.push_back(val);
    if (val < best_val) {
      best_val = val;
      best_w = net.w;
      best_b = net.b;
      model.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best > config.patience) break;
    }
  }

  // Restore and promote to double for prediction.
  model.net = MlpNet<double>::make(static_cast<int>(x_train.cols()), arch.hidden,
                                   arch.output_dim, arch.dropout_rate);
  for (std::size_t l = 0; l < best_w.size(); ++l) {
    for (std::size_t k = 0; k < best_w[l].size(); ++k) model.net.w[l][k] = best_w[l][k];
    for (std::size_t k = 0; k < best_b[l].size(); ++k) model.net.b[l][k] = best_b[l][k];
  }
  return model;
}

std::vector<double> MlpModel::predict(std::span<const double> x) const {
  std::vector<double> xz(x.size());
  x_std.apply_row(x, xz);
  std::vector<std::vector<std::vector<double>>> acts;
  net.forward({xz}, acts, nullptr, nullptr);  // no dropout in evaluation mode
  std::vector<double> out(acts.back()[0].size());
  for (std::size_t o = 0; o < out.size(); ++o) {
    out[o] = acts.back()[0][o] * y_std.scale[o] + y_std.mean[o];
  }
  return out;
}

std::string MlpModel::history_csv() const {
  std::ostringstream out;
  out << "epoch,train_mse,val_mse\n";
  out.precision(12);
  for (std::size_t e = 0; e < train_history.size(); ++e) {
    out << e << ',' << train_history[e] << ',' << val_history[e] << '\n';
  }
  return out.str();
}

std::string MlpModel::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["sizes"] = net.sizes;
  j["dropout_rate"] = arch.dropout_rate;
  j["best_epoch"] = best_epoch;
  j["x_mean"] = x_std.mean;
  j["x_scale"] = x_std.scale;
  j["y_mean"] = y_std.mean;
  j["y_scale"] = y_std.scale;
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    j["weights"].push_back(net.w[l]);
    j["biases"].push_back(net.b[l]);
  }
  return j.dump();
}

double grad_check(const MlpArchitecture& arch, const Matrix& x, const Matrix& y,
                  std::uint64_t seed) {
  auto net = MlpNet<double>::make(static_cast<int>(x.cols()), arch.hidden,
                                  arch.output_dim, 0.0);  // dropout disabled
  std::mt19937_64 rng(seed);
  net.init_he_uniform(rng);

  const auto xrows = to_rows<double>(x);
  const auto yrows = to_rows<double>(y);

  std::vector<std::vector<std::vector<double>>> acts;
  std::vector<std::vector<double>> gw, gb;
  net.forward(xrows, acts, nullptr, nullptr);
  net.backward(acts, yrows, nullptr, gw, gb);

  auto loss_at = [&]() {
    std::vector<std::vector<std::vector<double>>> a;
    net.forward(xrows, a, nullptr, nullptr);
    double loss = 0.0;
    for (std::size_t i = 0; i < yrows.size(); ++i) {
      for (std::size_t o = 0; o < yrows[i].size(); ++o) {
        const double e = a.back()[i][o] - yrows[i][o];
        loss += e * e;
      }
    }
    return loss / (double(yrows.size()) * double(yrows[0].size()));
  };

  const double h = 1e-5;
  double max_rel = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double orig = param;
    param = orig + h;
    const double lp = loss_at();
    param = orig - h;
    const double lm = loss_at();
    param = orig;
    const double numeric = (lp - lm) / (2 * h);
    const double denom = std::max({1e-8, std::abs(analytic), std::abs(numeric)});
    max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < net.layers(); ++l) {
    for (std::size_t k = 0; k < net.w[l].size(); ++k) probe(net.w[l][k], gw[l][k]);
    for (std::size_t k = 0; k < net.b[l].size(); ++k) probe(net.b[l][k], gb[l][k]);
  }
  return max_rel;
}

}  // namespace bmf
