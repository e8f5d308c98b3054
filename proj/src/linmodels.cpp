#include "bmf/linmodels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bmf/errors.hpp"
#include "bmf/parallel.hpp"
#include "json.hpp"

namespace bmf {

Standardizer Standardizer::fit(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2) throw Error(Err::DegenerateInput, "standardize needs n >= 2");
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
  }
  for (std::size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - s.mean[j];
      s.scale[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    s.scale[j] = std::max(std::sqrt(s.scale[j] / static_cast<double>(n)), kScaleFloor);
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean[j]) / scale[j];
  }
  return out;
}

void Standardizer::apply_row(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / scale[j];
}

Matrix Standardizer::invert(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) * scale[j] + mean[j];
  }
  return out;
}

ScalarStandardizer ScalarStandardizer::fit(std::span<const double> y) {
  if (y.size() < 2) throw Error(Err::DegenerateInput, "standardize needs n >= 2");
  ScalarStandardizer s;
  for (double v : y) s.mean += v;
  s.mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - s.mean) * (v - s.mean);
  s.scale = std::max(std::sqrt(ss / static_cast<double>(y.size())),
                     Standardizer::kScaleFloor);
  return s;
}

namespace {

void check_finite(const Matrix& x, std::span<const double> y) {
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(Err::NonFiniteInput, "non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(Err::NonFiniteInput, "non-finite target value");
  }
}

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

double lasso_objective(const Matrix& x, std::span<const double> y,
                       std::span<const double> beta, double lambda) {
  const std::size_t n = x.rows(), d = x.cols();
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    const auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) pred += row[j] * beta[j];
    const double e = y[i] - pred;
    rss += e * e;
  }
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  return rss / (2.0 * static_cast<double>(n)) + lambda * l1;
}

double lasso_lambda_max(const Matrix& x, std::span<const double> y) {
  const std::size_t n = x.rows();
  double m = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    m = std::max(m, std::abs(col_dot(x, j, y)) / static_cast<double>(n));
  }
  return m;
}

LassoFit lasso_cd(const Matrix& x, std::span<const double> y, double lambda, double tol,
                  int max_iter, const std::vector<double>* warm_start) {
  if (lambda < 0 || tol <= 0) throw Error(Err::InvalidParam, "lambda >= 0, tol > 0");
  check_finite(x, y);
  const std::size_t n = x.rows(), d = x.cols();
  const double dn = static_cast<double>(n);

  LassoFit fit;
  fit.lambda = lambda;
  fit.beta.assign(d, 0.0);
  if (warm_start && warm_start->size() == d) fit.beta = *warm_start;

  // Column norms x_j'x_j / n; zero columns are skipped.
  std::vector<double> cnorm(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    cnorm[j] = 0.0;
    const double* p = x.data().data() + j;
    for (std::size_t i = 0; i < n; ++i) cnorm[j] += p[i * d] * p[i * d];
    cnorm[j] /= dn;
  }

  // Residual r = y - X beta.
  std::vector<double> r(y.begin(), y.end());
  for (std::size_t j = 0; j < d; ++j) {
    if (fit.beta[j] == 0.0) continue;
    const double* p = x.data().data() + j;
    for (std::size_t i = 0; i < n; ++i) r[i] -= p[i * d] * fit.beta[j];
  }

  for (int sweep = 0; sweep < max_iter; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (cnorm[j] == 0.0) continue;
      const double* p = x.data().data() + j;
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += p[i * d] * r[i];
      rho = rho / dn + cnorm[j] * fit.beta[j];
      const double b_new = soft_threshold(rho, lambda) / cnorm[j];
      const double delta = b_new - fit.beta[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= p[i * d] * delta;
        fit.beta[j] = b_new;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    fit.n_iter = sweep + 1;
    if (max_delta < tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

LarsPath lars_path(const Matrix& x, std::span<const double> y, int max_knots) {
  check_finite(x, y);
  const std::size_t n = x.rows(), d = x.cols();
  if (d < 1) throw Error(Err::InvalidParam, "need at least one column");
  const double dn = static_cast<double>(n);
  const std::size_t max_active = std::min(n >= 2 ? n - 1 : std::size_t{1}, d);
  constexpr double kEps = 1e-12;

  // Correlations c_j = x_j' r / n, maintained analytically along the path.
  std::vector<double> c(d);
  for (std::size_t j = 0; j < d; ++j) c[j] = col_dot(x, j, y) / dn;

  std::vector<double> r(y.begin(), y.end());
  std::vector<double> beta(d, 0.0);
  std::vector<int> active;
  std::vector<char> is_active(d, 0);
  // Gram rows x_j' X / n cached for features that ever become active.
  std::vector<std::vector<double>> gram(d);

  auto gram_row = [&](int j) -> const std::vector<double>& {
    if (gram[j].empty()) {
      gram[j].assign(d, 0.0);
      const double* pj = x.data().data() + j;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = pj[i * d];
        if (v == 0.0) continue;
        const auto row = x.row(i);
        for (std::size_t k = 0; k < d; ++k) gram[j][k] += v * row[k];
      }
      for (std::size_t k = 0; k < d; ++k) gram[j][k] /= dn;
    }
    return gram[j];
  };

  LarsPath path;
  auto record_knot = [&](double lambda) {
    PathKnot k;
    k.lambda = lambda;
    k.active = active;
    k.beta = beta;
    double rss = 0.0;
    for (double v : r) rss += v * v;
    k.rss = rss;
    const double df = static_cast<double>(active.size());
    k.aic = dn * std::log(std::max(rss, 1e-300) / dn) + 2.0 * df;
    path.knots.push_back(std::move(k));
  };

  double lambda = 0.0;
  int first = -1;
  for (std::size_t j = 0; j < d; ++j) {
    if (std::abs(c[j]) > lambda) {
      lambda = std::abs(c[j]);
      first = static_cast<int>(j);
    }
  }
  record_knot(lambda);
  if (lambda <= kEps) return path;  // y uncorrelated with every column

  active.push_back(first);
  is_active[first] = 1;

  while (lambda > kEps) {
    if (max_knots > 0 && static_cast<int>(path.knots.size()) >= max_knots) break;

    // Direction: G_AA d = sign(c_A).
    const std::size_t a = active.size();
    Matrix gaa(a, a);
    std::vector<double> s(a);
    for (std::size_t p = 0; p < a; ++p) {
      const auto& rowp = gram_row(active[p]);
      for (std::size_t q = 0; q < a; ++q) gaa(p, q) = rowp[active[q]];
      s[p] = c[active[p]] > 0 ? 1.0 : -1.0;
    }
    std::vector<double> dir;
    if (!cholesky_solve(gaa, s, dir)) {
      path.truncated = true;
      break;
    }

    // Rate of change of every correlation as lambda decreases by delta.
    std::vector<double> rate(d, 0.0);
    for (std::size_t p = 0; p < a; ++p) {
      const auto& rowp = gram_row(active[p]);
      const double dp = dir[p];
      for (std::size_t j = 0; j < d; ++j) rate[j] += rowp[j] * dp;
    }

    // Next event: an inactive feature reaching the boundary |c| = lambda,
    // or an active coefficient crossing zero.
    double step = lambda;  // default: ride out to lambda = 0
    int entering = -1, leaving = -1;
    for (std::size_t j = 0; j < d; ++j) {
      if (is_active[j]) continue;
      const double denom_p = 1.0 - rate[j];
      if (denom_p > kEps) {
        const double delta = (lambda - c[j]) / denom_p;
        if (delta > kEps && delta < step - kEps) {
          step = delta;
          entering = static_cast<int>(j);
          leaving = -1;
        }
      }
      const double denom_m = 1.0 + rate[j];
      if (denom_m > kEps) {
        const double delta = (lambda + c[j]) / denom_m;
        if (delta > kEps && delta < step - kEps) {
          step = delta;
          entering = static_cast<int>(j);
          leaving = -1;
        }
      }
    }
    for (std::size_t p = 0; p < a; ++p) {
      if (dir[p] == 0.0) continue;
      const double delta = -beta[active[p]] / dir[p];
      if (delta > kEps && delta < step - kEps) {
        step = delta;
        leaving = static_cast<int>(p);
        entering = -1;
      }
    }

    // Advance: beta_A += step * dir, residual and correlations follow.
    for (std::size_t p = 0; p < a; ++p) {
      const int j = active[p];
      beta[j] += step * dir[p];
      const double* pj = x.data().data() + j;
      for (std::size_t i = 0; i < n; ++i) r[i] -= pj[i * d] * step * dir[p];
    }
    // Resync correlations from the actual residual: the analytic decrement
    // c_j -= step * rate_j drifts over many knots and breaks the KKT
    // equalities near the end of the path.
    for (std::size_t j = 0; j < d; ++j) c[j] = col_dot(x, j, r) / dn;
    lambda = 0.0;
    for (std::size_t j = 0; j < d; ++j) lambda = std::max(lambda, std::abs(c[j]));

    if (leaving >= 0) {
      const int j = active[leaving];
      beta[j] = 0.0;
      active.erase(active.begin() + leaving);
      is_active[j] = 0;
    } else if (entering >= 0) {
      active.push_back(entering);
      is_active[entering] = 1;
    }

    record_knot(std::max(lambda, 0.0));

    if (entering < 0 && leaving < 0) break;       // rode out to zero
    if (active.size() >= max_active) break;       // saturated design
    if (active.empty()) break;
  }
  return path;
}

double select_lambda_aic(const LarsPath& path, std::size_t n) {
  if (path.knots.empty()) throw Error(Err::EmptyInput, "empty path");
  (void)n;  // AIC values are precomputed with the fitting n
  const PathKnot* best = &path.knots.front();
  for (const auto& k : path.knots) {
    if (k.aic < best->aic) best = &k;  // strict: ties keep the larger lambda
  }
  return best->lambda;
}

namespace {

std::vector<double> column(const Matrix& m, std::size_t j) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, j);
  return out;
}

}  // namespace

std::vector<double> lear_select_lambdas(const Matrix& x, const Matrix& y,
                                        const LearOptions& opts) {
  const Standardizer xs = Standardizer::fit(x);
  const Matrix xz = xs.apply(x);
  std::vector<double> lambdas(y.cols(), 0.0);
  std::vector<std::string> errors(y.cols());
  parallel_for(
      y.cols(),
      [&](std::size_t h) {
        try {
          auto yh = column(y, h);
          const auto ys = ScalarStandardizer::fit(yh);
          for (auto& v : yh) v = ys.apply(v);
          const LarsPath path = lars_path(xz, yh, opts.max_knots);
          lambdas[h] = select_lambda_aic(path, x.rows());
        } catch (const Error& e) {
          errors[h] = e.what();
        }
      },
      opts.parallel);
  for (std::size_t h = 0; h < errors.size(); ++h) {
    if (!errors[h].empty()) {
      throw Error(Err::RankDeficiency,
                  "horizon " + std::to_string(h) + ": " + errors[h]);
    }
  }
  return lambdas;
}

LearModel lear_fit_at(const Matrix& x, const Matrix& y,
                      const std::vector<double>& lambdas, const LearOptions& opts) {
  if (y.cols() != lambdas.size()) throw Error(Err::ShapeMismatch, "lambda count");
  LearModel m;
  m.x_std = Standardizer::fit(x);
  const Matrix xz = m.x_std.apply(x);
  m.y_std.resize(y.cols());
  m.fits.resize(y.cols());
  std::vector<std::string> errors(y.cols());
  parallel_for(
      y.cols(),
      [&](std::size_t h) {
        try {
          auto yh = column(y, h);
          m.y_std[h] = ScalarStandardizer::fit(yh);
          for (auto& v : yh) v = m.y_std[h].apply(v);
          m.fits[h] = lasso_cd(xz, yh, lambdas[h], opts.cd_tol, opts.cd_max_iter);
        } catch (const Error& e) {
          errors[h] = e.what();
        }
      },
      opts.parallel);
  for (std::size_t h = 0; h < errors.size(); ++h) {
    if (!errors[h].empty()) {
      throw Error(Err::NonFiniteInput, "horizon " + std::to_string(h) + ": " + errors[h]);
    }
  }
  return m;
}

LearModel lear_fit(const Matrix& x, const Matrix& y, const LearOptions& opts) {
  if (x.rows() < 50) throw Error(Err::InsufficientData, "lear needs n >= 50");
  return lear_fit_at(x, y, lear_select_lambdas(x, y, opts), opts);
}

std::vector<double> LearModel::predict(std::span<const double> x) const {
  std::vector<double> xz(x.size());
  x_std.apply_row(x, xz);
  std::vector<double> out(fits.size());
  for (std::size_t h = 0; h < fits.size(); ++h) {
    double z = fits[h].intercept;
    for (std::size_t j = 0; j < xz.size(); ++j) z += fits[h].beta[j] * xz[j];
    out[h] = y_std[h].invert(z);
  }
  return out;
}

std::string LearModel::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["x_mean"] = x_std.mean;
  j["x_scale"] = x_std.scale;
  for (std::size_t h = 0; h < fits.size(); ++h) {
    nlohmann::json f;
    f["beta"] = fits[h].beta;
    f["intercept"] = fits[h].intercept;
    f["lambda"] = fits[h].lambda;
    f["y_mean"] = y_std[h].mean;
    f["y_scale"] = y_std[h].scale;
    j["horizons"].push_back(f);
  }
  return j.dump();
}

LearModel LearModel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  LearModel m;
  m.x_std.mean = j["x_mean"].get<std::vector<double>>();
  m.x_std.scale = j["x_scale"].get<std::vector<double>>();
  for (const auto& f : j["horizons"]) {
    LassoFit fit;
    fit.beta = f["beta"].get<std::vector<double>>();
    fit.intercept = f["intercept"].get<double>();
    fit.lambda = f["lambda"].get<double>();
    fit.converged = true;
    m.fits.push_back(std::move(fit));
    ScalarStandardizer ys;
    ys.mean = f["y_mean"].get<double>();
    ys.scale = f["y_scale"].get<double>();
    m.y_std.push_back(ys);
  }
  return m;
}

}  // namespace bmf
