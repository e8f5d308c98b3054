#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <string>

#include "bmf/matrix.hpp"

namespace bmf {

// Column-wise z-score state. Scales use the population standard deviation
// and are floored so constant columns map to zero, not NaN.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static constexpr double kScaleFloor = 1e-8;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  void apply_row(std::span<const double> in, std::span<double> out) const;
  Matrix invert(const Matrix& x) const;
};

// Scalar variant for a single target column.
struct ScalarStandardizer {
  double mean = 0.0;
  double scale = 1.0;

  static ScalarStandardizer fit(std::span<const double> y);
  double apply(double v) const { return (v - mean) / scale; }
  double invert(double v) const { return v * scale + mean; }
};

struct LassoFit {
  std::vector<double> beta;   // coefficients in standardized space
  double intercept = 0.0;
  double lambda = 0.0;
  int n_iter = 0;
  bool converged = false;
};

// Objective: (1/2n) ||y - X b||^2 + lambda * ||b||_1 with X standardized
// and y centered. Cyclic coordinate descent with soft-threshold updates;
// stops when the largest coordinate change in a sweep falls below tol.
LassoFit lasso_cd(const Matrix& x, std::span<const double> y, double lambda,
                  double tol = 1e-4, int max_iter = 1000,
                  const std::vector<double>* warm_start = nullptr);

double lasso_objective(const Matrix& x, std::span<const double> y,
                       std::span<const double> beta, double lambda);

// Largest lambda with a nonzero solution: max_j |x_j' y| / n.
double lasso_lambda_max(const Matrix& x, std::span<const double> y);

struct PathKnot {
  double lambda = 0.0;
  std::vector<int> active;      // entry order
  std::vector<double> beta;
  double rss = 0.0;
  double aic = 0.0;
};

struct LarsPath {
  std::vector<PathKnot> knots;  // lambda strictly decreasing
  bool truncated = false;       // rank deficiency stopped the path early
};

// LASSO-modified LARS homotopy: traces the piecewise-linear solution path
// from lambda_max down, adding one variable per knot and dropping any whose
// coefficient crosses zero. Each knot satisfies the LASSO KKT conditions at
// its lambda.
LarsPath lars_path(const Matrix& x, std::span<const double> y, int max_knots = 0);

// AIC(lambda) = n ln(RSS/n) + 2 df with df = nonzero count; ties resolve to
// the larger lambda (the sparser model).
double select_lambda_aic(const LarsPath& path, std::size_t n);

// LASSO Estimated AR: 16 independent per-horizon LASSO regressions on a
// shared standardized feature matrix. Lambda comes from the LARS path and
// in-sample AIC; the final coefficients from a coordinate-descent refit.
struct LearOptions {
  int max_knots = 100;
  double cd_tol = 1e-4;
  int cd_max_iter = 1000;
  bool parallel = true;
};

struct LearModel {
  Standardizer x_std;
  std::vector<ScalarStandardizer> y_std;  // one per horizon
  std::vector<LassoFit> fits;             // one per horizon

  std::vector<double> predict(std::span<const double> x) const;

  std::string to_json() const;
  static LearModel from_json(const std::string& text);
};

// Per-horizon lambdas chosen by LARS + AIC on (X, Y).
std::vector<double> lear_select_lambdas(const Matrix& x, const Matrix& y,
                                        const LearOptions& opts = {});

// Coordinate-descent fit at the given per-horizon lambdas.
LearModel lear_fit_at(const Matrix& x, const Matrix& y,
                      const std::vector<double>& lambdas,
                      const LearOptions& opts = {});

// Full fit: select lambdas, then refit.
LearModel lear_fit(const Matrix& x, const Matrix& y, const LearOptions& opts = {});

}  // namespace bmf
