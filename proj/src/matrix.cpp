#include "bmf/matrix.hpp"

#include <cmath>

namespace bmf {

double col_dot(const Matrix& x, std::size_t col, std::span<const double> y) {
  double s = 0.0;
  const std::size_t n = x.rows();
  const std::size_t stride = x.cols();
  const double* p = x.data().data() + col;
  for (std::size_t i = 0; i < n; ++i) s += p[i * stride] * y[i];
  return s;
}

bool cholesky_solve(const Matrix& a, std::span<const double> b, std::vector<double>& z,
                    double tol) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s < tol) return false;
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  z.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * z[k];
    z[ii] = s / l(ii, ii);
  }
  return true;
}

}  // namespace bmf
