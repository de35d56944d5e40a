#pragma once

// Plain-vector reference implementations used as test oracles. Kept free of
// Eigen so that they do not share code paths with the library.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using Vector = std::vector<double>;

inline Matrix identity(std::size_t d) {
  Matrix m(d, Vector(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) m[i][i] = 1.0;
  return m;
}

// Gauss-Jordan with partial pivoting.
inline Matrix inverse(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv = identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double p = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= p;
      inv[col][k] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

inline Vector multiply(const Matrix& m, const Vector& v) {
  Vector out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// (I + X^T X)^{-1} X^T r
inline Vector ridge(const std::vector<Vector>& xs, const Vector& rs, std::size_t d) {
  Matrix a = identity(d);
  Vector b(d, 0.0);
  for (std::size_t t = 0; t < xs.size(); ++t)
    for (std::size_t i = 0; i < d; ++i) {
      b[i] += rs[t] * xs[t][i];
      for (std::size_t j = 0; j < d; ++j) a[i][j] += xs[t][i] * xs[t][j];
    }
  return multiply(inverse(a), b);
}

}  // namespace oracle
