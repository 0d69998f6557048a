/*
 * Copyright 2026 The WCT2 Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wct2/errors.hpp"

namespace wct2 {

/// Square double matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const { return n_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
  const double* row(std::size_t r) const { return data_.data() + r * n_; }
  double* row(std::size_t r) { return data_.data() + r * n_; }

  Matrix operator*(const Matrix& o) const {
    detail::require(n_ == o.n_, "Matrix: size mismatch");
    Matrix r(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k) {
        const double a = (*this)(i, k);
        if (a == 0.0) continue;
        const double* src = o.row(k);
        double* dst = r.row(i);
        for (std::size_t j = 0; j < n_; ++j) dst[j] += a * src[j];
      }
    return r;
  }

  double frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  double max_asymmetry() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  detail::require(a.size() == b.size(), "frobenius_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a(i, j) - b(i, j);
      s += d * d;
    }
  return std::sqrt(s);
}

struct SymmetricEigen {
  /// Nonincreasing.
  std::vector<double> values;
  /// Column k of vectors (stored column-major, n x k) pairs with values[k].
  std::vector<double> vectors;
  std::size_t dim = 0;

  std::size_t rank() const { return values.size(); }
  double vec(std::size_t row, std::size_t k) const { return vectors[k * dim + row]; }
  const double* column(std::size_t k) const { return vectors.data() + k * dim; }
};

namespace detail {

// Householder reduction to tridiagonal form followed by implicit QL
// (EISPACK tred2/tql2). V is column-major so that the O(n^3) inner loops
// walk contiguous memory.
class TridiagonalQL {
 public:
  explicit TridiagonalQL(const Matrix& a) : n_(a.size()), V_(n_ * n_), d_(n_), e_(n_) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) V(i, j) = a(i, j);
    if (n_ == 0) return;
    tred2();
    tql2();
  }

  const std::vector<double>& values() const { return d_; }
  double vector_entry(std::size_t row, std::size_t k) const { return V_[k * n_ + row]; }

 private:
  double& V(std::size_t r, std::size_t c) { return V_[c * n_ + r]; }

  void tred2() {
    const std::size_t n = n_;
    for (std::size_t j = 0; j < n; ++j) d_[j] = V(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
      double scale = 0.0, h = 0.0;
      for (std::size_t k = 0; k < i; ++k) scale += std::abs(d_[k]);
      if (scale == 0.0) {
        e_[i] = d_[i - 1];
        for (std::size_t j = 0; j < i; ++j) {
          d_[j] = V(i - 1, j);
          V(i, j) = 0.0;
          V(j, i) = 0.0;
        }
      } else {
        for (std::size_t k = 0; k < i; ++k) {
          d_[k] /= scale;
          h += d_[k] * d_[k];
        }
        double f = d_[i - 1];
        double g = std::sqrt(h);
        if (f > 0) g = -g;
        e_[i] = scale * g;
        h -= f * g;
        d_[i - 1] = f - g;
        for (std::size_t j = 0; j < i; ++j) e_[j] = 0.0;

        for (std::size_t j = 0; j < i; ++j) {
          f = d_[j];
          V(j, i) = f;
          g = e_[j] + V(j, j) * f;
          double* colj = &V(0, j);
          for (std::size_t k = j + 1; k <= i - 1; ++k) {
            g += colj[k] * d_[k];
            e_[k] += colj[k] * f;
          }
          e_[j] = g;
        }
        f = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
          e_[j] /= h;
          f += e_[j] * d_[j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j < i; ++j) e_[j] -= hh * d_[j];
        for (std::size_t j = 0; j < i; ++j) {
          f = d_[j];
          g = e_[j];
          double* colj = &V(0, j);
          for (std::size_t k = j; k <= i - 1; ++k) colj[k] -= (f * e_[k] + g * d_[k]);
          d_[j] = V(i - 1, j);
          V(i, j) = 0.0;
        }
      }
      d_[i] = h;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
      V(n - 1, i) = V(i, i);
      V(i, i) = 1.0;
      const double h = d_[i + 1];
      if (h != 0.0) {
        const double* coli1 = &V(0, i + 1);
        for (std::size_t k = 0; k <= i; ++k) d_[k] = coli1[k] / h;
        for (std::size_t j = 0; j <= i; ++j) {
          double* colj = &V(0, j);
          double g = 0.0;
          for (std::size_t k = 0; k <= i; ++k) g += coli1[k] * colj[k];
          for (std::size_t k = 0; k <= i; ++k) colj[k] -= g * d_[k];
        }
      }
      for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      d_[j] = V(n - 1, j);
      V(n - 1, j) = 0.0;
    }
    V(n - 1, n - 1) = 1.0;
    e_[0] = 0.0;
  }

  void tql2() {
    const std::size_t n = n_;
    for (std::size_t i = 1; i < n; ++i) e_[i - 1] = e_[i];
    e_[n - 1] = 0.0;

    double f = 0.0, tst1 = 0.0;
    const double eps = std::ldexp(1.0, -52);
    for (std::size_t l = 0; l < n; ++l) {
      tst1 = std::max(tst1, std::abs(d_[l]) + std::abs(e_[l]));
      std::size_t m = l;
      while (m < n) {
        if (std::abs(e_[m]) <= eps * tst1) break;
        ++m;
      }
      if (m > l) {
        int iter = 0;
        do {
          if (++iter > 60) throw std::runtime_error("eigendecomposition did not converge");
          double g = d_[l];
          double p = (d_[l + 1] - g) / (2.0 * e_[l]);
          double r = std::hypot(p, 1.0);
          if (p < 0) r = -r;
          d_[l] = e_[l] / (p + r);
          d_[l + 1] = e_[l] * (p + r);
          const double dl1 = d_[l + 1];
          double h = g - d_[l];
          for (std::size_t i = l + 2; i < n; ++i) d_[i] -= h;
          f += h;

          p = d_[m];
          double c = 1.0, c2 = c, c3 = c;
          const double el1 = e_[l + 1];
          double s = 0.0, s2 = 0.0;
          for (std::size_t ii = m; ii-- > l;) {
            c3 = c2;
            c2 = c;
            s2 = s;
            g = c * e_[ii];
            h = c * p;
            r = std::hypot(p, e_[ii]);
            e_[ii + 1] = s * r;
            s = e_[ii] / r;
            c = p / r;
            p = c * d_[ii] - s * g;
            d_[ii + 1] = h + s * (c * g + s * d_[ii]);
            double* ci = &V(0, ii);
            double* ci1 = &V(0, ii + 1);
            for (std::size_t k = 0; k < n; ++k) {
              h = ci1[k];
              ci1[k] = s * ci[k] + c * h;
              ci[k] = c * ci[k] - s * h;
            }
          }
          p = -s * s2 * c3 * el1 * e_[l] / dl1;
          e_[l] = s * p;
          d_[l] = c * p;
        } while (std::abs(e_[l]) > eps * tst1);
      }
      d_[l] += f;
      e_[l] = 0.0;
    }
  }

  std::size_t n_;
  std::vector<double> V_;
  std::vector<double> d_;
  std::vector<double> e_;
};

}  // namespace detail

/// Eigendecomposition of a symmetric matrix. Eigenpairs with eigenvalue
/// <= floor are dropped; the rest are returned in nonincreasing order.
inline SymmetricEigen symmetric_eigen(const Matrix& a, double floor = -1e300) {
  detail::TridiagonalQL ql(a);
  const std::size_t n = a.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& vals = ql.values();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return vals[x] > vals[y]; });

  SymmetricEigen out;
  out.dim = n;
  for (std::size_t idx : order) {
    if (!(vals[idx] > floor)) continue;
    out.values.push_back(vals[idx]);
    for (std::size_t r = 0; r < n; ++r) out.vectors.push_back(ql.vector_entry(r, idx));
  }
  return out;
}

/// E * diag(f(lambda)) * E^T over the retained eigenpairs.
template <typename Fn>
Matrix spectral_function(const SymmetricEigen& eig, Fn&& fn) {
  const std::size_t n = eig.dim;
  Matrix out(n);
  for (std::size_t k = 0; k < eig.rank(); ++k) {
    const double s = fn(eig.values[k]);
    const double* v = eig.column(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = s * v[i];
      double* dst = out.row(i);
      for (std::size_t j = 0; j < n; ++j) dst[j] += vi * v[j];
    }
  }
  return out;
}

}  // namespace wct2
