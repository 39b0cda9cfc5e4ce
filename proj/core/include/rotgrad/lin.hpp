// Small fixed-size dense linear algebra used throughout rotgrad.
//
// Vectors and matrices are value types backed by std::array; the only
// dynamically sized type is DenseMatrix, which exists for the (at most 14x14)
// systems solved by solve_dense.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "rotgrad/errors.hpp"

namespace rotgrad {

template <std::size_t N>
struct Vec {
  std::array<double, N> v{};

  static constexpr std::size_t size() { return N; }

  constexpr double& operator[](std::size_t i) { return v[i]; }
  constexpr const double& operator[](std::size_t i) const { return v[i]; }

  auto begin() { return v.begin(); }
  auto end() { return v.end(); }
  auto begin() const { return v.begin(); }
  auto end() const { return v.end(); }

  Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] -= o.v[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (auto& e : v) e *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator/(Vec a, double s) { return a *= (1.0 / s); }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend bool operator==(const Vec&, const Vec&) = default;
};

using Vec3 = Vec<3>;
using Vec4 = Vec<4>;

template <std::size_t N>
double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
           a[0] * b[1] - a[1] * b[0]}};
}

// Row-major R x C matrix.
template <std::size_t R, std::size_t C>
struct Mat {
  std::array<double, R * C> a{};

  static constexpr std::size_t rows() { return R; }
  static constexpr std::size_t cols() { return C; }

  static Mat zero() { return Mat{}; }
  static Mat identity()
    requires(R == C)
  {
    Mat m;
    for (std::size_t i = 0; i < R; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat diag(const Vec<R>& d)
    requires(R == C)
  {
    Mat m;
    for (std::size_t i = 0; i < R; ++i) m(i, i) = d[i];
    return m;
  }
  static Mat from_rows(std::initializer_list<double> values) {
    Mat m;
    std::copy_n(values.begin(), std::min(values.size(), R * C), m.a.begin());
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return a[r * C + c]; }
  const double& operator()(std::size_t r, std::size_t c) const {
    return a[r * C + c];
  }

  Vec<R> col(std::size_t c) const {
    Vec<R> out;
    for (std::size_t r = 0; r < R; ++r) out[r] = (*this)(r, c);
    return out;
  }
  Vec<C> row(std::size_t r) const {
    Vec<C> out;
    for (std::size_t c = 0; c < C; ++c) out[c] = (*this)(r, c);
    return out;
  }
  void set_col(std::size_t c, const Vec<R>& x) {
    for (std::size_t r = 0; r < R; ++r) (*this)(r, c) = x[r];
  }

  Mat<C, R> transpose() const {
    Mat<C, R> t;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  double trace() const
    requires(R == C)
  {
    double s = 0.0;
    for (std::size_t i = 0; i < R; ++i) s += (*this)(i, i);
    return s;
  }

  Mat& operator+=(const Mat& o) {
    for (std::size_t i = 0; i < R * C; ++i) a[i] += o.a[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t i = 0; i < R * C; ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat& operator*=(double s) {
    for (auto& e : a) e *= s;
    return *this;
  }
  friend Mat operator+(Mat x, const Mat& y) { return x += y; }
  friend Mat operator-(Mat x, const Mat& y) { return x -= y; }
  friend Mat operator*(Mat x, double s) { return x *= s; }
  friend Mat operator*(double s, Mat x) { return x *= s; }
  friend Mat operator-(Mat x) { return x *= -1.0; }
  friend bool operator==(const Mat&, const Mat&) = default;
};

using Mat3 = Mat<3, 3>;
using Mat4 = Mat<4, 4>;

template <std::size_t R, std::size_t K, std::size_t C>
Mat<R, C> operator*(const Mat<R, K>& x, const Mat<K, C>& y) {
  Mat<R, C> out;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t k = 0; k < K; ++k) {
      const double xr = x(r, k);
      for (std::size_t c = 0; c < C; ++c) out(r, c) += xr * y(k, c);
    }
  return out;
}

template <std::size_t R, std::size_t C>
Vec<R> operator*(const Mat<R, C>& m, const Vec<C>& x) {
  Vec<R> out;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) out[r] += m(r, c) * x[c];
  return out;
}

template <std::size_t R, std::size_t C>
Mat<R, C> outer(const Vec<R>& x, const Vec<C>& y) {
  Mat<R, C> m;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) m(r, c) = x[r] * y[c];
  return m;
}

// Frobenius inner product.
template <std::size_t R, std::size_t C>
double inner(const Mat<R, C>& x, const Mat<R, C>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < R * C; ++i) s += x.a[i] * y.a[i];
  return s;
}

template <std::size_t R, std::size_t C>
double frobenius_norm(const Mat<R, C>& m) {
  return std::sqrt(inner(m, m));
}

inline double det(const Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

double det(const Mat4& m);

template <std::size_t N>
bool all_finite(std::span<const double, N> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x); });
}

template <std::size_t R, std::size_t C>
bool all_finite(const Mat<R, C>& m) {
  return all_finite(std::span<const double, R * C>(m.a));
}

/// Singular value decomposition of a 3x3 matrix, M = U * diag(sigma) * V^T.
/// sigma is sorted descending and non-negative; U and V are orthogonal.
struct SvdResult {
  Mat3 U;
  Vec3 sigma;
  Mat3 V;
};

/// Eigendecomposition of a symmetric 4x4 matrix. values ascend; column i of
/// vectors is the unit eigenvector of values[i].
struct EigResult {
  Vec4 values;
  Mat4 vectors;
};

/// One-sided (Hestenes) Jacobi SVD. Throws NumericFailure if the sweep cap is
/// reached or the input is not finite.
SvdResult svd3(const Mat3& m);

/// Cyclic Jacobi eigensolver. Input is symmetrized on entry.
EigResult eig_sym4(const Mat4& a);

// Dynamically sized, row-major matrix for dense solves up to 14x14.
class DenseMatrix {
 public:
  static constexpr std::size_t kMaxDim = 14;

  DenseMatrix(std::size_t rows, std::size_t cols);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::vector<double> multiply(std::span<const double> x) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Solves A x = b by Gaussian elimination with partial pivoting. Throws
/// SingularSystem when a pivot falls below 1e-12 relative to the largest
/// entry of A.
std::vector<double> solve_dense(const DenseMatrix& a, std::span<const double> b);

}  // namespace rotgrad
