#include "rotgrad/lin.hpp"

#include <numeric>
#include <utility>

namespace rotgrad {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kOffDiagTol = 1e-13;

// Any unit vector orthogonal to a unit vector n.
Vec3 any_orthogonal(const Vec3& n) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (std::abs(n[i]) < std::abs(n[k])) k = i;
  Vec3 axis;
  axis[k] = 1.0;
  Vec3 w = cross(n, axis);
  return w / norm(w);
}

}  // namespace

double det(const Mat4& m) {
  // Gaussian elimination with partial pivoting on a copy.
  Mat4 a = m;
  double d = 1.0;
  for (std::size_t k = 0; k < 4; ++k) {
    std::size_t p = k;
    for (std::size_t r = k + 1; r < 4; ++r)
      if (std::abs(a(r, k)) > std::abs(a(p, k))) p = r;
    if (a(p, k) == 0.0) return 0.0;
    if (p != k) {
      for (std::size_t c = 0; c < 4; ++c) std::swap(a(p, c), a(k, c));
      d = -d;
    }
    d *= a(k, k);
    for (std::size_t r = k + 1; r < 4; ++r) {
      const double f = a(r, k) / a(k, k);
      for (std::size_t c = k; c < 4; ++c) a(r, c) -= f * a(k, c);
    }
  }
  return d;
}

SvdResult svd3(const Mat3& m) {
  if (!all_finite(m)) throw NumericFailure("svd3: non-finite input");

  // Orthogonalize the columns of A = M V by plane rotations applied on the
  // right; V accumulates the rotations.
  Mat3 a = m;
  Mat3 v = Mat3::identity();
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p < 2; ++p) {
      for (std::size_t q = p + 1; q < 3; ++q) {
        const Vec3 ap = a.col(p);
        const Vec3 aq = a.col(q);
        const double alpha = dot(ap, ap);
        const double beta = dot(aq, aq);
        const double gamma = dot(ap, aq);
        if (gamma == 0.0 || std::abs(gamma) <= kOffDiagTol * std::sqrt(alpha * beta))
          continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        a.set_col(p, c * ap - s * aq);
        a.set_col(q, s * ap + c * aq);
        const Vec3 vp = v.col(p);
        const Vec3 vq = v.col(q);
        v.set_col(p, c * vp - s * vq);
        v.set_col(q, s * vp + c * vq);
      }
    }
  }
  if (!converged) throw NumericFailure("svd3: Jacobi sweeps did not converge");

  std::array<std::size_t, 3> order{0, 1, 2};
  Vec3 norms{{norm(a.col(0)), norm(a.col(1)), norm(a.col(2))}};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return norms[i] > norms[j]; });

  SvdResult out;
  for (std::size_t k = 0; k < 3; ++k) {
    out.sigma[k] = norms[order[k]];
    out.V.set_col(k, v.col(order[k]));
  }

  // Columns with negligible singular value carry no direction; complete them
  // to an orthonormal frame instead.
  const double cutoff = 1e-14 * out.sigma[0];
  std::size_t rank = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (out.sigma[k] > cutoff && out.sigma[k] > 0.0) {
      out.U.set_col(k, a.col(order[k]) / out.sigma[k]);
      ++rank;
    }
  }
  if (rank == 0) {
    out.U = Mat3::identity();
  } else if (rank == 1) {
    const Vec3 u0 = out.U.col(0);
    const Vec3 u1 = any_orthogonal(u0);
    out.U.set_col(1, u1);
    out.U.set_col(2, cross(u0, u1));
  } else if (rank == 2) {
    out.U.set_col(2, cross(out.U.col(0), out.U.col(1)));
  }
  return out;
}

EigResult eig_sym4(const Mat4& input) {
  if (!all_finite(input)) throw NumericFailure("eig_sym4: non-finite input");
  Mat4 a = 0.5 * (input + input.transpose());
  Mat4 v = Mat4::identity();

  const double scale = frobenius_norm(a);
  auto off_norm = [&a] {
    double s = 0.0;
    for (std::size_t p = 0; p < 4; ++p)
      for (std::size_t q = p + 1; q < 4; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  bool converged = scale == 0.0 || off_norm() <= kOffDiagTol * scale;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t q = p + 1; q < 4; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (p, q) plane rotation.
        for (std::size_t k = 0; k < 4; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < 4; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < 4; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_norm() <= kOffDiagTol * scale;
  }
  if (!converged) throw NumericFailure("eig_sym4: Jacobi sweeps did not converge");

  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigResult out;
  for (std::size_t k = 0; k < 4; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.set_col(k, v.col(order[k]));
  }
  return out;
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows > kMaxDim || cols > kMaxDim)
    throw ConfigError("DenseMatrix: dimensions above 14 are not supported");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) y[r] += (*this)(r, c) * x[c];
  return y;
}

std::vector<double> solve_dense(const DenseMatrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw ConfigError("solve_dense: dimension mismatch");

  DenseMatrix m = a;
  std::vector<double> x(b.begin(), b.end());
  double scale = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      if (!std::isfinite(m(r, c))) throw NumericFailure("solve_dense: non-finite matrix");
      scale = std::max(scale, std::abs(m(r, c)));
    }
  const double pivot_tol = 1e-12 * scale;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(m(r, k)) > std::abs(m(p, k))) p = r;
    if (std::abs(m(p, k)) <= pivot_tol || scale == 0.0)
      throw SingularSystem("solve_dense: matrix is singular to working precision");
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m(p, c), m(k, c));
      std::swap(x[p], x[k]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = m(r, k) / m(k, k);
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) m(r, c) -= f * m(k, c);
      x[r] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = x[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= m(k, c) * x[c];
    x[k] = s / m(k, k);
  }
  return x;
}

}  // namespace rotgrad
