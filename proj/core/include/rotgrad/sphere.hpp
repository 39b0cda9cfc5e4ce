// Unit-vector regression on S^2 with the same projective gradient layer.
#pragma once

#include "rotgrad/lin.hpp"

namespace rotgrad {

/// x / |x|; throws DegenerateInput when |x| <= 1e-8.
Vec3 s2_map(const Vec3& x);

/// cos(|v|) x̂ + sin(|v|) v / |v|, with v tangent at x̂.
Vec3 s2_exp(const Vec3& base, const Vec3& v);

/// Riemannian gradient of |x̂ - x̂_gt|^2 at x̂: 2((x̂ . x̂_gt) x̂ - x̂_gt).
Vec3 s2_riemannian_grad(const Vec3& x_hat, const Vec3& target);

/// The same gradient assembled from an orthonormal tangent basis (c1, c2):
/// sum_i (2 (x̂ - x̂_gt) . c_i) c_i.
Vec3 s2_riemannian_grad_in_basis(const Vec3& x_hat, const Vec3& target, const Vec3& c1,
                                 const Vec3& c2);

struct S2Diagnostics {
  long antipodal = 0;  // targets found opposite the prediction (zero gradient)
};

/// x − x_gp + λ(x_gp − x̂_g) with x̂_g = s2_exp(x̂, −τ grad) and
/// x_gp = (x . x̂_g) x̂_g.
Vec3 s2_rpmg_gradient(const Vec3& x, const Vec3& target, double tau, double lambda,
                      S2Diagnostics* diagnostics = nullptr);

}  // namespace rotgrad
