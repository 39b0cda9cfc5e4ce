// Regularized projective manifold gradient.
//
// Instead of back-propagating a loss through the manifold mapping, the layer
// takes one Riemannian gradient step on SO(3) to a goal rotation R_g, maps it
// to the representation manifold (x̂_g), finds the point x_gp of the inverse
// image of x̂_g closest to the raw output x, and emits
//
//     g = x - x_gp + lambda * (x_gp - x̂_g)
//
// as the gradient w.r.t. x. lambda = 0 is the plain projective gradient (PMG);
// lambda = 1 reduces to the manifold gradient x - x̂_g (MG).
#pragma once

#include <string_view>

#include "rotgrad/representations.hpp"
#include "rotgrad/riemannian.hpp"

namespace rotgrad {

enum class Method { Vanilla, MG, PMG, RPMG };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct RpmgParams {
  double lambda = 0.01;
  Method method = Method::RPMG;
};

void validate(const RpmgParams& p);

/// Parameters of the symmetric matrix I - q q^T; its smallest eigenvector is q.
std::array<double, 10> map_quat_to_10d(const UnitQuaternion& q);

/// x̂_g = psi(R_g) embedded in the ambient space of x. For Quat4 the sign of
/// the quaternion is chosen so that x . x̂_g >= 0.
AmbientVector goal_point(const RawOutput& x, const Rotation& r_goal);

/// Closest point to x in the (relaxed) inverse image of psi(R_g):
///   Quat4: (x . q_g) q_g
///   SixD:  [(u . û_g) û_g, (v . û_g) û_g + (v . v̂_g) v̂_g]
///   NineD: sym(x R_g^T) R_g
///   TenD:  minimum-norm update satisfying A(x_gp) q_g = mu q_g for free mu
///   Euler3 / AxisAngle3: the inverse image is the single point psi(R_g).
AmbientVector inverse_project(const RawOutput& x, const Rotation& r_goal);

/// The projection step alone, for a goal point chosen by the caller. No sign
/// selection: with x . goal < 0 the Quat4 result lies on the opposite ray.
AmbientVector project_onto_inverse_image(const RawOutput& x, const AmbientVector& goal,
                                         const Rotation& r_goal);

// Intermediate quantities of the 10D projection.
struct TenDProjection {
  AmbientVector x_gp;
  double eigenvalue;  // mu with A(x_gp) q_g = mu q_g
  std::array<double, 10> s;
  std::array<double, 10> t;
};

/// Solves the 14x14 KKT system [[I, M^T], [M, 0]] against the four
/// constraint basis vectors to obtain K = M^T (M M^T)^-1, then
/// S = K q_g, T = K A(x) q_g, mu = S.T / S.S and x_gp = x + mu S - T.
TenDProjection inverse_project_10d(const AmbientVector& x, const UnitQuaternion& q_goal);

/// 4x10 matrix M with M dx = A(dx) q.
DenseMatrix constraint_matrix_10d(const UnitQuaternion& q);

// Everything produced by one backward pass, for diagnostics.
struct RpmgTrace {
  AmbientVector gradient;
  Rotation goal;
  AmbientVector goal_point;  // x̂_g (empty for Vanilla)
  AmbientVector projection;  // x_gp (empty for Vanilla and MG)
};

/// Gradient w.r.t. x for the selected method. R must equal
/// baseline_rotation(x).
RpmgTrace rpmg_backward(const RawOutput& x, const Rotation& r, const Loss& loss, double tau,
                        const RpmgParams& params);

AmbientVector rpmg_gradient(const RawOutput& x, const Rotation& r, const Loss& loss,
                            double tau, const RpmgParams& params);

}  // namespace rotgrad
