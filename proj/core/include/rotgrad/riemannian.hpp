// Losses on SO(3), their Euclidean and Riemannian gradients, the goal
// rotation reached by one Riemannian gradient step, and the step-size
// schedule.
#pragma once

#include <variant>
#include <vector>

#include "rotgrad/so3.hpp"

namespace rotgrad {

using PointSet = std::vector<Vec3>;

// ||R - R_gt||_F^2
struct L2Loss {
  Rotation target;
};

// theta^2 with theta the geodesic distance to the target.
struct GeodesicLoss {
  Rotation target;
};

// ||R X - R_gt X||_F^2 over the columns of X.
struct FlowLoss {
  Rotation target;
  PointSet points;
};

// Symmetric Chamfer distance between the canonical set Z and R^T X_obs, each
// direction averaged over its points.
struct ChamferLoss {
  PointSet canonical;
  PointSet observed;
};

using Loss = std::variant<L2Loss, GeodesicLoss, FlowLoss, ChamferLoss>;

double loss_value(const Loss& loss, const Rotation& r);

/// dL/dR as a 3x3 matrix. Chamfer correspondences are frozen at R.
Mat3 euclid_grad(const Loss& loss, const Rotation& r);

/// Components <dL/dR, R hat(e_k)>, k = x, y, z.
TangentSO3 riemannian_grad(const Rotation& r, const Mat3& dl_dr);

/// exp_so3(R, -tau * grad).
Rotation goal_rotation(const Rotation& r, const TangentSO3& grad, double tau);

struct TauSchedule {
  double tau_init = 0.05;
  double tau_converge = 0.25;
  int n_steps = 10;
  long total_iters = 1;
};

void validate(const TauSchedule& s);

/// Staircase: step s = floor(iter * n_steps / total_iters) moves tau linearly
/// from tau_init (s = 0) to tau_converge (s = n_steps - 1).
double tau_at(const TauSchedule& schedule, long iter);

/// Small-angle step size landing on the target: 1/4 for L2, 1/2 for
/// geodesic. Throws ConfigError for losses without an analytic value.
double tau_converge_for(const Loss& loss);

}  // namespace rotgrad
