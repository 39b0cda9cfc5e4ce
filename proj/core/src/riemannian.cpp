#include "rotgrad/riemannian.hpp"

#include <limits>

namespace rotgrad {

namespace {

struct Match {
  std::size_t index;
  double dist2;
};

Match nearest(const Vec3& p, const PointSet& set) {
  Match best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vec3 d = p - set[i];
    const double d2 = dot(d, d);
    if (d2 < best.dist2) best = {i, d2};
  }
  return best;
}

// R^T x for a general 3x3 matrix R.
Vec3 apply_transpose(const Mat3& r, const Vec3& x) { return r.transpose() * x; }

void require_points(const PointSet& s, const char* what) {
  if (s.empty()) throw ConfigError(std::string(what) + ": point set is empty");
}

}  // namespace

double loss_value(const Loss& loss, const Rotation& rot) {
  const Mat3& r = rot.matrix();
  if (const auto* l2 = std::get_if<L2Loss>(&loss)) {
    const Mat3 d = r - l2->target.matrix();
    return inner(d, d);
  }
  if (const auto* geo = std::get_if<GeodesicLoss>(&loss)) {
    const double t = geodesic_distance(rot, geo->target);
    return t * t;
  }
  if (const auto* flow = std::get_if<FlowLoss>(&loss)) {
    const Mat3 d = r - flow->target.matrix();
    double s = 0.0;
    for (const Vec3& p : flow->points) {
      const Vec3 e = d * p;
      s += dot(e, e);
    }
    return s;
  }
  const auto& ch = std::get<ChamferLoss>(loss);
  require_points(ch.canonical, "chamfer");
  require_points(ch.observed, "chamfer");
  PointSet back;
  back.reserve(ch.observed.size());
  for (const Vec3& x : ch.observed) back.push_back(apply_transpose(r, x));
  double forward = 0.0;
  for (const Vec3& z : ch.canonical) forward += nearest(z, back).dist2;
  double reverse = 0.0;
  for (const Vec3& y : back) reverse += nearest(y, ch.canonical).dist2;
  return forward / static_cast<double>(ch.canonical.size()) +
         reverse / static_cast<double>(back.size());
}

Mat3 euclid_grad(const Loss& loss, const Rotation& rot) {
  const Mat3& r = rot.matrix();
  if (const auto* l2 = std::get_if<L2Loss>(&loss)) return 2.0 * (r - l2->target.matrix());

  if (const auto* geo = std::get_if<GeodesicLoss>(&loss)) {
    // theta = acos((tr(R_gt^T R) - 1) / 2), so d(theta^2)/dR = -(theta / sin theta) R_gt.
    const double t = geodesic_distance(rot, geo->target);
    const double ratio = t < 1e-6 ? 1.0 + t * t / 6.0 : t / std::sin(t);
    return -ratio * geo->target.matrix();
  }

  if (const auto* flow = std::get_if<FlowLoss>(&loss)) {
    Mat3 xxt;
    for (const Vec3& p : flow->points) xxt += outer(p, p);
    return 2.0 * ((r - flow->target.matrix()) * xxt);
  }

  const auto& ch = std::get<ChamferLoss>(loss);
  require_points(ch.canonical, "chamfer");
  require_points(ch.observed, "chamfer");
  PointSet back;
  back.reserve(ch.observed.size());
  for (const Vec3& x : ch.observed) back.push_back(apply_transpose(r, x));

  // For y = R^T x and f = |y - z|^2: df/dR = 2 x (y - z)^T.
  Mat3 g;
  const double wf = 1.0 / static_cast<double>(ch.canonical.size());
  for (const Vec3& z : ch.canonical) {
    const Match m = nearest(z, back);
    g += (2.0 * wf) * outer(ch.observed[m.index], back[m.index] - z);
  }
  const double wr = 1.0 / static_cast<double>(back.size());
  for (std::size_t j = 0; j < back.size(); ++j) {
    const Match m = nearest(back[j], ch.canonical);
    g += (2.0 * wr) * outer(ch.observed[j], back[j] - ch.canonical[m.index]);
  }
  return g;
}

TangentSO3 riemannian_grad(const Rotation& r, const Mat3& dl_dr) {
  TangentSO3 out;
  for (std::size_t k = 0; k < 3; ++k) {
    Vec3 e;
    e[k] = 1.0;
    out.v[k] = inner(dl_dr, r.matrix() * hat(e));
  }
  return out;
}

Rotation goal_rotation(const Rotation& r, const TangentSO3& grad, double tau) {
  return exp_so3(r, TangentSO3{-tau * grad.v});
}

void validate(const TauSchedule& s) {
  if (!(s.tau_init > 0.0) || !(s.tau_init <= s.tau_converge))
    throw ConfigError("tau schedule requires 0 < tau_init <= tau_converge");
  if (s.n_steps < 1) throw ConfigError("tau schedule requires n_steps >= 1");
  if (s.total_iters < 1) throw ConfigError("tau schedule requires total_iters >= 1");
}

double tau_at(const TauSchedule& s, long iter) {
  if (s.n_steps <= 1) return s.tau_converge;
  const long step = iter * s.n_steps / std::max(s.total_iters, 1L);
  const double tau = s.tau_init + static_cast<double>(step) * (s.tau_converge - s.tau_init) /
                                      static_cast<double>(s.n_steps - 1);
  return std::min(tau, s.tau_converge);
}

double tau_converge_for(const Loss& loss) {
  if (std::holds_alternative<L2Loss>(loss)) return 0.25;
  if (std::holds_alternative<GeodesicLoss>(loss)) return 0.5;
  throw ConfigError(
      "no analytic tau_converge for flow or chamfer losses; supply a constant tau");
}

}  // namespace rotgrad
