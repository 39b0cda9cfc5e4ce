#include "rotgrad/rpmg.hpp"

#include <string>

namespace rotgrad {

namespace {

constexpr std::size_t kKktDim = 14;

}  // namespace

AmbientVector project_onto_inverse_image(const RawOutput& raw, const AmbientVector& goal,
                                         const Rotation& r_goal) {
  const AmbientVector& x = raw.x;
  switch (raw.rep) {
    case RepKind::Quat4: return x.dot(goal) * goal;
    case RepKind::SixD: {
      const Vec3 u{{x[0], x[1], x[2]}}, v{{x[3], x[4], x[5]}};
      const Vec3 ug{{goal[0], goal[1], goal[2]}}, vg{{goal[3], goal[4], goal[5]}};
      const Vec3 a = dot(u, ug) * ug;
      const Vec3 b = dot(v, ug) * ug + dot(v, vg) * vg;
      return {a[0], a[1], a[2], b[0], b[1], b[2]};
    }
    case RepKind::NineD: {
      const Mat3 m = mat3_from_ambient(x);
      const Mat3& rg = r_goal.matrix();
      const Mat3 sym = 0.5 * (m * rg.transpose() + rg * m.transpose());
      return ambient_from_mat3(sym * rg);
    }
    case RepKind::TenD: return inverse_project_10d(x, rot_to_quat(r_goal)).x_gp;
    case RepKind::Euler3:
    case RepKind::AxisAngle3: return goal;
  }
  throw ConfigError("inverse_project: unknown representation");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Vanilla: return "vanilla";
    case Method::MG: return "mg";
    case Method::PMG: return "pmg";
    case Method::RPMG: return "rpmg";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Vanilla, Method::MG, Method::PMG, Method::RPMG})
    if (name == to_string(m)) return m;
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (valid: vanilla, mg, pmg, rpmg)");
}

void validate(const RpmgParams& p) {
  if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
}

std::array<double, 10> map_quat_to_10d(const UnitQuaternion& q) {
  return params_from_sym4(Mat4::identity() - outer(q.q, q.q));
}

DenseMatrix constraint_matrix_10d(const UnitQuaternion& q) {
  DenseMatrix m(4, 10);
  for (std::size_t p = 0; p < 10; ++p) {
    std::array<double, 10> e{};
    e[p] = 1.0;
    const Vec4 col = sym4_from_params(e) * q.q;
    for (std::size_t r = 0; r < 4; ++r) m(r, p) = col[r];
  }
  return m;
}

TenDProjection inverse_project_10d(const AmbientVector& x, const UnitQuaternion& q_goal) {
  if (x.size() != 10) throw ConfigError("inverse_project_10d: expected 10 entries");
  const DenseMatrix m = constraint_matrix_10d(q_goal);

  DenseMatrix kkt = DenseMatrix::identity(kKktDim);
  for (std::size_t i = 10; i < kKktDim; ++i) kkt(i, i) = 0.0;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 10; ++c) {
      kkt(10 + r, c) = m(r, c);
      kkt(c, 10 + r) = m(r, c);
    }

  // Columns of K: the first ten entries of KKT^-1 e_{10+j}.
  std::array<std::array<double, 4>, 10> k{};
  for (std::size_t j = 0; j < 4; ++j) {
    std::array<double, kKktDim> rhs{};
    rhs[10 + j] = 1.0;
    const std::vector<double> z = solve_dense(kkt, rhs);
    for (std::size_t i = 0; i < 10; ++i) k[i][j] = z[i];
  }

  std::array<double, 10> params{};
  std::copy(x.begin(), x.end(), params.begin());
  const Vec4& q = q_goal.q;
  const Vec4 aq = sym4_from_params(params) * q;

  TenDProjection out;
  double ss = 0.0, st = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    out.s[i] = k[i][0] * q[0] + k[i][1] * q[1] + k[i][2] * q[2] + k[i][3] * q[3];
    out.t[i] = k[i][0] * aq[0] + k[i][1] * aq[1] + k[i][2] * aq[2] + k[i][3] * aq[3];
    ss += out.s[i] * out.s[i];
    st += out.s[i] * out.t[i];
  }
  if (ss < 1e-12) throw DegenerateInput("10d projection: S^T S < 1e-12");
  out.eigenvalue = st / ss;
  out.x_gp = AmbientVector(10);
  for (std::size_t i = 0; i < 10; ++i)
    out.x_gp[i] = x[i] + out.eigenvalue * out.s[i] - out.t[i];
  return out;
}

AmbientVector goal_point(const RawOutput& x, const Rotation& r_goal) {
  AmbientVector g = embed(representation_map(r_goal, x.rep));
  if (x.rep == RepKind::Quat4 && x.x.dot(g) < 0.0) g *= -1.0;
  return g;
}

AmbientVector inverse_project(const RawOutput& x, const Rotation& r_goal) {
  return project_onto_inverse_image(x, goal_point(x, r_goal), r_goal);
}

RpmgTrace rpmg_backward(const RawOutput& x, const Rotation& r, const Loss& loss, double tau,
                        const RpmgParams& params) {
  validate(params);
  const Mat3 dl_dr = euclid_grad(loss, r);
  if (params.method == Method::Vanilla) {
    return {baseline_backward(x, dl_dr), r, {}, {}};
  }

  const Rotation r_goal = goal_rotation(r, riemannian_grad(r, dl_dr), tau);
  const AmbientVector goal = goal_point(x, r_goal);
  if (params.method == Method::MG) return {x.x - goal, r_goal, goal, {}};

  const AmbientVector x_gp = project_onto_inverse_image(x, goal, r_goal);
  if (params.method == Method::PMG || params.lambda == 0.0)
    return {x.x - x_gp, r_goal, goal, x_gp};
  // lambda == 1 is documented as exactly MG.
  if (params.lambda == 1.0) return {x.x - goal, r_goal, goal, x_gp};
  return {x.x - x_gp + params.lambda * (x_gp - goal), r_goal, goal, x_gp};
}

AmbientVector rpmg_gradient(const RawOutput& x, const Rotation& r, const Loss& loss,
                            double tau, const RpmgParams& params) {
  return rpmg_backward(x, r, loss, tau, params).gradient;
}

}  // namespace rotgrad
