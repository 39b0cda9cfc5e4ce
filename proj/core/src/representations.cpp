#include "rotgrad/representations.hpp"

#include <string>

namespace rotgrad {

namespace {

constexpr double kNormFloor = 1e-8;
constexpr double kEigengapFloor = 1e-10;
constexpr double kFdStep = 1e-5;

Vec3 head3(const AmbientVector& x, std::size_t offset) {
  return {{x[offset], x[offset + 1], x[offset + 2]}};
}

void require_dim(const RawOutput& x) {
  if (x.x.size() != ambient_dim(x.rep))
    throw ConfigError("raw output has " + std::to_string(x.x.size()) +
                      " entries, representation " + std::string(to_string(x.rep)) +
                      " expects " + std::to_string(ambient_dim(x.rep)));
  if (!x.x.is_finite()) throw DegenerateInput("raw output is not finite");
}

Mat3 dquat_to_rot(const Vec4& q, std::size_t i) {
  const double q0 = q[0], q1 = q[1], q2 = q[2], q3 = q[3];
  switch (i) {
    case 0:
      return Mat3::from_rows({4 * q0, -2 * q3, 2 * q2, 2 * q3, 4 * q0, -2 * q1,
                              -2 * q2, 2 * q1, 4 * q0});
    case 1:
      return Mat3::from_rows({4 * q1, 2 * q2, 2 * q3, 2 * q2, 0, -2 * q0,
                              2 * q3, 2 * q0, 0});
    case 2:
      return Mat3::from_rows({0, 2 * q1, 2 * q0, 2 * q1, 4 * q2, 2 * q3,
                              -2 * q0, 2 * q3, 0});
    default:
      return Mat3::from_rows({0, -2 * q0, 2 * q1, 2 * q0, 0, 2 * q2,
                              2 * q1, 2 * q2, 4 * q3});
  }
}

AmbientVector backward_quat(const AmbientVector& x, const Mat3& g) {
  const Vec4 raw{{x[0], x[1], x[2], x[3]}};
  const double n = norm(raw);
  const Vec4 q = raw / n;
  Vec4 gq;
  for (std::size_t i = 0; i < 4; ++i) gq[i] = inner(g, dquat_to_rot(q, i));
  // d(x/|x|) = (I - q q^T) dx / |x|
  const Vec4 gx = (gq - dot(q, gq) * q) / n;
  return {gx[0], gx[1], gx[2], gx[3]};
}

AmbientVector backward_6d(const AmbientVector& x, const Mat3& g) {
  const Vec3 u = head3(x, 0);
  const Vec3 v = head3(x, 3);
  const double nu = norm(u);
  const Vec3 uh = u / nu;
  const double uv = dot(uh, v);
  const Vec3 w = v - uv * uh;
  const double nw = norm(w);
  const Vec3 vh = w / nw;

  const Vec3 g1 = g.col(0), g2 = g.col(1), g3 = g.col(2);
  // c3 = uh x vh
  Vec3 g_uh = g1 + cross(vh, g3);
  const Vec3 g_vh = g2 + cross(g3, uh);
  const Vec3 g_w = (g_vh - dot(vh, g_vh) * vh) / nw;
  // w = v - (uh . v) uh
  const double uw = dot(uh, g_w);
  const Vec3 g_v = g_w - uw * uh;
  g_uh -= uw * v + uv * g_w;
  const Vec3 g_u = (g_uh - dot(uh, g_uh) * uh) / nu;
  return {g_u[0], g_u[1], g_u[2], g_v[0], g_v[1], g_v[2]};
}

AmbientVector backward_euler(const AmbientVector& x, const Mat3& g) {
  const double a = x[0], b = x[1], c = x[2];
  const Mat3 rx = rot_x(a).matrix(), ry = rot_y(b).matrix(), rz = rot_z(c).matrix();
  const Mat3 drx = Mat3::from_rows(
      {0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a)});
  const Mat3 dry = Mat3::from_rows(
      {-std::sin(b), 0, std::cos(b), 0, 0, 0, -std::cos(b), 0, -std::sin(b)});
  const Mat3 drz = Mat3::from_rows(
      {-std::sin(c), -std::cos(c), 0, std::cos(c), -std::sin(c), 0, 0, 0, 0});
  return {inner(g, drx * ry * rz), inner(g, rx * dry * rz), inner(g, rx * ry * drz)};
}

AmbientVector backward_fd(const RawOutput& x, const Mat3& g) {
  AmbientVector out(x.x.size());
  for (std::size_t i = 0; i < x.x.size(); ++i) {
    RawOutput plus = x, minus = x;
    plus.x[i] += kFdStep;
    minus.x[i] -= kFdStep;
    const Mat3 d = baseline_rotation(plus).matrix() - baseline_rotation(minus).matrix();
    out[i] = inner(g, d) / (2.0 * kFdStep);
  }
  return out;
}

}  // namespace

std::size_t ambient_dim(RepKind rep) {
  switch (rep) {
    case RepKind::Euler3:
    case RepKind::AxisAngle3: return 3;
    case RepKind::Quat4: return 4;
    case RepKind::SixD: return 6;
    case RepKind::NineD: return 9;
    case RepKind::TenD: return 10;
  }
  return 0;
}

std::string_view to_string(RepKind rep) {
  switch (rep) {
    case RepKind::Euler3: return "euler";
    case RepKind::AxisAngle3: return "axis-angle";
    case RepKind::Quat4: return "quat";
    case RepKind::SixD: return "6d";
    case RepKind::NineD: return "9d";
    case RepKind::TenD: return "10d";
  }
  return "?";
}

RepKind parse_rep(std::string_view name) {
  for (RepKind r : {RepKind::Euler3, RepKind::AxisAngle3, RepKind::Quat4, RepKind::SixD,
                    RepKind::NineD, RepKind::TenD})
    if (name == to_string(r)) return r;
  throw ConfigError("unknown representation '" + std::string(name) +
                    "' (valid: euler, axis-angle, quat, 6d, 9d, 10d)");
}

AmbientVector::AmbientVector(std::size_t n) : n_(n) {
  if (n > kCapacity) throw ConfigError("AmbientVector: dimension above 10");
}

AmbientVector::AmbientVector(std::initializer_list<double> values)
    : AmbientVector(values.size()) {
  std::copy(values.begin(), values.end(), data_.begin());
}

AmbientVector AmbientVector::from_span(std::span<const double> values) {
  AmbientVector out(values.size());
  std::copy(values.begin(), values.end(), out.data_.begin());
  return out;
}

double AmbientVector::dot(const AmbientVector& o) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += data_[i] * o.data_[i];
  return s;
}

bool AmbientVector::is_finite() const {
  return std::all_of(begin(), end(), [](double v) { return std::isfinite(v); });
}

AmbientVector& AmbientVector::operator+=(const AmbientVector& o) {
  for (std::size_t i = 0; i < n_; ++i) data_[i] += o.data_[i];
  return *this;
}

AmbientVector& AmbientVector::operator-=(const AmbientVector& o) {
  for (std::size_t i = 0; i < n_; ++i) data_[i] -= o.data_[i];
  return *this;
}

AmbientVector& AmbientVector::operator*=(double s) {
  for (std::size_t i = 0; i < n_; ++i) data_[i] *= s;
  return *this;
}

bool operator==(const AmbientVector& a, const AmbientVector& b) {
  return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
}

Mat4 sym4_from_params(std::span<const double, 10> p) {
  return Mat4::from_rows({p[0], p[1], p[2], p[3],  //
                          p[1], p[4], p[5], p[6],  //
                          p[2], p[5], p[7], p[8],  //
                          p[3], p[6], p[8], p[9]});
}

std::array<double, 10> params_from_sym4(const Mat4& a) {
  return {a(0, 0), a(0, 1), a(0, 2), a(0, 3), a(1, 1),
          a(1, 2), a(1, 3), a(2, 2), a(2, 3), a(3, 3)};
}

Mat3 mat3_from_ambient(const AmbientVector& x) {
  Mat3 m;
  std::copy(x.begin(), x.begin() + 9, m.a.begin());
  return m;
}

AmbientVector ambient_from_mat3(const Mat3& m) { return AmbientVector::from_span(m.a); }

Rotation euler_xyz_to_rot(const Vec3& e) { return rot_x(e[0]) * rot_y(e[1]) * rot_z(e[2]); }

Vec3 rot_to_euler_xyz(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const double sb = std::clamp(r(0, 2), -1.0, 1.0);
  const double b = std::asin(sb);
  if (std::abs(sb) > 1.0 - 1e-12) {
    // Gimbal lock: fold the third angle into the first.
    return {{std::atan2(r(2, 1), r(1, 1)), b, 0.0}};
  }
  return {{std::atan2(-r(1, 2), r(2, 2)), b, std::atan2(-r(0, 1), r(0, 0))}};
}

ManifoldPoint manifold_map(const RawOutput& raw) {
  require_dim(raw);
  const AmbientVector& x = raw.x;
  switch (raw.rep) {
    case RepKind::Euler3:
    case RepKind::AxisAngle3:
      return {raw.rep, head3(x, 0)};
    case RepKind::Quat4: {
      const double n = x.norm();
      if (n <= kNormFloor) throw DegenerateInput("quat: |x| <= 1e-8");
      return {raw.rep, UnitQuaternion{Vec4{{x[0] / n, x[1] / n, x[2] / n, x[3] / n}}}};
    }
    case RepKind::SixD: {
      const Vec3 u = head3(x, 0);
      const Vec3 v = head3(x, 3);
      const double nu = norm(u);
      if (nu <= kNormFloor) throw DegenerateInput("6d: |u| <= 1e-8");
      const Vec3 uh = u / nu;
      const Vec3 w = v - dot(uh, v) * uh;
      const double nw = norm(w);
      if (nw <= kNormFloor) throw DegenerateInput("6d: Gram-Schmidt residual <= 1e-8");
      return {raw.rep, StiefelPair{uh, w / nw}};
    }
    case RepKind::NineD: {
      const SvdResult s = svd3(mat3_from_ambient(x));
      if (s.sigma[1] + s.sigma[2] <= kNormFloor)
        throw DegenerateInput("9d: sigma2 + sigma3 <= 1e-8");
      const double d = det(s.U) * det(s.V) < 0.0 ? -1.0 : 1.0;
      const Mat3 r = s.U * Mat3::diag(Vec3{{1.0, 1.0, d}}) * s.V.transpose();
      return {raw.rep, Rotation(r)};
    }
    case RepKind::TenD: {
      std::array<double, 10> p{};
      std::copy(x.begin(), x.end(), p.begin());
      const EigResult e = eig_sym4(sym4_from_params(p));
      if (e.values[1] - e.values[0] <= kEigengapFloor)
        throw DegenerateInput("10d: eigengap <= 1e-10");
      const Vec4 q = e.vectors.col(0);
      return {raw.rep, canonicalize(UnitQuaternion{q / norm(q)})};
    }
  }
  throw ConfigError("manifold_map: unknown representation");
}

Rotation rotation_map(const ManifoldPoint& p) {
  struct Visitor {
    RepKind rep;
    Rotation operator()(const Vec3& v) const {
      return rep == RepKind::Euler3 ? euler_xyz_to_rot(v) : Rotation(exp_matrix(v));
    }
    Rotation operator()(const UnitQuaternion& q) const { return quat_to_rot(q); }
    Rotation operator()(const StiefelPair& s) const {
      Mat3 m;
      m.set_col(0, s.u);
      m.set_col(1, s.v);
      m.set_col(2, cross(s.u, s.v));
      return Rotation(m);
    }
    Rotation operator()(const Rotation& r) const { return r; }
  };
  return std::visit(Visitor{p.rep}, p.value);
}

ManifoldPoint representation_map(const Rotation& r, RepKind rep) {
  switch (rep) {
    case RepKind::Euler3: return {rep, rot_to_euler_xyz(r)};
    case RepKind::AxisAngle3: return {rep, log_so3(Rotation::identity(), r).v};
    case RepKind::Quat4:
    case RepKind::TenD: return {rep, rot_to_quat(r)};
    case RepKind::SixD: return {rep, StiefelPair{r.col(0), r.col(1)}};
    case RepKind::NineD: return {rep, r};
  }
  throw ConfigError("representation_map: unknown representation");
}

AmbientVector embed(const ManifoldPoint& p) {
  struct Visitor {
    RepKind rep;
    AmbientVector operator()(const Vec3& v) const { return {v[0], v[1], v[2]}; }
    AmbientVector operator()(const UnitQuaternion& uq) const {
      const Vec4& q = uq.q;
      if (rep == RepKind::TenD) {
        return AmbientVector::from_span(params_from_sym4(Mat4::identity() - outer(q, q)));
      }
      return {q[0], q[1], q[2], q[3]};
    }
    AmbientVector operator()(const StiefelPair& s) const {
      return {s.u[0], s.u[1], s.u[2], s.v[0], s.v[1], s.v[2]};
    }
    AmbientVector operator()(const Rotation& r) const { return ambient_from_mat3(r.matrix()); }
  };
  return std::visit(Visitor{p.rep}, p.value);
}

Rotation baseline_rotation(const RawOutput& x) { return rotation_map(manifold_map(x)); }

AmbientVector baseline_backward(const RawOutput& x, const Mat3& dl_dr) {
  // Validates the input the same way the forward pass does.
  manifold_map(x);
  switch (x.rep) {
    case RepKind::Quat4: return backward_quat(x.x, dl_dr);
    case RepKind::SixD: return backward_6d(x.x, dl_dr);
    case RepKind::Euler3: return backward_euler(x.x, dl_dr);
    case RepKind::AxisAngle3:
    case RepKind::NineD:
    case RepKind::TenD: return backward_fd(x, dl_dr);
  }
  throw ConfigError("baseline_backward: unknown representation");
}

}  // namespace rotgrad
