#include "rotgrad/so3.hpp"

#include <numbers>

namespace rotgrad {

namespace {

constexpr double kSmallAngle = 1e-6;
constexpr double kNearPiMargin = 0.1;

}  // namespace

bool Rotation::is_valid(double tol) const {
  if (!all_finite(m_)) return false;
  const Mat3 e = m_.transpose() * m_ - Mat3::identity();
  return frobenius_norm(e) <= tol && std::abs(det(m_) - 1.0) <= tol;
}

Mat3 hat(const Vec3& p) {
  return Mat3::from_rows({0.0, -p[2], p[1],  //
                          p[2], 0.0, -p[0],  //
                          -p[1], p[0], 0.0});
}

Vec3 vee(const Mat3& s) { return {{s(2, 1), s(0, 2), s(1, 0)}}; }

Mat3 exp_matrix(const Vec3& phi) {
  const double theta2 = dot(phi, phi);
  const double theta = std::sqrt(theta2);
  double a;  // sin(theta) / theta
  double b;  // (1 - cos(theta)) / theta^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    const double h = std::sin(0.5 * theta);
    b = 2.0 * h * h / theta2;
  }
  const Mat3 w = hat(phi);
  return Mat3::identity() + a * w + b * (w * w);
}

Rotation exp_so3(const Rotation& r, const TangentSO3& phi) {
  return Rotation(r.matrix() * exp_matrix(phi.v));
}

LogResult log_so3_detailed(const Rotation& r1, const Rotation& r2) {
  const Mat3 rel = r1.matrix().transpose() * r2.matrix();
  const Vec3 w = 0.5 * vee(rel - rel.transpose());  // sin(theta) * axis
  const double c = std::clamp(0.5 * (rel.trace() - 1.0), -1.0, 1.0);
  const double s = norm(w);
  const double theta = std::atan2(s, c);

  LogResult out;
  if (theta < kSmallAngle) {
    out.phi.v = w * (1.0 + theta * theta / 6.0);
    return out;
  }
  if (theta < std::numbers::pi - kNearPiMargin) {
    out.phi.v = w * (theta / s);
    return out;
  }

  // Near pi the antisymmetric part vanishes; recover the axis from
  // (R + R^T)/2 = cos(theta) I + (1 - cos(theta)) axis axis^T.
  out.near_pi = true;
  Mat3 b = 0.5 * (rel + rel.transpose()) - c * Mat3::identity();
  b *= 1.0 / (1.0 - c);
  std::size_t k = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (b(i, i) > b(k, k)) k = i;
  Vec3 axis = b.col(k) / std::sqrt(std::max(b(k, k), 1e-300));
  axis = axis / norm(axis);
  if (dot(axis, w) < 0.0) axis = -axis;
  out.phi.v = theta * axis;
  return out;
}

TangentSO3 log_so3(const Rotation& r1, const Rotation& r2) {
  return log_so3_detailed(r1, r2).phi;
}

double geodesic_distance(const Rotation& r1, const Rotation& r2) {
  const Mat3 rel = r1.matrix().transpose() * r2.matrix();
  const double s = 0.5 * norm(vee(rel - rel.transpose()));
  const double c = std::clamp(0.5 * (rel.trace() - 1.0), -1.0, 1.0);
  return std::atan2(s, c);
}

Rotation quat_to_rot(const UnitQuaternion& uq) {
  const auto& q = uq.q;
  const double q0 = q[0], q1 = q[1], q2 = q[2], q3 = q[3];
  return Rotation(Mat3::from_rows({
      2 * (q0 * q0 + q1 * q1) - 1, 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2),
      2 * (q1 * q2 + q0 * q3), 2 * (q0 * q0 + q2 * q2) - 1, 2 * (q2 * q3 - q0 * q1),
      2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), 2 * (q0 * q0 + q3 * q3) - 1,
  }));
}

UnitQuaternion canonicalize(const UnitQuaternion& uq) {
  for (double c : uq.q) {
    if (c > 0.0) return uq;
    if (c < 0.0) return -uq;
  }
  return uq;
}

UnitQuaternion rot_to_quat(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const double tr = r.trace();
  Vec4 q;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(std::max(1.0 + tr, 0.0));
    q = {{0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
          (r(1, 0) - r(0, 1)) / s}};
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(std::max(1.0 + r(0, 0) - r(1, 1) - r(2, 2), 0.0));
    q = {{(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
          (r(0, 2) + r(2, 0)) / s}};
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(std::max(1.0 + r(1, 1) - r(0, 0) - r(2, 2), 0.0));
    q = {{(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
          (r(1, 2) + r(2, 1)) / s}};
  } else {
    const double s = 2.0 * std::sqrt(std::max(1.0 + r(2, 2) - r(0, 0) - r(1, 1), 0.0));
    q = {{(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s,
          0.25 * s}};
  }
  q = q / norm(q);
  // The sign rule treats q0 within rounding of zero as zero.
  if (std::abs(q[0]) < 1e-15) q[0] = 0.0;
  return canonicalize(UnitQuaternion{q});
}

Rotation rot_x(double t) {
  const double c = std::cos(t), s = std::sin(t);
  return Rotation(Mat3::from_rows({1, 0, 0, 0, c, -s, 0, s, c}));
}

Rotation rot_y(double t) {
  const double c = std::cos(t), s = std::sin(t);
  return Rotation(Mat3::from_rows({c, 0, s, 0, 1, 0, -s, 0, c}));
}

Rotation rot_z(double t) {
  const double c = std::cos(t), s = std::sin(t);
  return Rotation(Mat3::from_rows({c, -s, 0, s, c, 0, 0, 0, 1}));
}

UnitQuaternion sample_uniform_quaternion(CounterRng& rng) {
  for (;;) {
    Vec4 q{{rng.normal(), rng.normal(), rng.normal(), rng.normal()}};
    const double n = norm(q);
    if (n > 1e-12) return UnitQuaternion{q / n};
  }
}

Rotation sample_uniform_rotation(CounterRng& rng) {
  return quat_to_rot(sample_uniform_quaternion(rng));
}

}  // namespace rotgrad
