// SO(3) group operations.
#pragma once

#include "rotgrad/lin.hpp"
#include "rotgrad/rng.hpp"

namespace rotgrad {

// Tangent vector at a rotation, in the body frame: exp_so3(R, phi) = R Exp(phi).
// Its norm is the rotation angle in radians.
struct TangentSO3 {
  Vec3 v;

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  double norm() const { return rotgrad::norm(v); }
  friend bool operator==(const TangentSO3&, const TangentSO3&) = default;
};

// A 3x3 matrix with R^T R = I and det R = +1. Construction does not validate;
// use is_valid() where the input is untrusted.
class Rotation {
 public:
  Rotation() : m_(Mat3::identity()) {}
  explicit Rotation(const Mat3& m) : m_(m) {}

  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  Vec3 col(std::size_t c) const { return m_.col(c); }

  Rotation inverse() const { return Rotation(m_.transpose()); }
  bool is_valid(double tol = 1e-9) const;

  friend Rotation operator*(const Rotation& a, const Rotation& b) {
    return Rotation(a.m_ * b.m_);
  }
  friend Vec3 operator*(const Rotation& a, const Vec3& x) { return a.m_ * x; }

 private:
  Mat3 m_;
};

// Scalar-first unit quaternion (q0, q1, q2, q3).
struct UnitQuaternion {
  Vec4 q{{1.0, 0.0, 0.0, 0.0}};

  double operator[](std::size_t i) const { return q[i]; }
  UnitQuaternion operator-() const { return {-q}; }
};

Mat3 hat(const Vec3& phi);
inline Mat3 hat(const TangentSO3& phi) { return hat(phi.v); }
Vec3 vee(const Mat3& skew);

/// Rodrigues formula; a second-order series replaces sin/cos ratios below 1e-6.
Mat3 exp_matrix(const Vec3& phi);
Rotation exp_so3(const Rotation& r, const TangentSO3& phi);

struct LogResult {
  TangentSO3 phi;
  // True when the angle came within 0.1 rad of pi and the axis was recovered
  // from the symmetric part of the relative rotation.
  bool near_pi = false;
};

/// Logarithm of R1^T R2, so that exp_so3(R1, log) == R2. Norm is in [0, pi].
LogResult log_so3_detailed(const Rotation& r1, const Rotation& r2);
TangentSO3 log_so3(const Rotation& r1, const Rotation& r2);

/// Angle of R1^T R2 in [0, pi].
double geodesic_distance(const Rotation& r1, const Rotation& r2);

Rotation quat_to_rot(const UnitQuaternion& q);
/// Shepperd's method; result has q0 >= 0 (when q0 == 0 the first nonzero
/// component is positive).
UnitQuaternion rot_to_quat(const Rotation& r);
UnitQuaternion canonicalize(const UnitQuaternion& q);

Rotation rot_x(double angle);
Rotation rot_y(double angle);
Rotation rot_z(double angle);

/// Haar-uniform rotation from a normalized 4D Gaussian.
Rotation sample_uniform_rotation(CounterRng& rng);
UnitQuaternion sample_uniform_quaternion(CounterRng& rng);

}  // namespace rotgrad
