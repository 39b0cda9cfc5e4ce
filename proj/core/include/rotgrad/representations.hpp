// Rotation representations: the manifold mapping from raw network output to
// the representation manifold, the rotation mapping from there to SO(3), the
// inverse representation mapping, and the plain backward pass through both.
#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "rotgrad/lin.hpp"
#include "rotgrad/so3.hpp"

namespace rotgrad {

enum class RepKind { Euler3, AxisAngle3, Quat4, SixD, NineD, TenD };

std::size_t ambient_dim(RepKind rep);
std::string_view to_string(RepKind rep);
/// Accepts "euler", "axis-angle", "quat", "6d", "9d", "10d"; throws
/// ConfigError listing the valid names otherwise.
RepKind parse_rep(std::string_view name);

// Fixed-capacity vector in the ambient space of a representation (n <= 10).
class AmbientVector {
 public:
  static constexpr std::size_t kCapacity = 10;

  AmbientVector() = default;
  explicit AmbientVector(std::size_t n);
  AmbientVector(std::initializer_list<double> values);
  static AmbientVector from_span(std::span<const double> values);

  std::size_t size() const { return n_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<double> span() { return {data_.data(), n_}; }
  std::span<const double> span() const { return {data_.data(), n_}; }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.begin() + static_cast<std::ptrdiff_t>(n_); }

  double dot(const AmbientVector& o) const;
  double norm() const { return std::sqrt(dot(*this)); }
  bool is_finite() const;

  AmbientVector& operator+=(const AmbientVector& o);
  AmbientVector& operator-=(const AmbientVector& o);
  AmbientVector& operator*=(double s);
  friend AmbientVector operator+(AmbientVector a, const AmbientVector& b) { return a += b; }
  friend AmbientVector operator-(AmbientVector a, const AmbientVector& b) { return a -= b; }
  friend AmbientVector operator*(AmbientVector a, double s) { return a *= s; }
  friend AmbientVector operator*(double s, AmbientVector a) { return a *= s; }
  friend bool operator==(const AmbientVector& a, const AmbientVector& b);

 private:
  std::array<double, kCapacity> data_{};
  std::size_t n_ = 0;
};

// Unconstrained network output for one representation.
struct RawOutput {
  RepKind rep;
  AmbientVector x;
};

// Orthonormal column pair of the 6D representation.
struct StiefelPair {
  Vec3 u;
  Vec3 v;
};

struct ManifoldPoint {
  RepKind rep;
  // Vec3: Euler3 / AxisAngle3 (the manifold is R^3 itself);
  // UnitQuaternion: Quat4 / TenD; StiefelPair: SixD; Rotation: NineD.
  std::variant<Vec3, UnitQuaternion, StiefelPair, Rotation> value;
};

// The symmetric 4x4 matrix parameterized by ten values, filled row by row
// from the upper triangle.
Mat4 sym4_from_params(std::span<const double, 10> params);
std::array<double, 10> params_from_sym4(const Mat4& a);

// Rows of the 9D ambient vector are the rows of the 3x3 matrix.
Mat3 mat3_from_ambient(const AmbientVector& x);
AmbientVector ambient_from_mat3(const Mat3& m);

Rotation euler_xyz_to_rot(const Vec3& angles);
Vec3 rot_to_euler_xyz(const Rotation& r);

/// Manifold mapping: normalization (Quat4), Gram-Schmidt (SixD), SVD
/// orthogonalization with det correction (NineD), smallest eigenvector of the
/// parameterized symmetric matrix (TenD), identity (Euler3, AxisAngle3).
/// Throws DegenerateInput naming the failed condition.
ManifoldPoint manifold_map(const RawOutput& x);

/// Rotation mapping from manifold to SO(3).
Rotation rotation_map(const ManifoldPoint& p);

/// Representation mapping from SO(3) to the manifold. Quaternions (Quat4 and
/// TenD) are returned with q0 >= 0.
ManifoldPoint representation_map(const Rotation& r, RepKind rep);

/// Re-injects a manifold point into the ambient space. TenD embeds q as the
/// parameters of I - q q^T, whose smallest eigenvector is q.
AmbientVector embed(const ManifoldPoint& p);

/// rotation_map(manifold_map(x)).
Rotation baseline_rotation(const RawOutput& x);

/// Gradient of a scalar loss w.r.t. the raw output given dL/dR. Quat4, SixD
/// and Euler3 are analytic; AxisAngle3, NineD and TenD use central finite
/// differences with step 1e-5.
AmbientVector baseline_backward(const RawOutput& x, const Mat3& dl_dr);

}  // namespace rotgrad
