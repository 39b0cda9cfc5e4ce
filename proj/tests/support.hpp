// Seeded generators shared by the unit tests.
#pragma once

#include <cmath>

#include "rotgrad/representations.hpp"
#include "rotgrad/so3.hpp"

namespace rotgrad::testing {

inline Vec3 random_vec3(CounterRng& rng) { return {{rng.normal(), rng.normal(), rng.normal()}}; }

inline Vec3 random_unit3(CounterRng& rng) {
  const Vec3 v = random_vec3(rng);
  return v / norm(v);
}

inline Mat3 random_mat3(CounterRng& rng) {
  Mat3 m;
  for (double& v : m.a) v = rng.normal();
  return m;
}

inline AmbientVector random_ambient(CounterRng& rng, std::size_t n) {
  AmbientVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

inline Rotation rotation_at(const Rotation& from, double angle, CounterRng& rng) {
  return from * Rotation(exp_matrix(angle * random_unit3(rng)));
}

template <std::size_t R, std::size_t C>
double max_abs_diff(const Mat<R, C>& a, const Mat<R, C>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < R * C; ++i) s = std::max(s, std::abs(a.a[i] - b.a[i]));
  return s;
}

inline double max_abs_diff(const Rotation& a, const Rotation& b) {
  return max_abs_diff(a.matrix(), b.matrix());
}

inline double max_abs_diff(const AmbientVector& a, const AmbientVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

}  // namespace rotgrad::testing
