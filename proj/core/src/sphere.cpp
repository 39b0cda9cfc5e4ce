#include "rotgrad/sphere.hpp"

namespace rotgrad {

Vec3 s2_map(const Vec3& x) {
  const double n = norm(x);
  if (!(n > 1e-8)) throw DegenerateInput("s2: |x| <= 1e-8");
  return x / n;
}

Vec3 s2_exp(const Vec3& base, const Vec3& v) {
  const double t = norm(v);
  // sin(t) / t
  const double sinc = t < 1e-6 ? 1.0 - t * t / 6.0 : std::sin(t) / t;
  const Vec3 out = std::cos(t) * base + sinc * v;
  return out / norm(out);
}

Vec3 s2_riemannian_grad(const Vec3& x_hat, const Vec3& target) {
  return 2.0 * (dot(x_hat, target) * x_hat - target);
}

Vec3 s2_riemannian_grad_in_basis(const Vec3& x_hat, const Vec3& target, const Vec3& c1,
                                 const Vec3& c2) {
  const Vec3 d = 2.0 * (x_hat - target);
  return dot(d, c1) * c1 + dot(d, c2) * c2;
}

Vec3 s2_rpmg_gradient(const Vec3& x, const Vec3& target, double tau, double lambda,
                      S2Diagnostics* diagnostics) {
  const Vec3 x_hat = s2_map(x);
  if (diagnostics && dot(x_hat, target) <= -1.0 + 1e-12) ++diagnostics->antipodal;
  Vec3 grad = s2_riemannian_grad(x_hat, target);
  // Remove rounding drift out of the tangent plane.
  grad -= dot(grad, x_hat) * x_hat;
  const Vec3 goal = s2_exp(x_hat, -tau * grad);
  const Vec3 x_gp = dot(x, goal) * goal;
  return x - x_gp + lambda * (x_gp - goal);
}

}  // namespace rotgrad
