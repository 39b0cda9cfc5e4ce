#include <gtest/gtest.h>

#include <bit>
#include <numbers>

#include "rotgrad/rpmg.hpp"
#include "rotgrad/verify.hpp"
#include "support.hpp"

using namespace rotgrad;
using namespace rotgrad::testing;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr RepKind kManifold[] = {RepKind::Quat4, RepKind::SixD, RepKind::NineD, RepKind::TenD};

AmbientVector from_params(const std::array<double, 10>& p) {
  return AmbientVector::from_span(p);
}

Mat4 sym4(const AmbientVector& x) {
  std::array<double, 10> p{};
  std::copy(x.begin(), x.end(), p.begin());
  return sym4_from_params(p);
}

// Raw output within pi/3 of the embedded goal.
RawOutput near_goal(RepKind rep, const Rotation& rg, CounterRng& rng, double spread = 0.3) {
  AmbientVector e = embed(representation_map(rg, rep));
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += spread * rng.normal();
  return {rep, rng.uniform(0.5, 2.0) * e};
}

bool bit_equal(const AmbientVector& a, const AmbientVector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

}  // namespace

TEST(Method, ParseAndValidate) {
  for (Method m : {Method::Vanilla, Method::MG, Method::PMG, Method::RPMG})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("sgd"), ConfigError);
  EXPECT_THROW(validate(RpmgParams{-0.1, Method::RPMG}), ConfigError);
  EXPECT_THROW(validate(RpmgParams{1.5, Method::RPMG}), ConfigError);
  EXPECT_NO_THROW(validate(RpmgParams{}));
}

TEST(MapQuatTo10d, IdentityQuaternion) {
  EXPECT_EQ(from_params(map_quat_to_10d(UnitQuaternion{})),
            AmbientVector({0, 0, 0, 0, 1, 0, 0, 1, 0, 1}));
}

TEST(MapQuatTo10d, RoundTripAndNullVector) {
  CounterRng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const UnitQuaternion q = sample_uniform_quaternion(rng);
    const AmbientVector x = from_params(map_quat_to_10d(q));
    const Vec4 back = std::get<UnitQuaternion>(manifold_map({RepKind::TenD, x}).value).q;
    EXPECT_NEAR(std::abs(dot(back, q.q)), 1.0, 1e-12);
    EXPECT_LE(norm(sym4(x) * q.q), 1e-15);
  }
}

TEST(InverseProject, QuatExample) {
  const AmbientVector x_gp = inverse_project({RepKind::Quat4, {1, 1, 0, 0}}, Rotation());
  EXPECT_EQ(x_gp, AmbientVector({1, 0, 0, 0}));
}

TEST(InverseProject, FixedPointOnManifold) {
  CounterRng rng(2);
  for (RepKind rep : kManifold)
    for (int t = 0; t < 100; ++t) {
      const Rotation rg = sample_uniform_rotation(rng);
      const AmbientVector x = embed(representation_map(rg, rep));
      const AmbientVector x_gp = inverse_project({rep, x}, rg);
      EXPECT_LE(max_abs_diff(x_gp, x), 1e-12) << to_string(rep);
      EXPECT_LE(geodesic_distance(baseline_rotation({rep, x_gp}), rg), 1e-9);
    }
}

TEST(InverseProject, NineDSymmetricFactorIsInInverseImage) {
  CounterRng rng(3);
  for (int t = 0; t < 200; ++t) {
    const Rotation rg = sample_uniform_rotation(rng);
    Mat3 s = random_mat3(rng);
    s = s + s.transpose();
    const AmbientVector x = ambient_from_mat3(s * rg.matrix());
    EXPECT_LE(max_abs_diff(inverse_project({RepKind::NineD, x}, rg), x), 1e-9);
  }
}

TEST(InverseProject, TenDKktResidual) {
  CounterRng rng(4);
  for (int t = 0; t < 1000; ++t) {
    const Rotation rg = sample_uniform_rotation(rng);
    const RawOutput x = near_goal(RepKind::TenD, rg, rng, 1.0);
    const UnitQuaternion q = rot_to_quat(rg);
    const TenDProjection p = inverse_project_10d(x.x, q);
    EXPECT_LE(norm(sym4(p.x_gp) * q.q - p.eigenvalue * q.q), 1e-8);
    EXPECT_NEAR(p.eigenvalue, dot(q.q, sym4(p.x_gp) * q.q), 1e-12);
  }
}

TEST(InverseProject, TenDConstraintMatrix) {
  CounterRng rng(5);
  const UnitQuaternion q = sample_uniform_quaternion(rng);
  const DenseMatrix m = constraint_matrix_10d(q);
  for (int t = 0; t < 20; ++t) {
    const AmbientVector dx = random_ambient(rng, 10);
    const std::vector<double> md = m.multiply(dx.span());
    const Vec4 expected = sym4(dx) * q.q;
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(md[i], expected[i], 1e-14);
  }
}

TEST(InverseProject, OptimalAgainstOracle) {
  CounterRng rng(6);
  for (RepKind rep : kManifold)
    for (int t = 0; t < 100; ++t) {
      const Rotation rg = sample_uniform_rotation(rng);
      const RawOutput x = near_goal(rep, rg, rng);
      const AmbientVector goal = goal_point(x, rg);
      const double ours = (x.x - inverse_project(x, rg)).norm();
      EXPECT_LE(ours, verify::oracle_min_distance(x, goal, rg) + 1e-4) << to_string(rep);
    }
}

TEST(InverseProject, ShortensTheOutput) {
  CounterRng rng(7);
  for (RepKind rep : {RepKind::Quat4, RepKind::SixD, RepKind::NineD})
    for (int t = 0; t < 1000; ++t) {
      const Rotation rg = sample_uniform_rotation(rng);
      const RawOutput x{rep, random_ambient(rng, ambient_dim(rep))};
      EXPECT_LE(inverse_project(x, rg).norm(), x.x.norm() * (1 + 1e-12)) << to_string(rep);
    }
}

TEST(InverseProject, QuatWrongSideReversesDirection) {
  CounterRng rng(8);
  for (int t = 0; t < 200; ++t) {
    const Rotation rg = sample_uniform_rotation(rng);
    const AmbientVector q = embed(representation_map(rg, RepKind::Quat4));
    AmbientVector x = random_ambient(rng, 4);
    if (x.dot(q) > 0) x *= -1.0;
    const AmbientVector raw_proj = project_onto_inverse_image({RepKind::Quat4, x}, q, rg);
    EXPECT_LE((raw_proj * (1.0 / raw_proj.norm()) + q).norm(), 1e-12);
    // The public entry point selects -q instead, staying on x's side.
    EXPECT_GT(inverse_project({RepKind::Quat4, x}, rg).dot(x), 0.0);
    EXPECT_LT(goal_point({RepKind::Quat4, x}, rg).dot(q), 0.0);
  }
}

TEST(InverseProject, EulerAndAxisAngleReturnTheGoal) {
  CounterRng rng(9);
  const Rotation rg = sample_uniform_rotation(rng);
  for (RepKind rep : {RepKind::Euler3, RepKind::AxisAngle3}) {
    const RawOutput x{rep, random_ambient(rng, 3)};
    EXPECT_EQ(inverse_project(x, rg), goal_point(x, rg));
  }
}

TEST(RpmgGradient, ZeroWhenConverged) {
  CounterRng rng(10);
  for (RepKind rep : kManifold) {
    const Rotation r = sample_uniform_rotation(rng);
    const RawOutput x{rep, embed(representation_map(r, rep))};
    const AmbientVector g = rpmg_gradient(x, baseline_rotation(x), L2Loss{r}, 0.25, {});
    EXPECT_LE(g.norm(), 1e-12) << to_string(rep);
  }
}

TEST(RpmgGradient, AtTargetBlendsProjectionAndManifoldTerms) {
  CounterRng rng(11);
  for (RepKind rep : kManifold)
    for (int t = 0; t < 50; ++t) {
      const Rotation gt = sample_uniform_rotation(rng);
      RawOutput x = near_goal(rep, gt, rng, 0.0);
      // Scale a manifold point: same rotation, off the manifold.
      x.x *= rng.uniform(0.3, 3.0);
      const double lambda = rng.uniform(0.0, 1.0);
      const RpmgTrace tr = rpmg_backward(x, baseline_rotation(x), L2Loss{gt}, 0.25,
                                         {lambda, Method::RPMG});
      const AmbientVector expected =
          (1 - lambda) * (x.x - tr.projection) + lambda * (x.x - tr.goal_point);
      EXPECT_LE(max_abs_diff(tr.gradient, expected), 1e-12);
    }
}

TEST(RpmgGradient, LambdaOneIsBitwiseMg) {
  CounterRng rng(12);
  for (RepKind rep : kManifold)
    for (int t = 0; t < 250; ++t) {
      const RawOutput x{rep, random_ambient(rng, ambient_dim(rep))};
      const Rotation r = baseline_rotation(x);
      const Loss loss = L2Loss{sample_uniform_rotation(rng)};
      const double tau = rng.uniform(0.05, 1.0);
      EXPECT_TRUE(bit_equal(rpmg_gradient(x, r, loss, tau, {1.0, Method::RPMG}),
                            rpmg_gradient(x, r, loss, tau, {0.0, Method::MG})));
    }
}

TEST(RpmgGradient, LambdaZeroIsPmg) {
  CounterRng rng(13);
  for (RepKind rep : kManifold) {
    const RawOutput x{rep, random_ambient(rng, ambient_dim(rep))};
    const Rotation r = baseline_rotation(x);
    const Loss loss = GeodesicLoss{sample_uniform_rotation(rng)};
    EXPECT_TRUE(bit_equal(rpmg_gradient(x, r, loss, 0.3, {0.0, Method::RPMG}),
                          rpmg_gradient(x, r, loss, 0.3, {0.5, Method::PMG})));
  }
}

TEST(RpmgGradient, VanillaDelegatesToBaseline) {
  CounterRng rng(14);
  for (RepKind rep : kManifold) {
    const RawOutput x{rep, random_ambient(rng, ambient_dim(rep))};
    const Rotation r = baseline_rotation(x);
    const Loss loss = L2Loss{sample_uniform_rotation(rng)};
    EXPECT_EQ(rpmg_gradient(x, r, loss, 0.3, {0.01, Method::Vanilla}),
              baseline_backward(x, euclid_grad(loss, r)));
  }
}

TEST(RpmgGradient, ProjectiveNoLongerThanManifold) {
  CounterRng rng(15);
  for (RepKind rep : kManifold)
    for (int t = 0; t < 250; ++t) {
      const RawOutput x{rep, random_ambient(rng, ambient_dim(rep))};
      const Rotation r = baseline_rotation(x);
      const Loss loss = L2Loss{sample_uniform_rotation(rng)};
      const double tau = rng.uniform(0.05, 0.5);
      const double pm = rpmg_gradient(x, r, loss, tau, {0.0, Method::PMG}).norm();
      const double m = rpmg_gradient(x, r, loss, tau, {0.0, Method::MG}).norm();
      EXPECT_LE(pm, m + 1e-12) << to_string(rep);
    }
}

TEST(RpmgGradient, MgWithTauGtTargetsGroundTruth) {
  CounterRng rng(16);
  for (RepKind rep : kManifold)
    for (int t = 0; t < 250; ++t) {
      const RawOutput x{rep, random_ambient(rng, ambient_dim(rep))};
      const Rotation r = baseline_rotation(x);
      const Rotation gt = rotation_at(r, rng.uniform(1e-3, kPi - 0.1), rng);
      const double theta = geodesic_distance(r, gt);
      const double tau_gt = theta / (4 * std::sin(theta));
      const AmbientVector g = rpmg_gradient(x, r, L2Loss{gt}, tau_gt, {0.0, Method::MG});
      EXPECT_LE(max_abs_diff(g, x.x - goal_point(x, gt)), 1e-9) << to_string(rep);
    }
}
