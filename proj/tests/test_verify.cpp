#include <gtest/gtest.h>

#include <algorithm>

#include "rotgrad/verify.hpp"

using namespace rotgrad;

TEST(Verify, FullSuitePasses) {
  const auto results = verify::run_checks({});
  EXPECT_EQ(results.size(), verify::check_names().size());
  for (const auto& r : results) EXPECT_TRUE(r.passed) << verify::format(r);
}

TEST(Verify, FilterSelectsBySubstring) {
  verify::Options o;
  o.filter = "numerics.";
  o.cases = 50;
  const auto results = verify::run_checks(o);
  ASSERT_FALSE(results.empty());
  for (const auto& r : results) EXPECT_EQ(r.name.rfind("numerics.", 0), 0u) << r.name;
  o.filter = "no-such-check";
  EXPECT_TRUE(verify::run_checks(o).empty());
}

TEST(Verify, FormatLine) {
  verify::CheckResult r;
  r.name = "x.y";
  r.passed = false;
  EXPECT_EQ(verify::format(r).rfind("FAIL x.y", 0), 0u);
  r.passed = true;
  r.asserted = false;
  EXPECT_EQ(verify::format(r).rfind("INFO x.y", 0), 0u);
}

TEST(Verify, DetectsSkippedProjection) {
  // Returning the goal quaternion itself, without projecting or choosing the
  // sign nearest x, is never closer than the true projection.
  verify::Options o;
  o.filter = "projection.optimality.quat";
  o.cases = 200;
  o.inverse_project = [](const RawOutput& x, const Rotation& r) {
    (void)x;
    return embed(representation_map(r, RepKind::Quat4));
  };
  const auto results = verify::run_checks(o);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].name, "projection.optimality.quat");
  EXPECT_FALSE(results[0].passed);
}

TEST(Verify, OracleBoundsOurProjection) {
  CounterRng rng(3);
  const Rotation rg = sample_uniform_rotation(rng);
  const RawOutput x{RepKind::NineD, embed(representation_map(rg, RepKind::NineD))};
  EXPECT_NEAR(verify::oracle_min_distance(x, x.x, rg), 0.0, 1e-8);
}
