#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "rotgrad/nn.hpp"
#include "rotgrad/rpmg.hpp"
#include "support.hpp"

using namespace rotgrad;
using namespace rotgrad::testing;

namespace {

Batch random_batch(CounterRng& rng, std::size_t rows, std::size_t cols) {
  Batch b(rows, cols);
  for (double& v : b.data) v = rng.normal();
  return b;
}

double weighted_sum(const Batch& out, const Batch& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.data.size(); ++i) s += out.data[i] * w.data[i];
  return s;
}

}  // namespace

TEST(Mlp, ZeroWeightsGiveZeroOutput) {
  const Mlp mlp({4, 8, 3});
  CounterRng rng(1);
  const Batch out = forward(mlp, random_batch(rng, 5, 4));
  EXPECT_EQ(out.rows, 5u);
  EXPECT_EQ(out.cols, 3u);
  for (double v : out.data) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, GlorotInitRange) {
  CounterRng rng(2);
  const Mlp mlp({48, 128, 128, 9}, rng);
  EXPECT_EQ(mlp.params().size(), 48u * 128 + 128 + 128 * 128 + 128 + 128 * 9 + 9);
  const double bound = std::sqrt(6.0 / (48 + 128));
  for (std::size_t i = 0; i < 48 * 128; ++i) EXPECT_LE(std::abs(mlp.params()[i]), bound);
  for (std::size_t i = 0; i < 128; ++i) EXPECT_EQ(mlp.params()[mlp.bias_offset(0) + i], 0.0);
}

TEST(Mlp, LeakyActivationByHand) {
  // 1 -> 2 -> 1 with identity-like weights: out = relu_leaky(x) - relu_leaky(-x).
  Mlp mlp({1, 2, 1});
  auto p = mlp.params();
  p[mlp.weight_offset(0)] = 1.0;
  p[mlp.weight_offset(0) + 1] = -1.0;
  p[mlp.weight_offset(1)] = 1.0;
  p[mlp.weight_offset(1) + 1] = -1.0;
  Batch in(2, 1);
  in(0, 0) = 2.0;
  in(1, 0) = -3.0;
  const Batch out = forward(mlp, in);
  EXPECT_DOUBLE_EQ(out(0, 0), 2.0 - kLeakySlope * -2.0);
  EXPECT_DOUBLE_EQ(out(1, 0), kLeakySlope * -3.0 - 3.0);
}

TEST(Mlp, LinearNetworkClosedForm) {
  CounterRng rng(3);
  Mlp mlp({3, 2});
  for (double& v : mlp.params()) v = rng.normal();
  const Batch in = random_batch(rng, 4, 3);
  const Batch out = forward(mlp, in);
  const auto p = mlp.params();
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t o = 0; o < 2; ++o) {
      double expect = p[mlp.bias_offset(0) + o];
      for (std::size_t i = 0; i < 3; ++i) expect += p[o * 3 + i] * in(r, i);
      EXPECT_NEAR(out(r, o), expect, 1e-14);
    }
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  CounterRng rng(4);
  Mlp mlp({5, 7, 6, 4}, rng);
  for (std::size_t l = 0; l < mlp.num_layers(); ++l)
    for (std::size_t i = 0; i < mlp.layer_sizes()[l + 1]; ++i)
      mlp.params()[mlp.bias_offset(l) + i] = 0.1 * rng.normal();
  const Batch in = random_batch(rng, 3, 5);
  const Batch w = random_batch(rng, 3, 4);
  ForwardCache cache;
  forward(mlp, in, &cache);
  const std::vector<double> g = backward(mlp, cache, w);
  ASSERT_EQ(g.size(), mlp.params().size());
  const double h = 1e-4;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double saved = mlp.params()[i];
    mlp.params()[i] = saved + h;
    const double up = weighted_sum(forward(mlp, in), w);
    mlp.params()[i] = saved - h;
    const double down = weighted_sum(forward(mlp, in), w);
    mlp.params()[i] = saved;
    EXPECT_NEAR(g[i], (up - down) / (2 * h), 1e-4) << i;
  }
}

TEST(Mlp, ZeroUpstreamGivesZeroGradient) {
  CounterRng rng(5);
  const Mlp mlp({3, 4, 2}, rng);
  ForwardCache cache;
  forward(mlp, random_batch(rng, 2, 3), &cache);
  for (double v : backward(mlp, cache, Batch(2, 2))) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, ShapeErrors) {
  EXPECT_THROW(Mlp({4}), ConfigError);
  EXPECT_THROW(Mlp({4, 0, 3}), ConfigError);
  const Mlp mlp({4, 3});
  EXPECT_THROW(forward(mlp, Batch(2, 5)), ConfigError);
  ForwardCache cache;
  forward(mlp, Batch(2, 4), &cache);
  EXPECT_THROW(backward(mlp, cache, Batch(2, 4)), ConfigError);
  EXPECT_THROW(backward(mlp, ForwardCache{}, Batch(2, 3)), ConfigError);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> p{1.0, -2.0};
  AdamState s(2, 1e-3);
  adam_step(s, p, std::vector<double>{0.0, 0.0});
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, ConstantGradientStepsByLearningRate) {
  std::vector<double> p{0.0};
  AdamState s(1, 1e-3);
  for (int t = 0; t < 100; ++t) {
    const double before = p[0];
    adam_step(s, p, std::vector<double>{3.0});
    EXPECT_NEAR(before - p[0], 1e-3, 1e-9);
  }
}

TEST(Adam, TwoStepHandTrace) {
  std::vector<double> p{0.5};
  AdamState s(1, 0.1);
  adam_step(s, p, std::vector<double>{2.0});
  // Step 1: m = 0.2, v = 0.004, bias-corrected ratio = 1.
  EXPECT_NEAR(p[0], 0.5 - 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
  adam_step(s, p, std::vector<double>{-1.0});
  const double m = 0.9 * 0.2 + 0.1 * -1.0;
  const double v = 0.999 * 0.004 + 0.001 * 1.0;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p[0], 0.5 - 0.1 * 2.0 / (2.0 + 1e-8) - 0.1 * mh / (std::sqrt(vh) + 1e-8), 1e-14);
  std::vector<double> wrong{1.0, 2.0};
  EXPECT_THROW(adam_step(s, p, wrong), ConfigError);
}

TEST(Checkpoint, RoundTrip) {
  CounterRng rng(6);
  const Mlp mlp({6, 5, 4}, rng);
  const Mlp back = checkpoint_from_json(checkpoint_to_json(mlp));
  EXPECT_EQ(back.layer_sizes(), mlp.layer_sizes());
  ASSERT_EQ(back.params().size(), mlp.params().size());
  for (std::size_t i = 0; i < mlp.params().size(); ++i)
    EXPECT_EQ(back.params()[i], mlp.params()[i]);

  const auto path = std::filesystem::temp_directory_path() / "rotgrad_test_ckpt.json";
  save_checkpoint(mlp, path);
  const Mlp loaded = load_checkpoint(path);
  std::filesystem::remove(path);
  for (std::size_t i = 0; i < mlp.params().size(); ++i)
    EXPECT_EQ(loaded.params()[i], mlp.params()[i]);
}

TEST(Checkpoint, RejectsForeignFiles) {
  const Mlp mlp({2, 2});
  auto j = nlohmann::json::parse(checkpoint_to_json(mlp));
  EXPECT_EQ(j["activation"], "leaky_relu");

  auto wrong_format = j;
  wrong_format["format"] = "other";
  EXPECT_THROW(checkpoint_from_json(wrong_format.dump()), ConfigError);
  auto wrong_version = j;
  wrong_version["version"] = kCheckpointVersion + 1;
  EXPECT_THROW(checkpoint_from_json(wrong_version.dump()), ConfigError);
  auto short_params = j;
  short_params["params"].erase(0);
  EXPECT_THROW(checkpoint_from_json(short_params.dump()), ConfigError);
  EXPECT_THROW(checkpoint_from_json("not json"), ConfigError);
  EXPECT_THROW(load_checkpoint("/nonexistent/rotgrad.json"), ConfigError);
}

TEST(EndToEnd, VanillaBackwardThroughNetwork) {
  // d/dtheta of L(baseline_rotation(net(in))) against the chain of
  // baseline_backward and the network backward pass.
  CounterRng rng(7);
  for (RepKind rep : {RepKind::Quat4, RepKind::SixD}) {
    Mlp mlp({3, 2, ambient_dim(rep)}, rng);
    for (std::size_t i = 0; i < ambient_dim(rep); ++i)
      mlp.params()[mlp.bias_offset(1) + i] = rng.normal();
    const Batch in = random_batch(rng, 1, 3);
    const Loss loss = L2Loss{sample_uniform_rotation(rng)};
    auto total = [&] {
      const Batch out = forward(mlp, in);
      return loss_value(loss, baseline_rotation({rep, AmbientVector::from_span(out.row(0))}));
    };
    ForwardCache cache;
    const Batch out = forward(mlp, in, &cache);
    const RawOutput x{rep, AmbientVector::from_span(out.row(0))};
    const Rotation r = baseline_rotation(x);
    const AmbientVector dx = rpmg_gradient(x, r, loss, 0.25, {0.0, Method::Vanilla});
    Batch dout(1, ambient_dim(rep));
    for (std::size_t i = 0; i < dx.size(); ++i) dout(0, i) = dx[i];
    const std::vector<double> g = backward(mlp, cache, dout);
    const double h = 1e-6;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double saved = mlp.params()[i];
      mlp.params()[i] = saved + h;
      const double up = total();
      mlp.params()[i] = saved - h;
      const double down = total();
      mlp.params()[i] = saved;
      EXPECT_NEAR(g[i], (up - down) / (2 * h), 1e-3 * std::max(1.0, std::abs(g[i])))
          << to_string(rep) << " " << i;
    }
  }
}
