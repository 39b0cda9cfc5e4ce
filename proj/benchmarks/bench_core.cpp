#include <benchmark/benchmark.h>

#include "rotgrad/harness.hpp"

using namespace rotgrad;

namespace {

Mat3 random_mat3(CounterRng& rng) {
  Mat3 m;
  for (double& v : m.a) v = rng.normal();
  return m;
}

std::vector<RawOutput> raw_outputs(RepKind rep, std::size_t n) {
  CounterRng rng(11);
  std::vector<RawOutput> xs;
  for (std::size_t i = 0; i < n; ++i) {
    AmbientVector x(ambient_dim(rep));
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.normal();
    xs.push_back({rep, x});
  }
  return xs;
}

void BM_Svd3(benchmark::State& state) {
  CounterRng rng(1);
  const Mat3 m = random_mat3(rng);
  for (auto _ : state) benchmark::DoNotOptimize(svd3(m));
}
BENCHMARK(BM_Svd3);

void BM_EigSym4(benchmark::State& state) {
  CounterRng rng(2);
  Mat4 a;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i; j < 4; ++j) a(i, j) = a(j, i) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym4(a));
}
BENCHMARK(BM_EigSym4);

void BM_ManifoldMap(benchmark::State& state) {
  const RepKind rep = static_cast<RepKind>(state.range(0));
  const auto xs = raw_outputs(rep, 64);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(baseline_rotation(xs[i++ % xs.size()]));
  state.SetLabel(std::string(to_string(rep)));
}
BENCHMARK(BM_ManifoldMap)
    ->Arg(static_cast<int>(RepKind::Quat4))
    ->Arg(static_cast<int>(RepKind::SixD))
    ->Arg(static_cast<int>(RepKind::NineD))
    ->Arg(static_cast<int>(RepKind::TenD));

void BM_InverseProject(benchmark::State& state) {
  const RepKind rep = static_cast<RepKind>(state.range(0));
  const auto xs = raw_outputs(rep, 64);
  CounterRng rng(3);
  const Rotation rg = sample_uniform_rotation(rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(inverse_project(xs[i++ % xs.size()], rg));
  state.SetLabel(std::string(to_string(rep)));
}
BENCHMARK(BM_InverseProject)
    ->Arg(static_cast<int>(RepKind::Quat4))
    ->Arg(static_cast<int>(RepKind::SixD))
    ->Arg(static_cast<int>(RepKind::NineD))
    ->Arg(static_cast<int>(RepKind::TenD));

void BM_RpmgGradient(benchmark::State& state) {
  const RepKind rep = static_cast<RepKind>(state.range(0));
  const auto xs = raw_outputs(rep, 64);
  CounterRng rng(4);
  const Loss loss = L2Loss{sample_uniform_rotation(rng)};
  std::vector<Rotation> rs;
  for (const auto& x : xs) rs.push_back(baseline_rotation(x));
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t k = i++ % xs.size();
    benchmark::DoNotOptimize(rpmg_gradient(xs[k], rs[k], loss, 0.25, {}));
  }
  state.SetLabel(std::string(to_string(rep)));
}
BENCHMARK(BM_RpmgGradient)
    ->Arg(static_cast<int>(RepKind::Quat4))
    ->Arg(static_cast<int>(RepKind::SixD))
    ->Arg(static_cast<int>(RepKind::NineD))
    ->Arg(static_cast<int>(RepKind::TenD));

void BM_MlpStep(benchmark::State& state) {
  CounterRng rng(5);
  Mlp mlp({48, 128, 128, 9}, rng);
  Batch in(32, 48), dout(32, 9);
  for (double& v : in.data) v = rng.normal();
  for (double& v : dout.data) v = 1e-3 * rng.normal();
  AdamState adam(mlp.params().size(), 1e-3);
  ForwardCache cache;
  for (auto _ : state) {
    forward(mlp, in, &cache);
    adam_step(adam, mlp.params(), backward(mlp, cache, dout));
  }
}
BENCHMARK(BM_MlpStep);

}  // namespace
BENCHMARK_MAIN();
