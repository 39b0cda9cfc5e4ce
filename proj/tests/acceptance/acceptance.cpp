// Runs the ten acceptance criteria at their stated tolerances and prints one
// PASS/FAIL line per criterion. Exit status is non-zero if any criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rotgrad/harness.hpp"
#include "rotgrad/verify.hpp"

using namespace rotgrad;

namespace {

constexpr RepKind kReps[] = {RepKind::Quat4, RepKind::SixD, RepKind::NineD, RepKind::TenD};
constexpr std::uint64_t kSeeds[] = {0, 1, 2};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed = true;
  std::string summary;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs the verify checks matching each prefix; all must pass.
Outcome from_checks(std::initializer_list<const char*> prefixes) {
  Outcome o;
  long checks = 0;
  for (const char* prefix : prefixes) {
    verify::Options opt;
    opt.filter = prefix;
    for (const auto& r : verify::run_checks(opt)) {
      ++checks;
      std::printf("    %s\n", verify::format(r).c_str());
      if (!r.passed) {
        o.passed = false;
        o.summary += " failed=" + r.name;
      }
    }
  }
  if (checks == 0) o.passed = false;
  o.summary = fmt("%ld checks", checks) + o.summary;
  return o;
}

Outcome criterion_projection() {
  const auto t0 = Clock::now();
  Outcome o = from_checks({"projection.optimality.", "projection.membership."});
  const double elapsed = seconds_since(t0);
  if (elapsed >= 60.0) o.passed = false;
  o.summary += fmt(", %.1f s (target < 60 s)", elapsed);
  return o;
}

Outcome criterion_fit() {
  Outcome o;
  double worst_error = 0.0, worst_time = 0.0;
  for (RepKind rep : kReps)
    for (std::uint64_t seed : kSeeds) {
      FitConfig c;
      c.rep = rep;
      c.method = Method::RPMG;
      c.loss = LossName::L2;
      c.lambda = 0.01;
      c.seed = seed;
      c.iters = 2000;
      const auto t0 = Clock::now();
      const FitTrace t = fit_single_rotation(c);
      const double elapsed = seconds_since(t0);
      const double err = t.errors.back();
      std::printf("    %-5s seed %llu  final error %.3e rad  %.2f s%s\n",
                  std::string(to_string(rep)).c_str(), static_cast<unsigned long long>(seed), err,
                  elapsed, t.aborted ? ("  aborted: " + t.diagnostic).c_str() : "");
      worst_error = std::max(worst_error, err);
      worst_time = std::max(worst_time, elapsed);
      if (t.aborted || !(err < 1e-4) || elapsed >= 10.0) o.passed = false;
    }
  o.summary = fmt("worst final error %.3e rad (< 1e-4), slowest run %.2f s (< 10 s)", worst_error,
                  worst_time);
  return o;
}

ExperimentConfig train_config(RepKind rep, Method method, double lambda, std::uint64_t seed) {
  ExperimentConfig c;
  c.rep = rep;
  c.method = method;
  c.lambda = lambda;
  c.seed = seed;
  return c;
}

struct TrainRuns {
  // [rep][seed]
  std::vector<std::vector<MetricsReport>> rpmg, vanilla;
  std::vector<MetricsReport> pmg;  // seed 0
  double trend_seconds = 0.0;
};

TrainRuns run_training() {
  TrainRuns runs;
  const auto t0 = Clock::now();
  for (RepKind rep : kReps) {
    auto& rp = runs.rpmg.emplace_back();
    auto& va = runs.vanilla.emplace_back();
    for (std::uint64_t seed : kSeeds) {
      rp.push_back(train(train_config(rep, Method::RPMG, 0.01, seed)));
      va.push_back(train(train_config(rep, Method::Vanilla, 0.01, seed)));
    }
  }
  runs.trend_seconds = seconds_since(t0);
  for (RepKind rep : kReps) runs.pmg.push_back(train(train_config(rep, Method::PMG, 0.0, 0)));
  return runs;
}

Outcome criterion_norms(const TrainRuns& runs) {
  Outcome o;
  int pmg_ok = 0, rpmg_ok = 0;
  for (std::size_t i = 0; i < std::size(kReps); ++i) {
    const MetricsReport& p = runs.pmg[i];
    const MetricsReport& r = runs.rpmg[i][0];
    const double p_ratio = p.final.mean_norm / p.evals.front().mean_norm;
    const double r_ratio = r.final.mean_norm / r.evals.front().mean_norm;
    const bool p_pass = p_ratio < 0.5;
    const bool r_pass = r_ratio >= 0.5 && r_ratio <= 2.0;
    pmg_ok += p_pass;
    rpmg_ok += r_pass;
    std::printf("    %-5s PMG |x| %.3f -> %.3f (x%.2f, need < 0.5) %s   RPMG |x| %.3f -> %.3f "
                "(x%.2f, need [0.5, 2]) %s\n",
                std::string(to_string(kReps[i])).c_str(), p.evals.front().mean_norm,
                p.final.mean_norm, p_ratio, p_pass ? "ok" : "no", r.evals.front().mean_norm,
                r.final.mean_norm, r_ratio, r_pass ? "ok" : "no");
    if (!p_pass || !r_pass) o.passed = false;
  }
  o.summary = fmt("PMG collapse %d/4 reps, RPMG stable %d/4 reps", pmg_ok, rpmg_ok);
  return o;
}

Outcome criterion_trend(const TrainRuns& runs) {
  Outcome o;
  int wins = 0;
  for (std::size_t i = 0; i < std::size(kReps); ++i) {
    std::string line = fmt("    %-5s", std::string(to_string(kReps[i])).c_str());
    for (std::size_t s = 0; s < std::size(kSeeds); ++s) {
      const double r = runs.rpmg[i][s].final.median_deg;
      const double v = runs.vanilla[i][s].final.median_deg;
      const bool win = r < v;
      wins += win;
      if (!win) o.passed = false;
      line += fmt("  seed %zu: RPMG %.3f vs Vanilla %.3f deg %s", s, r, v, win ? "ok" : "no");
    }
    std::printf("%s\n", line.c_str());
  }
  if (runs.trend_seconds >= 900.0) o.passed = false;
  o.summary = fmt("RPMG lower on %d/12 (rep, seed) cells, %.0f s (target < 900 s)", wins,
                  runs.trend_seconds);
  return o;
}

Outcome criterion_sphere() {
  Outcome o;
  int wins = 0;
  for (std::uint64_t seed : kSeeds) {
    ExperimentConfig c;
    c.seed = seed;
    c.s2_method = S2Method::RPMG;
    const double r = train_s2(c).final.median_deg;
    c.s2_method = S2Method::L2WithNorm;
    const double b = train_s2(c).final.median_deg;
    const bool win = r < b;
    wins += win;
    if (!win) o.passed = false;
    std::printf("    seed %llu  RPMG %.3f vs L2-with-norm %.3f deg %s\n",
                static_cast<unsigned long long>(seed), r, b, win ? "ok" : "no");
  }
  ExperimentConfig c;
  c.s2_method = S2Method::PMG;
  const MetricsReport p = train_s2(c);
  const double ratio = p.final.mean_norm / p.evals.front().mean_norm;
  std::printf("    PMG seed 0  |x| %.3f -> %.3f (x%.2f, need < 0.5)\n", p.evals.front().mean_norm,
              p.final.mean_norm, ratio);
  if (!(ratio < 0.5)) o.passed = false;
  o.summary = fmt("RPMG lower on %d/3 seeds, PMG norm ratio %.2f", wins, ratio);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> simple = {
      {"1 projection-oracle optimality", criterion_projection},
      {"2 riemannian gradient correctness",
       [] { return from_checks({"gradient.riemannian.", "gradient.hand_case"}); }},
      {"3 tau_converge one-step residual", [] { return from_checks({"tau.one_step."}); }},
      {"4 geodesic-path property", [] { return from_checks({"gradient.geodesic_path"}); }},
      {"5 direct fitting convergence", criterion_fit},
      {"8 special-case identities", [] { return from_checks({"identity."}); }},
      {"10 numerics substrate", [] { return from_checks({"numerics.", "projection.kkt_10d"}); }},
  };

  std::vector<std::pair<std::string, Outcome>> results;
  auto record = [&](const std::string& name, const std::function<Outcome()>& fn) {
    std::printf("criterion %s\n", name.c_str());
    std::fflush(stdout);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.passed ? "PASS" : "FAIL", name.c_str(),
                o.summary.c_str());
    std::fflush(stdout);
    results.emplace_back(name, o);
  };

  for (const auto& [name, fn] : simple) record(name, fn);

  TrainRuns runs;
  bool trained = false;
  auto ensure_runs = [&] {
    if (!trained) runs = run_training();
    trained = true;
  };
  record("6 norm dynamics", [&] {
    ensure_runs();
    return criterion_norms(runs);
  });
  record("7 ordering trend", [&] {
    ensure_runs();
    return criterion_trend(runs);
  });
  record("9 sphere regression", criterion_sphere);

  int failed = 0;
  for (const auto& [name, o] : results) failed += !o.passed;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed,
              results.size());
  return failed == 0 ? 0 : 1;
}
