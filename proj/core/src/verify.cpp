#include "rotgrad/verify.hpp"

#include <bit>
#include <cstdio>
#include <numbers>

#include "rotgrad/harness.hpp"
#include "rotgrad/sphere.hpp"

namespace rotgrad::verify {

namespace {

constexpr double kPi = std::numbers::pi;

using CheckFn = std::function<CheckResult(const Options&)>;

struct Check {
  std::string name;
  CheckFn run;
};

// Running worst case of a residual.
struct Worst {
  double value = 0.0;
  std::string where;

  void update(double v, const std::string& label) {
    if (!(v <= value)) {  // NaN is always the worst
      value = v;
      where = label;
    }
  }
};

CheckResult finish(std::string name, const Worst& w, double tol, long cases,
                   std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.residual = w.value;
  r.tolerance = tol;
  r.cases = cases;
  r.passed = w.value <= tol;
  r.detail = std::move(detail);
  if (!r.passed && !w.where.empty()) r.detail += (r.detail.empty() ? "" : "; ") + w.where;
  return r;
}

std::string case_label(long i) { return "case " + std::to_string(i); }

long small_count(const Options& o) { return std::max(1L, o.cases / 10); }

// FNV-1a, so case streams do not depend on the standard library's hash.
std::uint64_t label_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) h = (h ^ ch) * 0x100000001b3ULL;
  return h;
}

CounterRng stream(const Options& o, const std::string& name) {
  return CounterRng(o.seed).split(label_hash(name));
}

template <std::size_t R, std::size_t C>
double max_abs(const Mat<R, C>& m) {
  double s = 0.0;
  for (double v : m.a) s = std::max(s, std::abs(v));
  return s;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

Mat3 random_mat3(CounterRng& rng) {
  Mat3 m;
  for (double& v : m.a) v = rng.normal();
  return m;
}

Vec3 random_unit3(CounterRng& rng) {
  Vec3 v{{rng.normal(), rng.normal(), rng.normal()}};
  return v / norm(v);
}

// ---------------------------------------------------------------- numerics

CheckResult check_svd(const Options& o) {
  CounterRng rng = stream(o, "svd3");
  Worst w;
  for (long i = 0; i < o.cases; ++i) {
    Mat3 m = random_mat3(rng);
    const double kind = rng.uniform();
    if (kind < 0.1) {  // rank one
      m = outer(Vec3{{rng.normal(), rng.normal(), rng.normal()}},
                Vec3{{rng.normal(), rng.normal(), rng.normal()}});
    } else if (kind < 0.2) {  // rank two
      m.set_col(2, rng.normal() * m.col(0) + rng.normal() * m.col(1));
    } else if (kind < 0.3) {
      m *= std::pow(10.0, rng.uniform(-4.0, 4.0));
    }
    const SvdResult s = svd3(m);
    const double scale = std::max(1.0, frobenius_norm(m));
    const Mat3 recon = s.U * Mat3::diag(s.sigma) * s.V.transpose();
    double r = frobenius_norm(recon - m) / scale / 1e-8;
    r = std::max(r, frobenius_norm(s.U * s.U.transpose() - Mat3::identity()) / 1e-9);
    r = std::max(r, frobenius_norm(s.V * s.V.transpose() - Mat3::identity()) / 1e-9);
    if (!(s.sigma[0] >= s.sigma[1] && s.sigma[1] >= s.sigma[2] && s.sigma[2] >= 0.0)) r = 1e300;
    w.update(r, case_label(i));
  }
  return finish("numerics.svd3", w, 1.0, o.cases,
                "residual is the worst of reconstruction/1e-8 and orthogonality/1e-9");
}

Mat4 random_sym4(CounterRng& rng) {
  Mat4 a;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i; j < 4; ++j) a(i, j) = a(j, i) = rng.normal();
  const double kind = rng.uniform();
  if (kind < 0.1) {  // repeated eigenvalue
    const Vec4 v{{rng.normal(), rng.normal(), rng.normal(), rng.normal()}};
    a = Mat4::identity() - (1.0 / dot(v, v)) * outer(v, v);
  } else if (kind < 0.2) {
    a *= std::pow(10.0, rng.uniform(-3.0, 3.0));
  }
  return a;
}

CheckResult check_eig(const Options& o) {
  CounterRng rng = stream(o, "eig_sym4");
  Worst w;
  for (long i = 0; i < o.cases; ++i) {
    const Mat4 a = random_sym4(rng);
    const EigResult e = eig_sym4(a);
    const double scale = std::max(1.0, frobenius_norm(a));
    double r = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const Vec4 v = e.vectors.col(k);
      r = std::max(r, norm(a * v - e.values[k] * v) / scale / 1e-9);
    }
    r = std::max(r, frobenius_norm(e.vectors.transpose() * e.vectors - Mat4::identity()) / 1e-9);
    for (std::size_t k = 0; k + 1 < 4; ++k)
      if (!(e.values[k] <= e.values[k + 1])) r = 1e300;
    w.update(r, case_label(i));
  }
  return finish("numerics.eig_sym4", w, 1.0, o.cases,
                "residual is the worst of |Av - lv|/1e-9 and orthonormality/1e-9");
}

CheckResult check_charpoly(const Options& o) {
  CounterRng rng = stream(o, "eig_charpoly");
  Worst w;
  for (long i = 0; i < o.cases; ++i) {
    const Mat4 a = random_sym4(rng);
    const EigResult e = eig_sym4(a);
    const double n = frobenius_norm(a);
    const double bound = 1e-6 * std::max(n * n * n * n, 1e-300);
    for (std::size_t k = 0; k < 4; ++k)
      w.update(std::abs(det(a - e.values[k] * Mat4::identity())) / bound, case_label(i));
  }
  return finish("numerics.eig_charpoly", w, 1.0, o.cases,
                "|det(A - l I)| / (1e-6 |A|^4)");
}

CheckResult check_solve(const Options& o) {
  CounterRng rng = stream(o, "solve_dense");
  Worst w;
  for (long i = 0; i < o.cases; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % DenseMatrix::kMaxDim);
    DenseMatrix a(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) a(r, c) = rng.normal() + (r == c ? 2.0 * n : 0.0);
    std::vector<double> b(n);
    for (double& v : b) v = rng.normal() * 10.0;
    const std::vector<double> x = solve_dense(a, b);
    const std::vector<double> ax = a.multiply(x);
    double res = 0.0, bn = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      res += (ax[k] - b[k]) * (ax[k] - b[k]);
      bn += b[k] * b[k];
    }
    w.update(std::sqrt(res) / std::max(1.0, std::sqrt(bn)), case_label(i));
  }
  return finish("numerics.solve_dense", w, 1e-9, o.cases, "|Ax - b| / max(1, |b|)");
}

// -------------------------------------------------------------- projection

struct ProjectionCase {
  RawOutput x;
  Rotation r_goal;
  AmbientVector goal;  // sign-selected x̂_g
};

// x near the embedded goal with angle(x, x̂_g) < pi/3.
ProjectionCase draw_projection_case(RepKind rep, CounterRng& rng) {
  for (;;) {
    const Rotation rg = sample_uniform_rotation(rng);
    AmbientVector e = embed(representation_map(rg, rep));
    if (rep == RepKind::Quat4 && rng.uniform() < 0.5) e *= -1.0;
    const double scale = rng.uniform(0.5, 2.0);
    const double sigma = rng.uniform(0.0, 1.5) * e.norm() / std::sqrt(static_cast<double>(e.size()));
    AmbientVector noise(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) noise[i] = sigma * rng.normal();
    RawOutput x{rep, scale * (e + noise)};
    const AmbientVector g = goal_point(x, rg);
    const double c = x.x.dot(g) / (x.x.norm() * g.norm());
    if (c > 0.5) return {x, rg, g};
  }
}

// Gradient descent over the explicit inverse-image family.
constexpr int kOracleSteps = 10000;
constexpr double kOracleStep = 1e-3;

double oracle_quat(const AmbientVector& x, const AmbientVector& g) {
  double k = 0.0;
  for (int s = 0; s < kOracleSteps; ++s) {
    double grad = 0.0;
    for (std::size_t i = 0; i < 4; ++i) grad += -2.0 * (x[i] - k * g[i]) * g[i];
    k -= kOracleStep * grad;
  }
  return (x - k * g).norm();
}

double oracle_6d(const AmbientVector& x, const AmbientVector& g) {
  const Vec3 u{{x[0], x[1], x[2]}}, v{{x[3], x[4], x[5]}};
  const Vec3 a{{g[0], g[1], g[2]}}, b{{g[3], g[4], g[5]}};
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
  for (int s = 0; s < kOracleSteps; ++s) {
    const Vec3 du = u - k1 * a;
    const Vec3 dv = v - k2 * a - k3 * b;
    k1 += kOracleStep * 2.0 * dot(du, a);
    k2 += kOracleStep * 2.0 * dot(dv, a);
    k3 += kOracleStep * 2.0 * dot(dv, b);
  }
  const Vec3 du = u - k1 * a, dv = v - k2 * a - k3 * b;
  return std::sqrt(dot(du, du) + dot(dv, dv));
}

double oracle_9d(const AmbientVector& x, const Rotation& rg) {
  const Mat3 xm = mat3_from_ambient(x);
  const Mat3& r = rg.matrix();
  Mat3 s;  // symmetric
  for (int step = 0; step < kOracleSteps; ++step) {
    const Mat3 grad = -2.0 * ((xm - s * r) * r.transpose());
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) {
        const double d = i == j ? grad(i, i) : grad(i, j) + grad(j, i);
        s(i, j) -= kOracleStep * d;
        s(j, i) = s(i, j);
      }
  }
  return frobenius_norm(xm - s * r);
}

// Family: A = mu q q^T + P C P with P = I - q q^T, distance measured on the
// ten parameters.
double oracle_10d(const AmbientVector& x, const UnitQuaternion& q) {
  const Mat4 qq = outer(q.q, q.q);
  const Mat4 p = Mat4::identity() - qq;
  double mu = 0.0;
  std::array<double, 10> c{};
  std::array<double, 10> xp{};
  std::copy(x.begin(), x.end(), xp.begin());
  auto residual = [&](std::array<double, 10>* r) {
    const Mat4 b = mu * qq + p * sym4_from_params(c) * p;
    const std::array<double, 10> y = params_from_sym4(b);
    double d2 = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      (*r)[i] = y[i] - xp[i];
      d2 += (*r)[i] * (*r)[i];
    }
    return d2;
  };
  // Position of each parameter in the matrix, recovered by probing.
  std::array<std::pair<std::size_t, std::size_t>, 10> where{};
  for (std::size_t k = 0; k < 10; ++k) {
    std::array<double, 10> e{};
    e[k] = 1.0;
    const Mat4 m = sym4_from_params(e);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i; j < 4; ++j)
        if (m(i, j) != 0.0) where[k] = {i, j};
  }
  std::array<double, 10> r{};
  for (int step = 0; step < kOracleSteps; ++step) {
    residual(&r);
    // Frobenius gradient of sum r_k^2 with respect to the symmetric B.
    Mat4 g;
    for (std::size_t k = 0; k < 10; ++k) {
      const auto [i, j] = where[k];
      if (i == j) {
        g(i, i) = 2.0 * r[k];
      } else {
        g(i, j) = g(j, i) = r[k];
      }
    }
    const double dmu = dot(q.q, g * q.q);
    const Mat4 h = p * g * p;
    for (std::size_t k = 0; k < 10; ++k) {
      const auto [i, j] = where[k];
      c[k] -= kOracleStep * (i == j ? h(i, i) : 2.0 * h(i, j));
    }
    mu -= kOracleStep * dmu;
  }
  return std::sqrt(residual(&r));
}

bool positive_definite(const Mat3& s) {
  const double m1 = s(0, 0);
  const double m2 = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  return m1 > 0.0 && m2 > 0.0 && det(s) > 0.0;
}

std::string rep_suffix(RepKind rep) { return std::string(to_string(rep)); }

constexpr RepKind kManifoldReps[] = {RepKind::Quat4, RepKind::SixD, RepKind::NineD,
                                     RepKind::TenD};

CheckResult check_optimality(RepKind rep, const Options& o) {
  const std::string name = "projection.optimality." + rep_suffix(rep);
  CounterRng rng = stream(o, name);
  Worst w;
  double max_oracle_gap = 0.0;  // how far below ours the oracle got, for the report
  for (long i = 0; i < o.cases; ++i) {
    const ProjectionCase pc = draw_projection_case(rep, rng);
    double ours;
    try {
      ours = (pc.x.x - o.inverse_project(pc.x, pc.r_goal)).norm();
    } catch (const Error& e) {
      w.update(1e300, case_label(i) + ": " + e.what());
      continue;
    }
    const double oracle = oracle_min_distance(pc.x, pc.goal, pc.r_goal);
    w.update(ours - oracle, case_label(i));
    max_oracle_gap = std::max(max_oracle_gap, oracle - ours);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max(|x-x_gp|) - oracle; oracle trails by at most %.2e",
                max_oracle_gap);
  return finish(name, w, 1e-4, o.cases, buf);
}

CheckResult check_membership(RepKind rep, const Options& o) {
  const std::string name = "projection.membership." + rep_suffix(rep);
  CounterRng rng = stream(o, name);
  Worst w;
  long subset = 0;
  for (long i = 0; i < o.cases; ++i) {
    const ProjectionCase pc = draw_projection_case(rep, rng);
    AmbientVector x_gp;
    try {
      x_gp = o.inverse_project(pc.x, pc.r_goal);
    } catch (const Error& e) {
      w.update(1e300, case_label(i) + ": " + e.what());
      continue;
    }
    const AmbientVector& x = pc.x.x;
    const AmbientVector& g = pc.goal;
    bool keep = true;
    switch (rep) {
      case RepKind::Quat4: keep = x.dot(g) > 0.0; break;
      case RepKind::SixD: {
        const double k1 = x[0] * g[0] + x[1] * g[1] + x[2] * g[2];
        const double k3 = x[3] * g[3] + x[4] * g[4] + x[5] * g[5];
        keep = k1 > 0.0 && k3 > 0.0;
        break;
      }
      case RepKind::NineD: {
        const Mat3 xm = mat3_from_ambient(x);
        const Mat3& r = pc.r_goal.matrix();
        keep = positive_definite(0.5 * (xm * r.transpose() + r * xm.transpose()));
        break;
      }
      case RepKind::TenD: {
        std::array<double, 10> params{};
        std::copy(x_gp.begin(), x_gp.end(), params.begin());
        const Mat4 a = sym4_from_params(params);
        const EigResult e = eig_sym4(a);
        const Vec4 q = rot_to_quat(pc.r_goal).q;
        const double rayleigh = dot(q, a * q);
        const double scale = std::max(1.0, frobenius_norm(a));
        keep = std::abs(rayleigh - e.values[0]) <= 1e-9 * scale &&
               e.values[1] - e.values[0] > 1e-6 * scale;
        break;
      }
      default: break;
    }
    if (!keep) continue;
    ++subset;
    try {
      w.update(geodesic_distance(baseline_rotation({rep, x_gp}), pc.r_goal), case_label(i));
    } catch (const Error& e) {
      w.update(1e300, case_label(i) + ": " + e.what());
    }
  }
  return finish(name, w, 1e-6, subset,
                std::to_string(subset) + " of " + std::to_string(o.cases) +
                    " cases satisfy the relaxed constraints");
}

CheckResult check_kkt(const Options& o) {
  CounterRng rng = stream(o, "projection.kkt_10d");
  Worst w;
  for (long i = 0; i < o.cases; ++i) {
    const ProjectionCase pc = draw_projection_case(RepKind::TenD, rng);
    AmbientVector x_gp;
    try {
      x_gp = o.inverse_project(pc.x, pc.r_goal);
    } catch (const Error& e) {
      w.update(1e300, case_label(i) + ": " + e.what());
      continue;
    }
    std::array<double, 10> params{};
    std::copy(x_gp.begin(), x_gp.end(), params.begin());
    const Mat4 a = sym4_from_params(params);
    const Vec4 q = rot_to_quat(pc.r_goal).q;
    const double mu = dot(q, a * q);
    w.update(norm(a * q - mu * q), case_label(i));
  }
  return finish("projection.kkt_10d", w, 1e-8, o.cases, "|A(x_gp) q_g - mu q_g|");
}

CheckResult check_contraction(RepKind rep, const Options& o) {
  const std::string name = "projection.contraction." + rep_suffix(rep);
  CounterRng rng = stream(o, name);
  Worst w;
  const bool asserted = rep != RepKind::TenD;
  const long n = asserted ? o.cases : 10 * o.cases;
  long shrunk = 0;
  for (long i = 0; i < n; ++i) {
    const ProjectionCase pc = draw_projection_case(rep, rng);
    const double ratio = o.inverse_project(pc.x, pc.r_goal).norm() / pc.x.x.norm();
    if (ratio <= 1.0) ++shrunk;
    w.update(ratio, case_label(i));
  }
  CheckResult r = finish(name, w, 1.0 + 1e-12, n, "max |x_gp| / |x|");
  if (!asserted) {
    r.asserted = false;
    r.passed = true;
    r.detail = "measured only: " + std::to_string(shrunk) + " of " + std::to_string(n) +
               " cases have |x_gp| <= |x|; max |x_gp| / |x| = " + std::to_string(w.value);
  }
  return r;
}

CheckResult check_norm_ordering(const Options& o) {
  CounterRng rng = stream(o, "projection.norm_ordering");
  Worst w;
  long n = 0;
  for (RepKind rep : kManifoldReps)
    for (long i = 0; i < o.cases / 4 + 1; ++i, ++n) {
      const ProjectionCase pc = draw_projection_case(rep, rng);
      const double pm = (pc.x.x - o.inverse_project(pc.x, pc.r_goal)).norm();
      const double m = (pc.x.x - pc.goal).norm();
      w.update(pm - m, rep_suffix(rep) + " " + case_label(i));
    }
  return finish("projection.norm_ordering", w, 1e-12, n, "max |g_PM| - |g_M|");
}

CheckResult check_reversed_quat(const Options& o) {
  CounterRng rng = stream(o, "projection.reversed_quat");
  Worst w;
  for (long i = 0; i < o.cases; ++i) {
    const Rotation rg = sample_uniform_rotation(rng);
    const AmbientVector q = embed(representation_map(rg, RepKind::Quat4));
    AmbientVector x(4);
    for (std::size_t k = 0; k < 4; ++k) x[k] = rng.normal();
    if (x.dot(q) > 0.0) x *= -1.0;
    if (std::abs(x.dot(q)) < 1e-3) continue;
    const RawOutput raw{RepKind::Quat4, x};
    // Without sign selection the projected point lands on -q.
    const AmbientVector x_gp = project_onto_inverse_image(raw, q, rg);
    const AmbientVector xh = x_gp * (1.0 / x_gp.norm());
    w.update((xh + q).norm(), case_label(i));
    // inverse_project flips the goal first, so its projection agrees with x.
    if (!(o.inverse_project(raw, rg).dot(x) > 0.0)) w.update(1e300, case_label(i) + " sign");
  }
  return finish("projection.reversed_quat", w, 1e-12, o.cases,
                "|pi(x_gp) + q_g| for x . q_g < 0");
}

// ---------------------------------------------------------------- gradients

Rotation random_near(const Rotation& r, double angle, CounterRng& rng) {
  return r * Rotation(exp_matrix(angle * random_unit3(rng)));
}

TangentSO3 fd_riemannian(const Loss& loss, const Rotation& r, double h) {
  TangentSO3 out;
  for (std::size_t k = 0; k < 3; ++k) {
    TangentSO3 e;
    e[k] = h;
    TangentSO3 me;
    me[k] = -h;
    out[k] = (loss_value(loss, exp_so3(r, e)) - loss_value(loss, exp_so3(r, me))) / (2.0 * h);
  }
  return out;
}

PointSet random_points(CounterRng& rng, std::size_t n) {
  PointSet p;
  for (std::size_t i = 0; i < n; ++i)
    p.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}});
  return p;
}

// Index of the nearest point of `set` for each point of `from`.
std::vector<std::size_t> assignment(const PointSet& from, const PointSet& set) {
  std::vector<std::size_t> out;
  for (const Vec3& p : from) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const Vec3 d = p - set[i];
      if (dot(d, d) < bd) {
        bd = dot(d, d);
        best = i;
      }
    }
    out.push_back(best);
  }
  return out;
}

// Both Chamfer correspondence maps at rotation r.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> chamfer_maps(
    const ChamferLoss& c, const Rotation& r) {
  PointSet back;
  for (const Vec3& x : c.observed) back.push_back(r.inverse() * x);
  return {assignment(c.canonical, back), assignment(back, c.canonical)};
}

CheckResult check_riemannian(LossName which, const Options& o) {
  const std::string name = "gradient.riemannian." + std::string(to_string(which));
  CounterRng rng = stream(o, name);
  const double h = 1e-5;
  Worst w;
  long skipped = 0;
  const long n = small_count(o);
  for (long i = 0; i < n; ++i) {
    const Rotation gt = sample_uniform_rotation(rng);
    Rotation r = sample_uniform_rotation(rng);
    Loss loss = L2Loss{gt};
    switch (which) {
      case LossName::L2: break;
      case LossName::Geodesic:
        // theta^2 is not differentiable at theta = pi.
        r = random_near(gt, rng.uniform(0.01, kPi - 0.1), rng);
        loss = GeodesicLoss{gt};
        break;
      case LossName::Flow: loss = FlowLoss{gt, random_points(rng, 16)}; break;
      case LossName::Chamfer: {
        PointSet z = random_points(rng, 16);
        PointSet obs;
        for (const Vec3& p : z) obs.push_back(gt * p);
        r = random_near(gt, rng.uniform(0.0, 0.3), rng);
        loss = ChamferLoss{z, obs};
        const auto& c = std::get<ChamferLoss>(loss);
        const auto base = chamfer_maps(c, r);
        bool stable = true;
        for (std::size_t k = 0; k < 3 && stable; ++k)
          for (double sgn : {-1.0, 1.0}) {
            TangentSO3 e;
            e[k] = sgn * h;
            if (chamfer_maps(c, exp_so3(r, e)) != base) stable = false;
          }
        if (!stable) {
          ++skipped;
          --i;
          continue;
        }
        break;
      }
    }
    const TangentSO3 an = riemannian_grad(r, euclid_grad(loss, r));
    const TangentSO3 fd = fd_riemannian(loss, r, h);
    w.update(norm(an.v - fd.v) / std::max(norm(fd.v), 1e-3), case_label(i));
  }
  const double tol = which == LossName::Chamfer ? 1e-3 : 1e-6;
  std::string detail = "relative error against central differences, h = 1e-5";
  if (skipped) detail += "; " + std::to_string(skipped) + " draws near a correspondence switch redrawn";
  return finish(name, w, tol, n, detail);
}

CheckResult check_hand_case(const Options&) {
  Worst w;
  long n = 0;
  for (double theta : {1e-3, 0.1, 0.5, 1.0, 2.0, 3.0, -1.2}) {
    const Rotation gt = rot_z(theta);
    const TangentSO3 g = riemannian_grad(Rotation(), euclid_grad(L2Loss{gt}, Rotation()));
    const Vec3 expected{{0.0, 0.0, -4.0 * std::sin(theta)}};
    w.update(max_abs_diff(g.v.v, expected.v), "theta " + std::to_string(theta));
    ++n;
  }
  return finish("gradient.hand_case", w, 1e-9, n, "R = I, R_gt = rot_z(theta) against (0, 0, -4 sin theta)");
}

CheckResult check_geodesic_path(const Options& o) {
  CounterRng rng = stream(o, "gradient.geodesic_path");
  Worst w;
  for (long i = 0; i < o.cases; ++i) {
    const Rotation r = sample_uniform_rotation(rng);
    // The direction to an antipodal target is ambiguous.
    const Rotation gt = random_near(r, rng.uniform(1e-3, kPi - 1e-3), rng);
    const double tau = rng.uniform(0.01, 0.5);
    const Rotation rg = goal_rotation(r, riemannian_grad(r, euclid_grad(L2Loss{gt}, r)), tau);
    const Vec3 a = log_so3(r, rg).v, b = log_so3(r, gt).v;
    w.update(1.0 - dot(a, b) / (norm(a) * norm(b)), case_label(i));
  }
  return finish("gradient.geodesic_path", w, 1e-8, o.cases,
                "1 - cos(log(R, R_g), log(R, R_gt)) under L2");
}

// A raw output whose manifold mapping is well conditioned.
RawOutput random_raw(RepKind rep, CounterRng& rng) {
  for (;;) {
    AmbientVector x(ambient_dim(rep));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    if (rep == RepKind::Euler3) {
      x[0] = rng.uniform(-kPi, kPi);
      x[1] = rng.uniform(-kPi / 2 + 0.1, kPi / 2 - 0.1);
      x[2] = rng.uniform(-kPi, kPi);
    }
    if (rep == RepKind::AxisAngle3) {
      const double n = x.norm();
      if (n < 0.1 || n > kPi - 0.1) continue;
    }
    if (rep == RepKind::NineD && svd3(mat3_from_ambient(x)).sigma[2] < 0.1) continue;
    if (rep == RepKind::TenD) {
      std::array<double, 10> p{};
      std::copy(x.begin(), x.end(), p.begin());
      const EigResult e = eig_sym4(sym4_from_params(p));
      if (e.values[1] - e.values[0] < 0.1) continue;
    }
    return {rep, x};
  }
}

constexpr RepKind kAllReps[] = {RepKind::Euler3, RepKind::AxisAngle3, RepKind::Quat4,
                                RepKind::SixD,   RepKind::NineD,      RepKind::TenD};

CheckResult check_baseline_backward(RepKind rep, const Options& o) {
  const std::string name = "gradient.baseline_backward." + rep_suffix(rep);
  CounterRng rng = stream(o, name);
  const double h = 1e-5;
  Worst w;
  const long n = small_count(o);
  for (long i = 0; i < n; ++i) {
    const RawOutput raw = random_raw(rep, rng);
    const Rotation r = baseline_rotation(raw);
    const Rotation gt = random_near(r, rng.uniform(0.1, kPi - 0.2), rng);
    const Loss losses[] = {L2Loss{gt}, GeodesicLoss{gt}, FlowLoss{gt, random_points(rng, 8)}};
    for (const Loss& loss : losses) {
      const AmbientVector an = baseline_backward(raw, euclid_grad(loss, r));
      AmbientVector fd(raw.x.size());
      for (std::size_t k = 0; k < raw.x.size(); ++k) {
        RawOutput p = raw, m = raw;
        p.x[k] += h;
        m.x[k] -= h;
        fd[k] = (loss_value(loss, baseline_rotation(p)) - loss_value(loss, baseline_rotation(m))) /
                (2.0 * h);
      }
      w.update((an - fd).norm() / std::max(fd.norm(), 1e-3),
               case_label(i) + " loss " + std::to_string(loss.index()));
    }
  }
  return finish(name, w, 1e-4, 3 * n, "relative error against central differences over L2, geodesic, flow");
}

// ---------------------------------------------------------------- tau one step

CheckResult check_tau_one_step(const std::string& which, const Options& o) {
  const std::string name = "tau.one_step." + which;
  CounterRng rng = stream(o, name);
  Worst w;
  long n = 0;
  const long per_angle = small_count(o);
  for (double theta : {1e-2, 1e-3, 1e-4}) {
    for (long i = 0; i < per_angle; ++i, ++n) {
      double residual;
      if (which == "s2") {
        const Vec3 t = random_unit3(rng);
        Vec3 axis = cross(t, random_unit3(rng));
        axis = axis / norm(axis);
        const Vec3 x = exp_matrix(theta * axis) * t;
        const Vec3 next = s2_exp(x, -0.5 * s2_riemannian_grad(x, t));
        residual = std::atan2(norm(cross(next, t)), dot(next, t));
      } else {
        const Rotation gt = sample_uniform_rotation(rng);
        const Rotation r = random_near(gt, theta, rng);
        const Loss loss = which == "l2" ? Loss{L2Loss{gt}} : Loss{GeodesicLoss{gt}};
        const double tau = tau_converge_for(loss);
        const Rotation rg = goal_rotation(r, riemannian_grad(r, euclid_grad(loss, r)), tau);
        residual = geodesic_distance(rg, gt);
      }
      w.update(residual / (theta * theta * theta), "theta " + std::to_string(theta));
    }
  }
  return finish(name, w, 1.0, n, "residual after one step / theta^3");
}

// --------------------------------------------------------------- identities

CheckResult check_lambda_one(const Options& o) {
  CounterRng rng = stream(o, "identity.lambda1_mg");
  Worst w;
  long n = 0;
  for (RepKind rep : kManifoldReps)
    for (long i = 0; i < o.cases / 4 + 1; ++i, ++n) {
      const RawOutput raw = random_raw(rep, rng);
      const Rotation r = baseline_rotation(raw);
      const Loss loss = L2Loss{sample_uniform_rotation(rng)};
      const double tau = rng.uniform(0.01, 1.0);
      const AmbientVector a = rpmg_gradient(raw, r, loss, tau, {1.0, Method::RPMG});
      const AmbientVector b = rpmg_gradient(raw, r, loss, tau, {0.0, Method::MG});
      double differs = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k)
        if (std::bit_cast<std::uint64_t>(a[k]) != std::bit_cast<std::uint64_t>(b[k])) differs = 1.0;
      w.update(differs, rep_suffix(rep) + " " + case_label(i));
    }
  return finish("identity.lambda1_mg", w, 0.0, n, "1 if any bit of the lambda = 1 gradient differs from MG");
}

CheckResult check_mg_tau_gt(const Options& o) {
  CounterRng rng = stream(o, "identity.mg_tau_gt");
  Worst w;
  long n = 0;
  for (RepKind rep : kManifoldReps)
    for (long i = 0; i < o.cases / 4 + 1; ++i, ++n) {
      const RawOutput raw = random_raw(rep, rng);
      const Rotation r = baseline_rotation(raw);
      const Rotation gt = random_near(r, rng.uniform(1e-3, kPi - 0.1), rng);
      const double theta = geodesic_distance(r, gt);
      // One L2 step moves by 4 tau sin(theta); tau_gt lands on the target.
      const double tau_gt = theta / (4.0 * std::sin(theta));
      const AmbientVector g = rpmg_gradient(raw, r, L2Loss{gt}, tau_gt, {0.0, Method::MG});
      const AmbientVector expected = raw.x - goal_point(raw, gt);
      w.update(max_abs_diff(g.span(), expected.span()), rep_suffix(rep) + " " + case_label(i));
    }
  return finish("identity.mg_tau_gt", w, 1e-9, n, "max |g_MG(tau_gt) - (x - psi(R_gt))|");
}

// ---------------------------------------------------------------- roundtrip

CheckResult check_surjectivity(const Options& o) {
  CounterRng rng = stream(o, "roundtrip.surjectivity");
  Worst w;
  long n = 0;
  for (RepKind rep : kManifoldReps)
    for (long i = 0; i < o.cases; ++i, ++n) {
      const Rotation r = sample_uniform_rotation(rng);
      const RawOutput raw{rep, embed(representation_map(r, rep))};
      w.update(geodesic_distance(baseline_rotation(raw), r), rep_suffix(rep) + " " + case_label(i));
    }
  return finish("roundtrip.surjectivity", w, 1e-8, n, "geodesic distance after embed and map back");
}

CheckResult check_scale_invariance(const Options& o) {
  CounterRng rng = stream(o, "roundtrip.scale_invariance");
  Worst w;
  long n = 0;
  for (RepKind rep : {RepKind::Quat4, RepKind::SixD, RepKind::NineD})
    for (long i = 0; i < o.cases; ++i, ++n) {
      const RawOutput raw = random_raw(rep, rng);
      const Mat3 base = baseline_rotation(raw).matrix();
      RawOutput scaled = raw;
      scaled.x *= std::pow(10.0, rng.uniform(-2.0, 2.0));
      double d = max_abs(baseline_rotation(scaled).matrix() - base);
      if (rep == RepKind::SixD) {
        // Positive column scaling and adding multiples of u to v.
        RawOutput moved = raw;
        const double k1 = rng.uniform(0.1, 10.0), k2 = rng.uniform(0.1, 10.0);
        const double a = rng.uniform(-5.0, 5.0);
        for (std::size_t k = 0; k < 3; ++k) {
          moved.x[3 + k] = k2 * raw.x[3 + k] + a * raw.x[k];
          moved.x[k] = k1 * raw.x[k];
        }
        d = std::max(d, max_abs(baseline_rotation(moved).matrix() - base));
      }
      w.update(d, rep_suffix(rep) + " " + case_label(i));
    }
  return finish("roundtrip.scale_invariance", w, 1e-9, n, "max entry change of the mapped rotation");
}

const std::vector<Check>& registry() {
  static const std::vector<Check> checks = [] {
    std::vector<Check> c{
        {"numerics.svd3", check_svd},
        {"numerics.eig_sym4", check_eig},
        {"numerics.eig_charpoly", check_charpoly},
        {"numerics.solve_dense", check_solve},
    };
    for (RepKind rep : kManifoldReps)
      c.push_back({"projection.optimality." + rep_suffix(rep),
                   [rep](const Options& o) { return check_optimality(rep, o); }});
    for (RepKind rep : kManifoldReps)
      c.push_back({"projection.membership." + rep_suffix(rep),
                   [rep](const Options& o) { return check_membership(rep, o); }});
    c.push_back({"projection.kkt_10d", check_kkt});
    for (RepKind rep : kManifoldReps)
      c.push_back({"projection.contraction." + rep_suffix(rep),
                   [rep](const Options& o) { return check_contraction(rep, o); }});
    c.push_back({"projection.norm_ordering", check_norm_ordering});
    c.push_back({"projection.reversed_quat", check_reversed_quat});
    for (LossName l : {LossName::L2, LossName::Geodesic, LossName::Flow, LossName::Chamfer})
      c.push_back({"gradient.riemannian." + std::string(to_string(l)),
                   [l](const Options& o) { return check_riemannian(l, o); }});
    c.push_back({"gradient.hand_case", check_hand_case});
    c.push_back({"gradient.geodesic_path", check_geodesic_path});
    for (RepKind rep : kAllReps)
      c.push_back({"gradient.baseline_backward." + rep_suffix(rep),
                   [rep](const Options& o) { return check_baseline_backward(rep, o); }});
    for (const char* which : {"l2", "geodesic", "s2"})
      c.push_back({std::string("tau.one_step.") + which,
                   [which](const Options& o) { return check_tau_one_step(which, o); }});
    c.push_back({"identity.lambda1_mg", check_lambda_one});
    c.push_back({"identity.mg_tau_gt", check_mg_tau_gt});
    c.push_back({"roundtrip.surjectivity", check_surjectivity});
    c.push_back({"roundtrip.scale_invariance", check_scale_invariance});
    return c;
  }();
  return checks;
}

}  // namespace

double oracle_min_distance(const RawOutput& x, const AmbientVector& goal, const Rotation& r_goal) {
  switch (x.rep) {
    case RepKind::Quat4: return oracle_quat(x.x, goal);
    case RepKind::SixD: return oracle_6d(x.x, goal);
    case RepKind::NineD: return oracle_9d(x.x, r_goal);
    case RepKind::TenD: return oracle_10d(x.x, rot_to_quat(r_goal));
    default: return (x.x - goal).norm();
  }
}

std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const Check& c : registry()) out.push_back(c.name);
  return out;
}

std::vector<CheckResult> run_checks(const Options& options) {
  std::vector<CheckResult> out;
  for (const Check& c : registry()) {
    if (!options.filter.empty() && c.name.find(options.filter) == std::string::npos) continue;
    try {
      out.push_back(c.run(options));
    } catch (const Error& e) {
      CheckResult r;
      r.name = c.name;
      r.residual = std::numeric_limits<double>::infinity();
      r.detail = std::string("threw: ") + e.what();
      out.push_back(r);
    }
  }
  return out;
}

std::string format(const CheckResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %-36s residual=%.3e tol=%.1e cases=%ld",
                !r.asserted ? "INFO" : (r.passed ? "PASS" : "FAIL"), r.name.c_str(), r.residual,
                r.tolerance, r.cases);
  std::string out = buf;
  if (!r.detail.empty()) out += "  " + r.detail;
  return out;
}

}  // namespace rotgrad::verify
