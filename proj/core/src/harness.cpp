#include "rotgrad/harness.hpp"

#include "rotgrad/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace rotgrad {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Rows [begin, end) of a batch.
Batch slice_rows(const Batch& b, std::size_t begin, std::size_t end) {
  Batch out(end - begin, b.cols);
  std::copy(b.data.begin() + static_cast<std::ptrdiff_t>(begin * b.cols),
            b.data.begin() + static_cast<std::ptrdiff_t>(end * b.cols), out.data.begin());
  return out;
}

double mean_row_norm(const Batch& b) {
  double s = 0.0;
  for (std::size_t r = 0; r < b.rows; ++r) {
    double n2 = 0.0;
    for (double v : b.row(r)) n2 += v * v;
    s += std::sqrt(n2);
  }
  return b.rows ? s / static_cast<double>(b.rows) : 0.0;
}

std::vector<std::size_t> network_sizes(const ExperimentConfig& c, std::size_t in,
                                       std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), c.hidden.begin(), c.hidden.end());
  sizes.push_back(out);
  return sizes;
}

Batch sample_batch(const SyntheticDataset& data, std::size_t batch, CounterRng& rng,
                   std::vector<std::size_t>& indices) {
  Batch in(batch, data.inputs.cols);
  indices.resize(batch);
  for (std::size_t r = 0; r < batch; ++r) {
    const std::size_t i = static_cast<std::size_t>(rng() % data.train_count);
    indices[r] = i;
    std::copy(data.inputs.row(i).begin(), data.inputs.row(i).end(), in.row(r).begin());
  }
  return in;
}

void require_finite(const Batch& out, long iteration) {
  for (double v : out.data)
    if (!std::isfinite(v))
      throw NumericFailure("non-finite network output at iteration " + std::to_string(iteration));
}

MetricsRow evaluate_so3(const Mlp& mlp, const SyntheticDataset& data, const Batch& test,
                        RepKind rep, long iteration) {
  const Batch out = forward(mlp, test);
  std::vector<double> errors;
  errors.reserve(out.rows);
  for (std::size_t r = 0; r < out.rows; ++r) {
    const Rotation& gt = data.rotations[data.train_count + r];
    try {
      const Rotation pred = baseline_rotation({rep, AmbientVector::from_span(out.row(r))});
      errors.push_back(geodesic_distance(pred, gt) * kRadToDeg);
    } catch (const DegenerateInput&) {
      errors.push_back(180.0);
    }
  }
  MetricsRow row = metrics_from_errors(std::move(errors));
  row.iteration = iteration;
  row.mean_norm = mean_row_norm(out);
  return row;
}

Vec3 s2_target(const Rotation& r) { return r.col(2); }

MetricsRow evaluate_s2(const Mlp& mlp, const SyntheticDataset& data, const Batch& test,
                       long iteration) {
  const Batch out = forward(mlp, test);
  std::vector<double> errors;
  errors.reserve(out.rows);
  for (std::size_t r = 0; r < out.rows; ++r) {
    const Vec3 t = s2_target(data.rotations[data.train_count + r]);
    const Vec3 x{{out(r, 0), out(r, 1), out(r, 2)}};
    const double n = norm(x);
    if (!(n > 1e-8)) {
      errors.push_back(180.0);
      continue;
    }
    const Vec3 xh = x / n;
    errors.push_back(std::atan2(norm(cross(xh, t)), dot(xh, t)) * kRadToDeg);
  }
  MetricsRow row = metrics_from_errors(std::move(errors));
  row.iteration = iteration;
  row.mean_norm = mean_row_norm(out);
  return row;
}

struct TrainedModel {
  Mlp mlp;
  SyntheticDataset data;
  MetricsReport report;
};

TrainedModel train_so3_model(const ExperimentConfig& c) {
  validate(c);
  const TauSchedule schedule = resolve_tau(c.tau, c.loss, std::max(c.iters, 1L));
  const RpmgParams params{c.lambda, c.method};

  CounterRng root(c.seed);
  CounterRng init_rng = root.split(2);
  CounterRng batch_rng = root.split(3);
  TrainedModel m{Mlp(network_sizes(c, 3 * c.n_points, ambient_dim(c.rep)), init_rng),
                 make_dataset(c.n_points, c.n_samples, root.split(1)()),
                 {}};
  const Batch test = slice_rows(m.data.inputs, m.data.train_count, m.data.inputs.rows);
  AdamState adam(m.mlp.params().size(), c.lr);

  std::vector<std::size_t> indices;
  ForwardCache cache;
  const double inv_batch = 1.0 / static_cast<double>(c.batch);
  for (long it = 0; it < c.iters; ++it) {
    if (it % c.eval_interval == 0)
      m.report.evals.push_back(evaluate_so3(m.mlp, m.data, test, c.rep, it));

    const Batch in = sample_batch(m.data, c.batch, batch_rng, indices);
    const Batch out = forward(m.mlp, in, &cache);
    require_finite(out, it);
    Batch dout(out.rows, out.cols);
    const double tau = tau_at(schedule, it);
    for (std::size_t r = 0; r < out.rows; ++r) {
      const RawOutput raw{c.rep, AmbientVector::from_span(out.row(r))};
      const Rotation& gt = m.data.rotations[indices[r]];
      AmbientVector g;
      try {
        const Rotation pred = baseline_rotation(raw);
        const Loss loss = make_loss(c.loss, gt, m.data.canonical);
        if (!std::isfinite(loss_value(loss, pred)))
          throw NumericFailure("non-finite loss at iteration " + std::to_string(it));
        g = rpmg_gradient(raw, pred, loss, tau, params);
      } catch (const DegenerateInput&) {
        ++m.report.degenerate_samples;
        continue;
      }
      if (!g.is_finite())
        throw NumericFailure("non-finite gradient at iteration " + std::to_string(it));
      for (std::size_t k = 0; k < g.size(); ++k) dout(r, k) = g[k] * inv_batch;
    }
    const std::vector<double> grads = backward(m.mlp, cache, dout);
    adam_step(adam, m.mlp.params(), grads);
  }
  m.report.evals.push_back(evaluate_so3(m.mlp, m.data, test, c.rep, c.iters));
  m.report.final = m.report.evals.back();
  return m;
}

}  // namespace

std::string_view to_string(LossName l) {
  switch (l) {
    case LossName::L2: return "l2";
    case LossName::Geodesic: return "geodesic";
    case LossName::Flow: return "flow";
    case LossName::Chamfer: return "chamfer";
  }
  return "?";
}

LossName parse_loss(std::string_view name) {
  for (LossName l : {LossName::L2, LossName::Geodesic, LossName::Flow, LossName::Chamfer})
    if (name == to_string(l)) return l;
  throw ConfigError("unknown loss '" + std::string(name) +
                    "' (valid: l2, geodesic, flow, chamfer)");
}

std::string_view to_string(S2Method m) {
  switch (m) {
    case S2Method::L2WithNorm: return "l2-norm";
    case S2Method::L2WithoutNorm: return "l2-raw";
    case S2Method::MG: return "mg";
    case S2Method::PMG: return "pmg";
    case S2Method::RPMG: return "rpmg";
  }
  return "?";
}

S2Method parse_s2_method(std::string_view name) {
  for (S2Method m : {S2Method::L2WithNorm, S2Method::L2WithoutNorm, S2Method::MG,
                     S2Method::PMG, S2Method::RPMG})
    if (name == to_string(m)) return m;
  throw ConfigError("unknown sphere method '" + std::string(name) +
                    "' (valid: l2-norm, l2-raw, mg, pmg, rpmg)");
}

namespace {

TauSchedule schedule_from(const TauSpec& spec, double auto_init, double auto_converge,
                          long total_iters) {
  TauSchedule s;
  s.total_iters = total_iters;
  switch (spec.kind) {
    case TauSpec::Kind::Auto:
      s.tau_init = auto_init;
      s.tau_converge = auto_converge;
      s.n_steps = 10;
      break;
    case TauSpec::Kind::Constant:
      s.tau_init = s.tau_converge = spec.constant;
      s.n_steps = 1;
      break;
    case TauSpec::Kind::Schedule:
      s.tau_init = spec.tau_init;
      s.tau_converge = spec.tau_converge;
      s.n_steps = spec.n_steps;
      break;
  }
  validate(s);
  return s;
}

}  // namespace

TauSchedule resolve_tau(const TauSpec& spec, LossName loss, long total_iters) {
  double converge = 0.0;
  if (spec.kind == TauSpec::Kind::Auto) {
    const Rotation id;
    converge = tau_converge_for(make_loss(loss, id, PointSet{Vec3{}}));
  }
  return schedule_from(spec, 0.05, converge, total_iters);
}

TauSchedule resolve_tau_s2(const TauSpec& spec, long total_iters) {
  return schedule_from(spec, 0.1, 0.5, total_iters);
}

void validate(const ExperimentConfig& c) {
  if (c.iters < 0) throw ConfigError("iters must be >= 0");
  if (c.batch == 0) throw ConfigError("batch must be positive");
  if (c.n_points < 4) throw ConfigError("n_points must be at least 4");
  if (c.n_samples < 5) throw ConfigError("n_samples must be at least 5");
  if (c.eval_interval <= 0) throw ConfigError("eval interval must be positive");
  if (!(c.lr > 0.0)) throw ConfigError("lr must be positive");
  validate(RpmgParams{c.lambda, c.method});
}

MetricsRow metrics_from_errors(std::vector<double> e) {
  if (e.empty()) throw ConfigError("metrics: empty input");
  MetricsRow row;
  const double n = static_cast<double>(e.size());
  row.mean_deg = std::accumulate(e.begin(), e.end(), 0.0) / n;
  row.acc5 = static_cast<double>(std::count_if(e.begin(), e.end(), [](double x) { return x < 5.0; })) / n;
  row.acc3 = static_cast<double>(std::count_if(e.begin(), e.end(), [](double x) { return x < 3.0; })) / n;
  const auto mid = e.begin() + static_cast<std::ptrdiff_t>((e.size() - 1) / 2);
  std::nth_element(e.begin(), mid, e.end());
  row.median_deg = *mid;
  return row;
}

MetricsRow compute_metrics(std::span<const Rotation> predictions,
                           std::span<const Rotation> ground_truths) {
  if (predictions.size() != ground_truths.size())
    throw ConfigError("metrics: prediction and ground-truth counts differ");
  std::vector<double> e;
  e.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i)
    e.push_back(geodesic_distance(predictions[i], ground_truths[i]) * kRadToDeg);
  return metrics_from_errors(std::move(e));
}

SyntheticDataset make_dataset(std::size_t n_points, std::size_t n_samples, std::uint64_t seed) {
  if (n_points < 4) throw ConfigError("dataset needs at least 4 points");
  CounterRng root(seed);
  CounterRng point_rng = root.split(1);
  CounterRng rot_rng = root.split(2);

  SyntheticDataset d;
  for (;;) {
    d.canonical.clear();
    for (std::size_t i = 0; i < n_points; ++i)
      d.canonical.push_back({{point_rng.uniform(-1, 1), point_rng.uniform(-1, 1),
                              point_rng.uniform(-1, 1)}});
    Vec3 mean;
    for (const Vec3& p : d.canonical) mean += p;
    mean = mean / static_cast<double>(n_points);
    Mat3 scatter;
    for (const Vec3& p : d.canonical) scatter += outer(p - mean, p - mean);
    const SvdResult s = svd3(scatter);
    if (s.sigma[2] > 1e-3 * s.sigma[0]) break;
  }

  d.inputs = Batch(n_samples, 3 * n_points);
  d.rotations.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Rotation r = sample_uniform_rotation(rot_rng);
    d.rotations.push_back(r);
    for (std::size_t k = 0; k < n_points; ++k) {
      const Vec3 p = r * d.canonical[k];
      for (std::size_t j = 0; j < 3; ++j) d.inputs(i, 3 * k + j) = p[j];
    }
  }
  d.train_count = n_samples * 4 / 5;
  return d;
}

Loss make_loss(LossName name, const Rotation& target, const PointSet& canonical) {
  switch (name) {
    case LossName::L2: return L2Loss{target};
    case LossName::Geodesic: return GeodesicLoss{target};
    case LossName::Flow: return FlowLoss{target, canonical};
    case LossName::Chamfer: {
      PointSet observed;
      observed.reserve(canonical.size());
      for (const Vec3& z : canonical) observed.push_back(target * z);
      return ChamferLoss{canonical, std::move(observed)};
    }
  }
  throw ConfigError("unknown loss");
}

MetricsReport train(const ExperimentConfig& config) {
  return train_so3_model(config).report;
}

MetricsReport train_s2(const ExperimentConfig& c) {
  validate(c);
  const TauSchedule schedule = resolve_tau_s2(c.tau, std::max(c.iters, 1L));
  CounterRng root(c.seed);
  CounterRng init_rng = root.split(2);
  CounterRng batch_rng = root.split(3);
  Mlp mlp(network_sizes(c, 3 * c.n_points, 3), init_rng);
  const SyntheticDataset data = make_dataset(c.n_points, c.n_samples, root.split(1)());
  const Batch test = slice_rows(data.inputs, data.train_count, data.inputs.rows);
  AdamState adam(mlp.params().size(), c.lr);

  MetricsReport report;
  S2Diagnostics diag;
  std::vector<std::size_t> indices;
  ForwardCache cache;
  const double inv_batch = 1.0 / static_cast<double>(c.batch);
  for (long it = 0; it < c.iters; ++it) {
    if (it % c.eval_interval == 0) report.evals.push_back(evaluate_s2(mlp, data, test, it));
    const Batch in = sample_batch(data, c.batch, batch_rng, indices);
    const Batch out = forward(mlp, in, &cache);
    require_finite(out, it);
    Batch dout(out.rows, 3);
    const double tau = tau_at(schedule, it);
    for (std::size_t r = 0; r < out.rows; ++r) {
      const Vec3 x{{out(r, 0), out(r, 1), out(r, 2)}};
      const Vec3 t = s2_target(data.rotations[indices[r]]);
      Vec3 g;
      try {
        switch (c.s2_method) {
          case S2Method::L2WithNorm: {
            const Vec3 xh = s2_map(x);
            const Vec3 d = 2.0 * (xh - t);
            g = (d - dot(xh, d) * xh) / norm(x);
            break;
          }
          case S2Method::L2WithoutNorm: g = 2.0 * (x - t); break;
          case S2Method::MG: g = s2_rpmg_gradient(x, t, tau, 1.0, &diag); break;
          case S2Method::PMG: g = s2_rpmg_gradient(x, t, tau, 0.0, &diag); break;
          case S2Method::RPMG: g = s2_rpmg_gradient(x, t, tau, c.lambda, &diag); break;
        }
      } catch (const DegenerateInput&) {
        ++report.degenerate_samples;
        continue;
      }
      for (std::size_t k = 0; k < 3; ++k) {
        if (!std::isfinite(g[k]))
          throw NumericFailure("non-finite gradient at iteration " + std::to_string(it));
        dout(r, k) = g[k] * inv_batch;
      }
    }
    adam_step(adam, mlp.params(), backward(mlp, cache, dout));
  }
  report.evals.push_back(evaluate_s2(mlp, data, test, c.iters));
  report.final = report.evals.back();
  report.antipodal_samples = diag.antipodal;
  return report;
}

std::vector<TauProbe> probe_tau(const ExperimentConfig& config,
                                std::span<const double> candidates) {
  const TrainedModel m = train_so3_model(config);
  const Batch test = slice_rows(m.data.inputs, m.data.train_count, m.data.inputs.rows);
  const Batch out = forward(m.mlp, test);

  std::vector<Rotation> preds;
  std::vector<TangentSO3> grads;
  for (std::size_t r = 0; r < out.rows; ++r) {
    try {
      const Rotation pred = baseline_rotation({config.rep, AmbientVector::from_span(out.row(r))});
      const Loss loss = make_loss(config.loss, m.data.rotations[m.data.train_count + r],
                                  m.data.canonical);
      grads.push_back(riemannian_grad(pred, euclid_grad(loss, pred)));
      preds.push_back(pred);
    } catch (const DegenerateInput&) {
    }
  }
  std::vector<TauProbe> probes;
  for (double tau : candidates) {
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
      s += geodesic_distance(preds[i], goal_rotation(preds[i], grads[i], tau));
    probes.push_back({tau, preds.empty() ? 0.0 : s / static_cast<double>(preds.size())});
  }
  return probes;
}

FitTrace fit_single_rotation(const FitConfig& c) {
  validate(RpmgParams{c.lambda, c.method});
  if (c.iters < 0) throw ConfigError("iters must be >= 0");
  if (!(c.lr > 0.0)) throw ConfigError("lr must be positive");
  const TauSchedule schedule = resolve_tau(c.tau, c.loss, std::max(c.iters, 1L));

  CounterRng root(c.seed);
  CounterRng target_rng = root.split(1);
  CounterRng init_rng = root.split(2);
  const Rotation target = c.target ? *c.target : sample_uniform_rotation(target_rng);
  const Rotation init = c.init ? *c.init : sample_uniform_rotation(init_rng);
  const PointSet canonical = make_dataset(16, 1, root.split(3)()).canonical;
  const Loss loss = make_loss(c.loss, target, canonical);
  const RpmgParams params{c.lambda, c.method};

  FitTrace trace;
  RawOutput x{c.rep, embed(representation_map(init, c.rep))};
  try {
    for (long it = 0;; ++it) {
      const Rotation r = baseline_rotation(x);
      trace.errors.push_back(geodesic_distance(r, target));
      trace.norms.push_back(x.x.norm());
      if (it == c.iters) break;
      const AmbientVector g = rpmg_gradient(x, r, loss, tau_at(schedule, it), params);
      if (!g.is_finite()) throw NumericFailure("non-finite gradient");
      x.x -= c.lr * g;
    }
  } catch (const NumericFailure& e) {
    trace.aborted = true;
    trace.diagnostic = e.what();
  }
  return trace;
}

}  // namespace rotgrad
