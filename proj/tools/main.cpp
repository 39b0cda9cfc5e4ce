// rotgrad: fit a single rotation, train the synthetic point-cloud regressor,
// probe goal step sizes, or run the invariant suite.
//
// Exit status: 0 success, 1 failed check, 2 configuration error, 3 numeric failure.
#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <optional>
#include <thread>

#include "manifest.hpp"
#include "rotgrad/harness.hpp"
#include "rotgrad/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rotgrad;
using namespace rotgrad::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

struct Options {
  std::string rep = "9d";
  std::string method = "rpmg";
  std::vector<std::string> methods;
  std::string loss = "l2";
  double lambda = 0.01;
  std::optional<double> tau;
  std::optional<double> tau_init;
  std::optional<double> tau_converge;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  std::optional<long> iters;
  std::optional<double> lr;
  std::size_t batch = 32;
  std::string out_dir;
  bool sphere = false;
  unsigned jobs = 1;
  std::string filter;
  long cases = 1000;
  std::vector<double> taus{0.01, 0.05, 0.1, 0.25, 0.5, 1, 2, 5, 10, 50};
};

fs::path output_root(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("ROTGRAD_OUT_DIR"); env && *env) return env;
  return "rotgrad_out";
}

TauSpec tau_spec(const Options& o, LossName loss) {
  TauSpec spec;
  if (o.tau) {
    spec.kind = TauSpec::Kind::Constant;
    spec.constant = *o.tau;
  } else if (o.tau_init || o.tau_converge) {
    spec.kind = TauSpec::Kind::Schedule;
    if (!o.tau_init || !o.tau_converge) {
      const TauSchedule defaults = o.sphere ? resolve_tau_s2({}, 1) : resolve_tau({}, loss, 1);
      spec.tau_init = o.tau_init.value_or(defaults.tau_init);
      spec.tau_converge = o.tau_converge.value_or(defaults.tau_converge);
    } else {
      spec.tau_init = *o.tau_init;
      spec.tau_converge = *o.tau_converge;
    }
  }
  return spec;
}

json tau_json(const TauSpec& t) {
  switch (t.kind) {
    case TauSpec::Kind::Auto: return {{"mode", "auto"}};
    case TauSpec::Kind::Constant: return {{"mode", "constant"}, {"value", t.constant}};
    case TauSpec::Kind::Schedule:
      return {{"mode", "schedule"},
              {"init", t.tau_init},
              {"converge", t.tau_converge},
              {"steps", t.n_steps}};
  }
  return {};
}

json experiment_json(const std::string& command, const ExperimentConfig& c, bool sphere) {
  json j = {{"command", command},
            {"loss", to_string(c.loss)},
            {"lambda", c.lambda},
            {"tau", tau_json(c.tau)},
            {"seed", c.seed},
            {"iters", c.iters},
            {"batch", c.batch},
            {"n_points", c.n_points},
            {"n_samples", c.n_samples},
            {"lr", c.lr},
            {"eval_interval", c.eval_interval},
            {"hidden", c.hidden},
            {"sphere", sphere}};
  if (sphere) {
    j["method"] = to_string(c.s2_method);
  } else {
    j["rep"] = to_string(c.rep);
    j["method"] = to_string(c.method);
  }
  return j;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

int cmd_fit(const Options& o) {
  FitConfig c;
  c.rep = parse_rep(o.rep);
  c.method = parse_method(o.method);
  c.loss = parse_loss(o.loss);
  c.lambda = o.lambda;
  c.tau = tau_spec(o, c.loss);
  c.seed = o.seed;
  c.iters = o.iters.value_or(c.iters);
  c.lr = o.lr.value_or(c.lr);

  RunManifest m;
  m.config = {{"command", "fit"},     {"rep", to_string(c.rep)},   {"method", to_string(c.method)},
              {"loss", to_string(c.loss)}, {"lambda", c.lambda}, {"tau", tau_json(c.tau)},
              {"seed", c.seed},        {"iters", c.iters},          {"lr", c.lr}};
  m.started = utc_timestamp();
  const FitTrace t = fit_single_rotation(c);
  m.finished = utc_timestamp();

  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < t.errors.size(); ++i) {
    MetricsRow r = metrics_from_errors({t.errors[i] * kRadToDeg});
    r.iteration = static_cast<long>(i);
    r.mean_norm = t.norms[i];
    rows.push_back(r);
  }

  const fs::path dir = output_root(o);
  ensure_dir(dir);
  const std::string stem = "fit_" + o.rep + "_" + o.method + "_" + o.loss + "_s" +
                           std::to_string(o.seed);
  const fs::path csv = dir / (stem + ".csv"), report = dir / (stem + ".json");
  m.outputs = {report, csv};
  write_metrics_csv(csv, rows);
  json result = {{"iterations", static_cast<long>(t.errors.size()) - 1},
                 {"final_error_rad", t.errors.back()},
                 {"final_norm", t.norms.back()},
                 {"aborted", t.aborted},
                 {"diagnostic", t.diagnostic}};
  write_report(report, "fit", m, result);

  std::printf("fit %s %s: final error %.3e rad after %zu steps -> %s\n", o.rep.c_str(),
              o.method.c_str(), t.errors.back(), t.errors.size() - 1, report.c_str());
  if (t.aborted) {
    std::fprintf(stderr, "numeric failure: %s\n", t.diagnostic.c_str());
    return kExitNumeric;
  }
  return kExitOk;
}

struct Cell {
  std::string method;
  std::uint64_t seed;
  ExperimentConfig config;
  std::optional<MetricsReport> report;
  std::string error;
  bool numeric = false;
  fs::path json_path;
};

int cmd_train(const Options& o) {
  const LossName loss = parse_loss(o.loss);
  const std::vector<std::string> methods = o.methods.empty() ? std::vector{o.method} : o.methods;
  const std::vector<std::uint64_t> seeds = o.seeds.empty() ? std::vector{o.seed} : o.seeds;
  const RepKind rep = parse_rep(o.rep);
  const TauSpec tau = tau_spec(o, loss);

  std::vector<Cell> cells;
  for (const std::string& name : methods)
    for (std::uint64_t seed : seeds) {
      Cell cell{name, seed, {}, {}, {}, false, {}};
      ExperimentConfig& c = cell.config;
      c.rep = rep;
      if (o.sphere) {
        c.s2_method = parse_s2_method(name);
      } else {
        c.method = parse_method(name);
      }
      c.loss = loss;
      c.lambda = o.lambda;
      c.tau = tau;
      c.seed = seed;
      c.iters = o.iters.value_or(c.iters);
      c.lr = o.lr.value_or(c.lr);
      c.batch = o.batch;
      validate(c);
      cells.push_back(std::move(cell));
    }

  const fs::path dir = output_root(o);
  ensure_dir(dir);
  const std::string prefix = o.sphere ? "sphere_" : "train_" + o.rep + "_";
  const std::string command = o.sphere ? "train-sphere" : "train";
  std::mutex io;
  std::atomic<std::size_t> next{0};

  auto run_cell = [&](Cell& cell) {
    RunManifest m;
    m.config = experiment_json(command, cell.config, o.sphere);
    m.started = utc_timestamp();
    try {
      cell.report = o.sphere ? train_s2(cell.config) : train(cell.config);
    } catch (const NumericFailure& e) {
      cell.error = e.what();
      cell.numeric = true;
      std::lock_guard lock(io);
      std::fprintf(stderr, "%s seed %llu: numeric failure: %s\n", cell.method.c_str(),
                   static_cast<unsigned long long>(cell.seed), e.what());
      return;
    }
    m.finished = utc_timestamp();
    const std::string stem =
        prefix + cell.method + (o.sphere ? "" : "_" + o.loss) + "_s" + std::to_string(cell.seed);
    const fs::path csv = dir / (stem + ".csv");
    cell.json_path = dir / (stem + ".json");
    m.outputs = {cell.json_path, csv};
    write_metrics_csv(csv, cell.report->evals);
    write_report(cell.json_path, command, m,
                 {{"final", metrics_json(cell.report->final)},
                  {"initial", metrics_json(cell.report->evals.front())},
                  {"evaluations", static_cast<long>(cell.report->evals.size())},
                  {"degenerate_samples", cell.report->degenerate_samples},
                  {"antipodal_samples", cell.report->antipodal_samples}});
    std::lock_guard lock(io);
    std::printf("%s seed %llu: median %.3f deg, mean %.3f deg, |x| %.3f -> %s\n",
                cell.method.c_str(), static_cast<unsigned long long>(cell.seed),
                cell.report->final.median_deg, cell.report->final.mean_deg,
                cell.report->final.mean_norm, cell.json_path.c_str());
    std::fflush(stdout);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(o.jobs, cells.size()));
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < cells.size();) {
        try {
          run_cell(cells[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  if (cells.size() > 1) {
    RunManifest m;
    m.config = experiment_json(command + "-sweep", cells.front().config, o.sphere);
    m.config["methods"] = methods;
    m.config["seeds"] = seeds;
    m.config.erase("method");
    m.config.erase("seed");
    m.started = m.finished = utc_timestamp();
    json medians = json::object();
    for (const Cell& cell : cells) {
      json& row = medians[cell.method];
      row.push_back(cell.report ? json(cell.report->final.median_deg) : json(nullptr));
      if (cell.report) m.outputs.push_back(cell.json_path);
    }
    const fs::path trend = dir / (prefix + (o.sphere ? "" : o.loss + "_") + "trend.json");
    m.outputs.insert(m.outputs.begin(), trend);
    write_report(trend, "trend", m, {{"seeds", seeds}, {"median_deg", medians}});
    std::printf("trend -> %s\n", trend.c_str());
  }

  for (const Cell& cell : cells)
    if (cell.numeric) return kExitNumeric;
  return kExitOk;
}

int cmd_probe(const Options& o) {
  ExperimentConfig c;
  c.rep = parse_rep(o.rep);
  c.method = parse_method(o.method);
  c.loss = parse_loss(o.loss);
  c.lambda = o.lambda;
  c.tau = tau_spec(o, c.loss);
  c.seed = o.seed;
  c.iters = o.iters.value_or(c.iters);
  c.lr = o.lr.value_or(c.lr);
  c.batch = o.batch;
  validate(c);

  RunManifest m;
  m.config = experiment_json("probe", c, false);
  m.config["taus"] = o.taus;
  m.started = utc_timestamp();
  const std::vector<TauProbe> probes = probe_tau(c, o.taus);
  m.finished = utc_timestamp();

  json rows = json::array();
  for (const TauProbe& p : probes) {
    rows.push_back({{"tau", p.tau}, {"mean_goal_distance_rad", p.mean_goal_distance}});
    std::printf("tau %-8g mean distance to goal %.4f rad (%.2f deg)\n", p.tau,
                p.mean_goal_distance, p.mean_goal_distance * kRadToDeg);
  }
  const fs::path dir = output_root(o);
  ensure_dir(dir);
  const fs::path report =
      dir / ("probe_" + o.rep + "_" + o.method + "_" + o.loss + "_s" + std::to_string(o.seed) +
             ".json");
  m.outputs = {report};
  write_report(report, "probe", m, {{"probes", rows}});
  return kExitOk;
}

int cmd_check(const Options& o) {
  verify::Options v;
  v.filter = o.filter;
  v.seed = o.seed;
  v.cases = o.cases;
  const auto results = verify::run_checks(v);
  if (results.empty()) throw ConfigError("no check matches filter '" + o.filter + "'");
  std::vector<std::string> failed;
  for (const auto& r : results) {
    std::printf("%s\n", verify::format(r).c_str());
    if (!r.passed) failed.push_back(r.name);
  }
  std::printf("%zu checks, %zu failed\n", results.size(), failed.size());
  for (const auto& name : failed) std::fprintf(stderr, "failed check: %s\n", name.c_str());
  return failed.empty() ? kExitOk : kExitCheckFailed;
}

void add_model_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--rep", o.rep, "quat, 6d, 9d, 10d, euler, axis-angle");
  cmd->add_option("--method", o.method, "vanilla, mg, pmg, rpmg");
  cmd->add_option("--loss", o.loss, "l2, geodesic, flow, chamfer");
  cmd->add_option("--lambda", o.lambda, "weight of the manifold term");
  auto* tau = cmd->add_option("--tau", o.tau, "constant goal step size");
  cmd->add_option("--tau-init", o.tau_init, "first step size of the staircase")->excludes(tau);
  cmd->add_option("--tau-converge", o.tau_converge, "final step size of the staircase")
      ->excludes(tau);
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--iters", o.iters);
  cmd->add_option("--lr", o.lr, "learning rate");
  cmd->add_option("--out-dir", o.out_dir, "output directory (default $ROTGRAD_OUT_DIR)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation regression with manifold-aware gradients"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "gradient descent on one raw output toward one rotation");
  add_model_options(fit, o);

  auto* train = app.add_subcommand("train", "train the point-cloud regressor");
  add_model_options(train, o);
  train->add_option("--methods", o.methods, "comma-separated sweep, one report per method")
      ->delimiter(',');
  train->add_option("--seeds", o.seeds, "comma-separated seeds for a sweep")->delimiter(',');
  train->add_option("--batch", o.batch);
  train->add_flag("--sphere", o.sphere,
                  "regress the unit vector R e3; methods l2-norm, l2-raw, mg, pmg, rpmg");
  train->add_option("--jobs", o.jobs, "sweep cells run in parallel");

  auto* probe = app.add_subcommand("probe", "train, then report mean distance to the goal per tau");
  add_model_options(probe, o);
  probe->add_option("--batch", o.batch);
  probe->add_option("--taus", o.taus, "comma-separated candidates")->delimiter(',');

  auto* check = app.add_subcommand("check", "run the invariant and oracle suite");
  check->add_option("--filter", o.filter, "substring of check names");
  check->add_option("--seed", o.seed);
  check->add_option("--cases", o.cases);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*fit) return cmd_fit(o);
    if (*train) return cmd_train(o);
    if (*probe) return cmd_probe(o);
    if (*check) return cmd_check(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericFailure& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
