// Desk-scale experiments: direct fitting of a single rotation, MLP training on
// synthetic rotated point sets, unit-vector regression on S^2, and metrics.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rotgrad/nn.hpp"
#include "rotgrad/representations.hpp"
#include "rotgrad/riemannian.hpp"
#include "rotgrad/rpmg.hpp"

namespace rotgrad {

enum class LossName { L2, Geodesic, Flow, Chamfer };

std::string_view to_string(LossName l);
LossName parse_loss(std::string_view name);

// Step-size source for the goal rotation.
struct TauSpec {
  enum class Kind { Auto, Constant, Schedule };
  Kind kind = Kind::Auto;
  double constant = 0.25;
  double tau_init = 0.05;
  double tau_converge = 0.25;
  int n_steps = 10;
};

/// Auto: tau_init 0.05 ramped to tau_converge_for(loss) in 10 steps.
/// Constant: a one-step schedule. Throws ConfigError for Auto with a loss
/// that has no analytic tau_converge.
TauSchedule resolve_tau(const TauSpec& spec, LossName loss, long total_iters);

/// Auto on S^2 ramps from 0.1 to 0.5.
TauSchedule resolve_tau_s2(const TauSpec& spec, long total_iters);

enum class S2Method { L2WithNorm, L2WithoutNorm, MG, PMG, RPMG };

std::string_view to_string(S2Method m);
S2Method parse_s2_method(std::string_view name);

struct ExperimentConfig {
  RepKind rep = RepKind::NineD;
  Method method = Method::RPMG;
  S2Method s2_method = S2Method::RPMG;  // used by train_s2 only
  LossName loss = LossName::L2;
  double lambda = 0.01;
  TauSpec tau;
  std::uint64_t seed = 0;
  long iters = 5000;
  std::size_t batch = 32;
  std::size_t n_points = 16;
  std::size_t n_samples = 2048;
  double lr = 1e-3;
  long eval_interval = 100;
  std::vector<std::size_t> hidden{128, 128};
};

void validate(const ExperimentConfig& c);

struct MetricsRow {
  long iteration = 0;
  double mean_deg = 0.0;
  double median_deg = 0.0;
  double acc5 = 0.0;  // fraction of errors below 5 degrees
  double acc3 = 0.0;
  double mean_norm = 0.0;  // mean |x| of the raw network output
};

struct MetricsReport {
  std::vector<MetricsRow> evals;
  MetricsRow final;
  long degenerate_samples = 0;  // training samples skipped by the manifold mapping
  long antipodal_samples = 0;   // S^2 only
};

/// Errors in degrees; median is the lower middle element for even counts.
/// Throws ConfigError on empty input.
MetricsRow metrics_from_errors(std::vector<double> errors_deg);
MetricsRow compute_metrics(std::span<const Rotation> predictions,
                           std::span<const Rotation> ground_truths);

struct SyntheticDataset {
  PointSet canonical;                // K points, coordinates uniform in [-1, 1]
  std::vector<Rotation> rotations;   // Haar-uniform ground truth
  Batch inputs;                      // row i: flattened rotations[i] * canonical
  std::size_t train_count = 0;       // rows [0, train_count) train, rest test
};

SyntheticDataset make_dataset(std::size_t n_points, std::size_t n_samples, std::uint64_t seed);

/// Loss for one sample of the dataset.
Loss make_loss(LossName name, const Rotation& target, const PointSet& canonical);

MetricsReport train(const ExperimentConfig& config);
MetricsReport train_s2(const ExperimentConfig& config);

struct TauProbe {
  double tau;
  double mean_goal_distance;  // mean geodesic distance between R and R_g, radians
};

/// Trains for config.iters steps, then reports the mean distance from the
/// prediction to its goal rotation on the test split for each candidate tau.
std::vector<TauProbe> probe_tau(const ExperimentConfig& config,
                                std::span<const double> candidates);

struct FitConfig {
  RepKind rep = RepKind::NineD;
  Method method = Method::RPMG;
  LossName loss = LossName::L2;
  TauSpec tau;
  double lambda = 0.01;
  std::uint64_t seed = 0;
  long iters = 2000;
  double lr = 1e-2;
  std::optional<Rotation> target;  // sampled from the seed when unset
  std::optional<Rotation> init;    // sampled from the seed when unset
};

struct FitTrace {
  std::vector<double> errors;  // geodesic error in radians, one per step plus the final state
  std::vector<double> norms;   // |x| alongside errors
  bool aborted = false;
  std::string diagnostic;
};

/// Plain gradient descent on the raw output x itself.
FitTrace fit_single_rotation(const FitConfig& config);

}  // namespace rotgrad
