#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gpbound/control.hpp"
#include "gpbound/domain.hpp"

namespace gpbound {

enum class ExperimentKind { synthetic, robot, asymptotics };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct KernelConfig {
  bool fit_from_data = true;
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;  // exact values, or the fit starting point
  int starts = 8;
  int max_iterations = 200;
};

struct TrainingGridConfig {
  std::vector<int> nodes;
  Domain region;
};

struct ReferenceConfig {
  Eigen::VectorXd amplitude;
  Eigen::VectorXd angular_frequency;
  Eigen::VectorXd phase;

  ReferenceTrajectory build() const {
    return ReferenceTrajectory::sinusoid(amplitude, angular_frequency, phase);
  }
};

struct IntegratorConfig {
  double dt = 1e-3;
  double t_span = 20.0;
};

// Where the Lipschitz constant of the unknown dynamics comes from: a
// high-probability bound derived from the fitted model, a numeric bound on
// the true dynamics (benchmark plants only), or a configured value.
enum class LipschitzMode { estimate, from_dynamics, fixed };

// Separable benchmark truth for the convergence study:
// amplitude * prod_i trig_i(2 pi frequency x_i), trig alternating sin, cos.
// Its sup is amplitude and its Lipschitz constant is
// amplitude * 2 pi frequency * sqrt(d).
struct TruthConfig {
  double amplitude = 0.5;
  double frequency = 1.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::synthetic;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool plots = true;  // command-line switch, not a config key

  KernelConfig kernel;
  double noise_variance = 0.01;
  Domain domain;
  double delta = 0.01;

  // Tracking experiments only.
  TrainingGridConfig training_grid;
  double delta_l = 0.01;
  double tau = 1e-8;
  ControllerGains gains;
  ReferenceConfig reference;
  IntegratorConfig integrator;
  Eigen::VectorXd initial_state;
  LipschitzMode lipschitz_mode = LipschitzMode::estimate;
  double f_lipschitz = 0.0;  // meaningful for LipschitzMode::fixed
  double gravity = 9.81;     // robot only

  // Convergence study only.
  std::vector<int> schedule;
  double tau0 = 1.0;
  TruthConfig truth;
  int eval_points_per_dim = 400;
  int dense_cap = 4000;

  int outputs() const { return domain.dimension() / 2; }
  void validate() const;
};

// Built-in defaults per experiment; the repro commands run these unmodified.
ExperimentConfig default_config(ExperimentKind kind);

// Strict parse: the experiment field selects the defaults, every other key
// overrides one field, and keys that are unknown or do not apply to the
// experiment are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization (sorted keys) of the effective config.
std::string config_to_json(const ExperimentConfig& config);

std::uint64_t fnv1a64(const std::string& text);

// "fnv1a64:<16 hex digits>" over the canonical serialization.
std::string config_hash(const ExperimentConfig& config);

}  // namespace gpbound
