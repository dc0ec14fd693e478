#pragma once

#include <string>
#include <vector>

#include "gpbound/config.hpp"
#include "gpbound/control.hpp"
#include "gpbound/csv.hpp"
#include "gpbound/error_bounds.hpp"
#include "gpbound/lipschitz.hpp"

namespace gpbound {

// One verified claim about a finished run; failed checks drive the exit code.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<KernelSpec> kernels;  // one per output
  double noise_variance = 0.0;
  std::vector<double> log_marginals;          // when fitted
  std::vector<LipschitzEstimate> lipschitz;   // when estimated from the model
  Eigen::VectorXd f_lipschitz;                // per output
  double total_failure_probability = 0.0;
  std::vector<ErrorCertificate> certificates;
  SimulationTrace trace;
  std::vector<AsymptoticRow> rows;
  std::vector<CheckResult> checks;
  std::vector<std::string> files;

  bool all_passed() const;
};

// How far into the tracking pipeline to run: kernel fit only, Lipschitz
// constants, certificates, or the full closed-loop simulation.  Each stage
// writes the artifacts available at that depth.
enum class PipelineStage { fit, lipschitz, certify, simulate };

// Tracking pipeline for the synthetic and robot experiments.  Training data
// is generated from the experiment's plant on the configured grid, unless
// dataset CSV paths are supplied (one per output).
ExperimentResult run_tracking(const ExperimentConfig& config, PipelineStage upto,
                              const std::vector<std::string>& data_paths = {});

ExperimentResult run_asymptotics(const ExperimentConfig& config);

// Full pipeline for the config's experiment kind.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Numeric per-joint Lipschitz bound for the arm drift over the domain:
// sampled gradient maxima, compass-refined, inflated by 5%.
Eigen::Vector2d arm_drift_lipschitz(const TwoLinkArm& arm, const Domain& domain,
                                    std::uint64_t seed);

}  // namespace gpbound
