#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpbound/experiments.hpp"
#include "gpbound/grid.hpp"
#include "gpbound/rng.hpp"

using namespace gpbound;

namespace {

constexpr double kOracleRelTol = 1e-8;
constexpr double kOracleRuntimeCap = 30.0;
constexpr double kMeanLipschitzRuntimeCap = 60.0;
constexpr int kMonteCarloTrials = 200;
constexpr int kMonteCarloMaxViolations = 33;
constexpr double kMonteCarloRuntimeCap = 300.0;
constexpr double kMedianRatioLow = 3.0;
constexpr double kMedianRatioHigh = 500.0;
constexpr double kChiSquareDelta = 0.01;
constexpr double kChiSquareRuntimeCap = 30.0;
constexpr double kSyntheticRuntimeCap = 770.0;
constexpr double kRobotRuntimeCap = 390.0;
constexpr double kAsymptoticsRuntimeCap = 300.0;
constexpr double kEnergyDriftTol = 1e-3;
constexpr double kMinRk4Order = 3.5;

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string out_root() {
  return (std::filesystem::current_path() / "acceptance_out").string();
}

struct TrackingRun {
  ExperimentConfig config;
  ExperimentResult result;
  double wall_seconds = 0.0;
  KernelConstants constants;
};

TrackingRun make_tracking_run(ExperimentKind kind, const std::string& subdir) {
  TrackingRun run;
  run.config = default_config(kind);
  run.config.out_dir = out_root() + "/" + subdir;
  const auto start = std::chrono::steady_clock::now();
  run.result = run_tracking(run.config, PipelineStage::simulate);
  run.wall_seconds = seconds_since(start);
  const SquaredExponentialArd kernel(run.result.kernels[0]);
  run.constants = kernel_constants(kernel, run.config.domain);
  return run;
}

const TrackingRun& synthetic_run() {
  static const TrackingRun run = make_tracking_run(ExperimentKind::synthetic, "synthetic");
  return run;
}

const TrackingRun& robot_run() {
  static const TrackingRun run = make_tracking_run(ExperimentKind::robot, "robot");
  return run;
}

const CheckResult* find_check(const ExperimentResult& result, const std::string& name) {
  for (const auto& check : result.checks) {
    if (check.name == name) return &check;
  }
  return nullptr;
}

bool criterion_posterior_oracle(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(mix_seed(42, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const int n = 5 + static_cast<int>(rng() % 196);
    KernelSpec spec;
    spec.signal_variance = std::exp(2.0 * unit(rng) - 1.0);
    spec.lengthscales = Eigen::VectorXd::NullaryExpr(
        d, [&](Eigen::Index) { return std::exp(1.4 * unit(rng) - 0.7); });
    const SquaredExponentialArd kernel(spec);
    Dataset data;
    data.inputs = Eigen::MatrixXd::NullaryExpr(
        n, d, [&](Eigen::Index, Eigen::Index) { return 4.0 * unit(rng) - 2.0; });
    data.targets = Eigen::VectorXd::NullaryExpr(
        n, [&](Eigen::Index) { return 4.0 * unit(rng) - 2.0; });
    data.noise_variance = std::pow(10.0, -3.0 + 2.0 * unit(rng));
    const auto posterior = fit(data, kernel);

    Eigen::MatrixXd gram = kernel.gram(data.inputs);
    gram.diagonal().array() += data.noise_variance;
    const Eigen::MatrixXd inverse = gram.inverse();
    for (int q = 0; q < 5; ++q) {
      const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(
          d, [&](Eigen::Index) { return 4.0 * unit(rng) - 2.0; });
      const Eigen::VectorXd k_x = kernel.cross(data.inputs, x.transpose()).col(0);
      const double mean_oracle = k_x.dot(inverse * data.targets);
      const double var_oracle =
          kernel.prior_variance(x) - k_x.dot(inverse * k_x);
      const Prediction prediction = posterior->predict(x);
      const double mean_err = std::abs(prediction.mean - mean_oracle) /
                              std::max(std::abs(mean_oracle), 1e-12);
      const double var_err = std::abs(prediction.variance - var_oracle) /
                             std::max(std::abs(var_oracle), 1e-12);
      worst = std::max({worst, mean_err, var_err});
    }
  }
  const double elapsed = seconds_since(start);
  detail = "max relative deviation " + format_double(worst) + " over 50 instances in " +
           format_double(elapsed) + " s";
  return worst <= kOracleRelTol && elapsed < kOracleRuntimeCap;
}

bool criterion_mean_lipschitz(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const TrackingRun& run = synthetic_run();
  const double bound = run.result.certificates[0].mean_lipschitz;
  const int side = 200;
  const Eigen::MatrixXd grid = uniform_grid(run.config.domain, side);
  Eigen::VectorXd means, variances;
  run.result.certificates[0].posterior->predict_batch(grid, means, variances);
  const double h_x = grid(1, 0) - grid(0, 0);
  const double h_y = grid(side, 1) - grid(0, 1);
  double steepest = 0.0;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const int idx = i + side * j;
      if (i + 1 < side) {
        steepest = std::max(steepest, std::abs(means[idx + 1] - means[idx]) / h_x);
      }
      if (j + 1 < side) {
        steepest = std::max(steepest, std::abs(means[idx + side] - means[idx]) / h_y);
      }
    }
  }
  const double elapsed = seconds_since(start);
  detail = "bound " + format_double(bound) + " vs finite-difference max " +
           format_double(steepest) + " on a 200x200 grid";
  return bound >= steepest && elapsed < kMeanLipschitzRuntimeCap;
}

bool criterion_std_modulus(std::string& detail) {
  const TrackingRun& run = synthetic_run();
  const auto& posterior = *run.result.certificates[0].posterior;
  const Domain& domain = run.config.domain;
  std::mt19937_64 rng(mix_seed(42, 3));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  detail.clear();
  bool passed = true;
  for (const double tau : {1e-1, 1e-2, 1e-3}) {
    const double modulus = std_modulus(posterior, run.constants, tau);
    double max_diff = 0.0;
    for (int pair = 0; pair < 10000; ++pair) {
      Eigen::VectorXd x(2), direction(2);
      for (int i = 0; i < 2; ++i) {
        x[i] = domain.lower()[i] + unit(rng) * (domain.upper()[i] - domain.lower()[i]);
        direction[i] = gauss(rng);
      }
      direction.normalize();
      const Eigen::VectorXd x2 = domain.project(x + tau * unit(rng) * direction);
      const double diff = std::abs(std::sqrt(posterior.predict(x).variance) -
                                   std::sqrt(posterior.predict(x2).variance));
      max_diff = std::max(max_diff, diff);
    }
    if (!detail.empty()) detail += "; ";
    detail += "tau=" + format_double(tau) + ": modulus " + format_double(modulus) +
              " vs observed " + format_double(max_diff);
    if (modulus < max_diff) passed = false;
  }
  return passed;
}

bool criterion_uniform_bound_monte_carlo(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const Domain domain(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 5.0));
  const SquaredExponentialArd kernel(KernelSpec::isotropic(1.0, 1.0, 1));
  const KernelConstants constants = kernel_constants(kernel, domain);
  const Eigen::MatrixXd grid = uniform_grid(domain, 400);
  const double h = grid(1, 0) - grid(0, 0);
  const Eigen::MatrixXd paths = sample_function(kernel, grid, mix_seed(42, 4), kMonteCarloTrials);
  std::mt19937_64 noise_rng(mix_seed(42, 40));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_variance = 0.01;
  Eigen::MatrixXd train_inputs(30, 1);
  std::array<int, 30> train_index{};
  for (int i = 0; i < 30; ++i) {
    train_index[i] = static_cast<int>(std::lround(i * 399.0 / 29.0));
    train_inputs(i, 0) = grid(train_index[i], 0);
  }
  int violating_trials = 0;
  for (int trial = 0; trial < kMonteCarloTrials; ++trial) {
    const Eigen::VectorXd path = paths.row(trial).transpose();
    Dataset data;
    data.inputs = train_inputs;
    data.targets.resize(30);
    for (int i = 0; i < 30; ++i) {
      data.targets[i] = path[train_index[i]] + std::sqrt(noise_variance) * gauss(noise_rng);
    }
    data.noise_variance = noise_variance;
    const auto posterior = fit(data, kernel);
    double path_lipschitz = 0.0;
    for (int i = 0; i + 1 < 400; ++i) {
      path_lipschitz = std::max(path_lipschitz, std::abs(path[i + 1] - path[i]) / h);
    }
    const ErrorCertificate certificate =
        certify(posterior, constants, domain, 1e-6, 0.1, path_lipschitz);
    Eigen::VectorXd means, variances;
    posterior->predict_batch(grid, means, variances);
    for (int i = 0; i < 400; ++i) {
      const double eta = certificate.eta_from_sigma(std::sqrt(std::max(0.0, variances[i])));
      if (std::abs(path[i] - means[i]) > eta) {
        ++violating_trials;
        break;
      }
    }
  }
  const double elapsed = seconds_since(start);
  detail = std::to_string(violating_trials) + " of " + std::to_string(kMonteCarloTrials) +
           " sampled functions violate eta somewhere (allowed " +
           std::to_string(kMonteCarloMaxViolations) + ") in " + format_double(elapsed) + " s";
  return violating_trials <= kMonteCarloMaxViolations && elapsed < kMonteCarloRuntimeCap;
}

bool criterion_lipschitz_monte_carlo(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const Domain domain(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 5.0));
  const SquaredExponentialArd kernel(KernelSpec::isotropic(1.0, 1.0, 1));
  const KernelConstants constants = kernel_constants(kernel, domain);
  const double delta_l = 0.1;
  const double bound = probabilistic_lipschitz(kernel, constants, domain, delta_l).value;
  const int nodes = 2000;
  const Eigen::MatrixXd grid = uniform_grid(domain, nodes);
  const double h = grid(1, 0) - grid(0, 0);
  const Eigen::MatrixXd paths = sample_function(kernel, grid, mix_seed(42, 5), kMonteCarloTrials);
  int exceed = 0;
  std::vector<double> ratios;
  for (int trial = 0; trial < kMonteCarloTrials; ++trial) {
    double slope = 0.0;
    for (int i = 0; i + 1 < nodes; ++i) {
      slope = std::max(slope, std::abs(paths(trial, i + 1) - paths(trial, i)) / h);
    }
    if (slope > bound) ++exceed;
    if (slope > 0.0) ratios.push_back(bound / slope);
  }
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  const double median_ratio = ratios[ratios.size() / 2];
  const double elapsed = seconds_since(start);
  detail = std::to_string(exceed) + " of " + std::to_string(kMonteCarloTrials) +
           " paths exceed the bound; median conservatism " + format_double(median_ratio) +
           " in " + format_double(elapsed) + " s";
  return exceed <= kMonteCarloMaxViolations && median_ratio >= kMedianRatioLow &&
         median_ratio <= kMedianRatioHigh && elapsed < kMonteCarloRuntimeCap;
}

bool criterion_noise_norm(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const std::array<int, 3> sizes = {1, 10, 100};
  const std::array<double, 3> reference_quantiles = {10.827566170662733, 29.58829844507442,
                                                     149.44925277903886};
  detail.clear();
  bool passed = true;
  for (size_t s = 0; s < sizes.size(); ++s) {
    const int n = sizes[s];
    std::mt19937_64 rng(mix_seed(42, 600 + static_cast<std::uint64_t>(n)));
    std::chi_squared_distribution<double> chi2(n);
    std::vector<double> draws(100000);
    for (double& draw : draws) draw = chi2(rng);
    std::sort(draws.begin(), draws.end());
    const double quantile = draws[99899];
    const double bound = noise_norm_bound(n, kChiSquareDelta);
    if (!detail.empty()) detail += "; ";
    detail += "N=" + std::to_string(n) + ": bound " + format_double(bound) + " vs 0.999-quantile " +
              format_double(quantile);
    if (bound <= quantile) passed = false;
    if (std::abs(quantile - reference_quantiles[s]) / reference_quantiles[s] > 0.05) {
      passed = false;
      detail += " (empirical quantile off the chi-square reference)";
    }
  }
  const double elapsed = seconds_since(start);
  return passed && elapsed < kChiSquareRuntimeCap;
}

bool criterion_synthetic_reproduction(std::string& detail) {
  const TrackingRun& run = synthetic_run();
  const CheckResult* grid = find_check(run.result, "bound-holds-on-grid");
  const CheckResult* contained = find_check(run.result, "error-enters-and-stays");
  detail = "grid: " + (grid != nullptr ? grid->detail : std::string("missing")) +
           "; containment: " + (contained != nullptr ? contained->detail : std::string("missing")) +
           "; " + format_double(run.wall_seconds) + " s";
  return grid != nullptr && grid->passed && contained != nullptr && contained->passed &&
         run.wall_seconds < kSyntheticRuntimeCap;
}

bool criterion_robot_reproduction(std::string& detail) {
  const TrackingRun& run = robot_run();
  const CheckResult* contained = find_check(run.result, "error-enters-and-stays");
  detail = "containment: " + (contained != nullptr ? contained->detail : std::string("missing")) +
           "; " + format_double(run.wall_seconds) + " s";
  return contained != nullptr && contained->passed && run.wall_seconds < kRobotRuntimeCap;
}

bool criterion_asymptotic_trend(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config = default_config(ExperimentKind::asymptotics);
  config.out_dir = out_root() + "/asymptotics";
  const ExperimentResult result = run_asymptotics(config);
  const double elapsed = seconds_since(start);
  bool rows_ok = result.rows.size() == 4;
  bool sound = true, monotone = true;
  for (size_t i = 0; i < result.rows.size(); ++i) {
    if (result.rows[i].sup_error > result.rows[i].bound) sound = false;
    if (i >= 2 && result.rows[i].bound > result.rows[i - 1].bound) monotone = false;
  }
  detail = "bounds:";
  for (const auto& row : result.rows) detail += " " + format_double(row.bound);
  detail += "; sup errors:";
  for (const auto& row : result.rows) detail += " " + format_double(row.sup_error);
  detail += "; " + format_double(elapsed) + " s";
  return rows_ok && sound && monotone && elapsed < kAsymptoticsRuntimeCap;
}

bool criterion_dynamics_fidelity(std::string& detail) {
  const TwoLinkArm arm;
  const Plant plant = arm.plant();
  const ReferenceTrajectory rest = ReferenceTrajectory::sinusoid(
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones(), Eigen::Vector2d::Zero());
  const ControlLaw passive = [](const Eigen::Ref<const Eigen::VectorXd>&, double) {
    return Eigen::VectorXd::Zero(2).eval();
  };
  Eigen::VectorXd state0(4);
  state0 << 1.2, 0.0, -0.5, 0.0;
  const ControllerGains gains{7.0, 1.0};
  const SimulationTrace swing = simulate(plant, passive, rest, gains, 10.0, 1e-3, state0);
  const double energy0 = arm.energy(state0);
  double drift = 0.0;
  for (int k = 0; k < swing.steps(); ++k) {
    drift = std::max(drift,
                     std::abs(arm.energy(swing.states.row(k).transpose()) - energy0));
  }
  const double relative_drift = drift / std::abs(energy0);

  const Plant synthetic = synthetic_plant();
  const ReferenceTrajectory reference = ReferenceTrajectory::sinusoid(
      Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 1.0),
      Eigen::VectorXd::Zero(1));
  const MeanFn surrogate = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return Eigen::VectorXd::Constant(1, 1.5 - std::sin(x[0])).eval();
  };
  const ControllerGains loop_gains{2.0, 1.0};
  const ControlLaw law = [&](const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
    return feedback_linearizing_control(x, surrogate, reference.at(t), loop_gains);
  };
  Eigen::VectorXd x0(2);
  x0 << -6.0, 0.0;
  std::array<Eigen::VectorXd, 3> finals;
  const std::array<double, 3> steps = {4e-3, 2e-3, 1e-3};
  for (size_t i = 0; i < steps.size(); ++i) {
    const SimulationTrace trace = simulate(synthetic, law, reference, loop_gains, 1.0, steps[i], x0);
    finals[i] = trace.states.row(trace.steps() - 1).transpose();
  }
  const double coarse = (finals[0] - finals[1]).norm();
  const double fine = (finals[1] - finals[2]).norm();
  const double order = std::log2(coarse / fine);

  detail = "relative energy drift " + format_double(relative_drift) + " over 10 s; observed order " +
           format_double(order);
  return relative_drift <= kEnergyDriftTol && order >= kMinRk4Order;
}

bool criterion_lyapunov(std::string& detail) {
  const TrackingRun& run = synthetic_run();
  const CheckResult* lyapunov = find_check(run.result, "lyapunov-decrease");
  detail = lyapunov != nullptr ? lyapunov->detail : "missing";
  return lyapunov != nullptr && lyapunov->passed;
}

struct Criterion {
  int id;
  const char* name;
  bool (*run)(std::string&);
};

const std::array<Criterion, 11> kCriteria = {{
    {1, "posterior matches the direct-inverse oracle", criterion_posterior_oracle},
    {2, "mean Lipschitz bound dominates finite differences", criterion_mean_lipschitz},
    {3, "standard deviation modulus dominates sampled pairs", criterion_std_modulus},
    {4, "uniform error bound holds on sampled functions", criterion_uniform_bound_monte_carlo},
    {5, "sample-path Lipschitz bound holds and is conservative", criterion_lipschitz_monte_carlo},
    {6, "noise norm bound dominates the chi-square quantile", criterion_noise_norm},
    {7, "synthetic experiment: bound holds and error is contained", criterion_synthetic_reproduction},
    {8, "robot experiment: joint errors converge into the certified radius", criterion_robot_reproduction},
    {9, "bound decreases with training set growth and stays sound", criterion_asymptotic_trend},
    {10, "arm conserves energy and the integrator is fourth order", criterion_dynamics_fidelity},
    {11, "Lyapunov function decreases outside the certified ball", criterion_lyapunov},
}};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--list") == 0) {
      for (const Criterion& criterion : kCriteria) {
        std::printf("%2d  %s\n", criterion.id, criterion.name);
      }
      return 0;
    }
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
      continue;
    }
    const int id = std::atoi(argv[i]);
    if (id >= 1 && id <= static_cast<int>(kCriteria.size())) {
      selected.push_back(id);
    } else {
      std::fprintf(stderr, "usage: %s [--list] [--criterion N | N]...\n", argv[0]);
      return 1;
    }
  }

  std::filesystem::create_directories(out_root());
  int failures = 0;
  int executed = 0;
  for (const Criterion& criterion : kCriteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), criterion.id) == selected.end()) {
      continue;
    }
    ++executed;
    std::string detail;
    bool passed = false;
    try {
      passed = criterion.run(detail);
    } catch (const std::exception& error) {
      detail = std::string("exception: ") + error.what();
    }
    if (!passed) ++failures;
    std::printf("[%s] criterion %2d (%s): %s\n", passed ? "PASS" : "FAIL", criterion.id,
                criterion.name, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", executed - failures, executed);
  return failures == 0 ? 0 : 1;
}
