#include "gpbound/error_bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gpbound/errors.hpp"
#include "gpbound/grid.hpp"
#include "gpbound/rng.hpp"

namespace gpbound {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("bound: tau must be finite and positive");
  }
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("bound: delta must lie in (0, 1)");
  }
}

}  // namespace

double log_covering_number(const Domain& domain, double tau) {
  if (domain.dimension() == 0) {
    throw std::invalid_argument("covering: domain is empty");
  }
  check_tau(tau);
  double log_count = 0.0;
  for (int i = 0; i < domain.dimension(); ++i) {
    const double width = domain.upper()[i] - domain.lower()[i];
    log_count += std::log(std::ceil(1.0 + width / tau));
  }
  return log_count;
}

double covering_number_bound(const Domain& domain, double tau) {
  return std::exp(log_covering_number(domain, tau));
}

double beta_from_log_covering(double log_covering, double delta) {
  if (!(log_covering >= 0.0) || !std::isfinite(log_covering)) {
    throw std::invalid_argument("bound: log covering number must be finite and non-negative");
  }
  check_delta(delta);
  return 2.0 * (log_covering - std::log(delta));
}

double beta(const Domain& domain, double tau, double delta) {
  return beta_from_log_covering(log_covering_number(domain, tau), delta);
}

double mean_lipschitz_bound(const Posterior& posterior, const KernelConstants& constants) {
  const int n = posterior.size();
  if (n == 0) return 0.0;
  return constants.kernel_lipschitz * std::sqrt(static_cast<double>(n)) * posterior.alpha().norm();
}

double std_modulus(const Posterior& posterior, const KernelConstants& constants, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("bound: tau must be finite and non-negative");
  }
  const int n = posterior.size();
  const double inverse_term =
      n == 0 ? 0.0 : static_cast<double>(n) * constants.max_kernel / posterior.min_eigenvalue();
  return std::sqrt(2.0 * tau * constants.kernel_lipschitz * (1.0 + inverse_term));
}

double noise_norm_bound(int n, double delta) {
  if (n < 1) {
    throw std::invalid_argument("noise bound: n must be positive");
  }
  check_delta(delta);
  const double nd = static_cast<double>(n);
  const double eta = std::log(std::numbers::pi * std::numbers::pi * nd * nd / (3.0 * delta));
  return 2.0 * std::sqrt(nd * eta) + 2.0 * eta + nd;
}

double ErrorCertificate::eta(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!domain.contains(x)) {
    throw std::domain_error("certificate: point lies outside the certified domain");
  }
  const Prediction p = posterior->predict(x);
  return eta_from_sigma(std::sqrt(p.variance));
}

double ErrorCertificate::eta_from_sigma(double sigma) const {
  return std::sqrt(beta) * sigma + gamma;
}

ErrorCertificate certify(std::shared_ptr<const Posterior> posterior,
                         const KernelConstants& constants, const Domain& domain, double tau,
                         double delta, double f_lipschitz) {
  if (posterior == nullptr) {
    throw std::invalid_argument("certify: posterior is null");
  }
  if (domain.dimension() == 0) {
    throw std::invalid_argument("certify: domain is empty");
  }
  if (domain.dimension() != posterior->kernel().dimension()) {
    throw std::invalid_argument("certify: domain and posterior dimension mismatch");
  }
  check_tau(tau);
  check_delta(delta);
  if (!(f_lipschitz >= 0.0) || !std::isfinite(f_lipschitz)) {
    throw std::invalid_argument("certify: target Lipschitz constant must be finite and non-negative");
  }
  ErrorCertificate cert;
  cert.tau = tau;
  cert.delta = delta;
  cert.beta = beta(domain, tau, delta);
  cert.mean_lipschitz = mean_lipschitz_bound(*posterior, constants);
  cert.std_modulus_at_tau = std_modulus(*posterior, constants, tau);
  cert.f_lipschitz = f_lipschitz;
  cert.gamma = (cert.mean_lipschitz + f_lipschitz) * tau +
               std::sqrt(cert.beta) * cert.std_modulus_at_tau;
  cert.min_eigenvalue_provenance =
      posterior->min_eigenvalue_from_solver() ? "eigensolve" : "noise-floor";
  cert.posterior = std::move(posterior);
  cert.domain = domain;
  return cert;
}

std::vector<ErrorCertificate> certify_multi(const std::vector<OutputModel>& outputs,
                                            const Domain& domain, double tau, double delta) {
  if (outputs.empty()) {
    throw std::invalid_argument("certify: at least one output required");
  }
  check_delta(delta);
  const double split = delta / static_cast<double>(outputs.size());
  std::vector<ErrorCertificate> certificates;
  certificates.reserve(outputs.size());
  for (const auto& output : outputs) {
    certificates.push_back(
        certify(output.posterior, output.constants, domain, tau, split, output.f_lipschitz));
  }
  return certificates;
}

namespace {

// Smallest m with m^d >= n.
int grid_side(int n, int d) {
  int m = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 1.0 / d)));
  while (m > 1 && std::pow(static_cast<double>(m - 1), d) >= static_cast<double>(n)) --m;
  while (std::pow(static_cast<double>(m), d) < static_cast<double>(n)) ++m;
  return m;
}

}  // namespace

std::vector<AsymptoticRow> asymptotic_bounds(const ScalarField& truth, const Kernel& kernel,
                                             const Domain& domain, const std::vector<int>& schedule,
                                             const AsymptoticOptions& options) {
  if (!truth) {
    throw std::invalid_argument("asymptotics: truth function is empty");
  }
  if (domain.dimension() != kernel.dimension()) {
    throw std::invalid_argument("asymptotics: domain and kernel dimension mismatch");
  }
  if (schedule.empty()) {
    throw std::invalid_argument("asymptotics: schedule is empty");
  }
  for (size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) {
      throw std::invalid_argument("asymptotics: schedule entries must be positive");
    }
    if (i > 0 && schedule[i] <= schedule[i - 1]) {
      throw std::invalid_argument("asymptotics: schedule must be strictly increasing");
    }
    if (schedule[i] > options.dense_cap) {
      throw CapacityError("asymptotics: schedule entry " + std::to_string(schedule[i]) +
                          " exceeds the dense solve cap " + std::to_string(options.dense_cap));
    }
  }
  check_tau(options.tau0);
  check_delta(options.delta);
  if (!(options.noise_variance >= 0.0) || !std::isfinite(options.noise_variance)) {
    throw std::invalid_argument("asymptotics: noise variance must be finite and non-negative");
  }
  if (!(options.f_bar >= 0.0) || !(options.f_lipschitz >= 0.0)) {
    throw std::invalid_argument("asymptotics: f_bar and f_lipschitz must be non-negative");
  }

  const int d = domain.dimension();
  const KernelConstants constants = kernel_constants(kernel, domain);
  const double sigma_n = std::sqrt(options.noise_variance);

  int eval_nodes = options.eval_points_per_dim;
  while (eval_nodes > 2 &&
         std::pow(static_cast<double>(eval_nodes), d) > static_cast<double>(options.eval_total_cap)) {
    --eval_nodes;
  }
  const Eigen::MatrixXd eval_points = uniform_grid(domain, eval_nodes);
  Eigen::VectorXd truth_values(eval_points.rows());
  for (Eigen::Index i = 0; i < eval_points.rows(); ++i) {
    truth_values[i] = truth(eval_points.row(i).transpose());
  }

  std::vector<AsymptoticRow> rows;
  rows.reserve(schedule.size());
  for (const int n : schedule) {
    const Eigen::MatrixXd full = uniform_grid(domain, grid_side(n, d));
    Dataset data;
    data.inputs = full.topRows(n);
    data.noise_variance = options.noise_variance;
    data.targets.resize(n);
    std::mt19937_64 rng(mix_seed(options.seed, static_cast<std::uint64_t>(n)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      data.targets[i] = truth(data.inputs.row(i).transpose()) + sigma_n * normal(rng);
    }
    const auto posterior = fit(std::move(data), kernel);

    Eigen::VectorXd means, variances;
    posterior->predict_batch(eval_points, means, variances);

    AsymptoticRow row;
    row.n = n;
    row.tau = options.tau0 / (static_cast<double>(n) * n);
    const double nd = static_cast<double>(n);
    const double log_schedule = std::log(std::numbers::pi * std::numbers::pi * nd * nd / 3.0);
    row.beta = 2.0 * (log_covering_number(domain, row.tau) + log_schedule - std::log(options.delta));
    // Both spectral bounds rest on lambda_min >= sigma_n^2, so without a
    // noise floor they have no finite form.
    double mean_lipschitz = std::numeric_limits<double>::infinity();
    double modulus = std::numeric_limits<double>::infinity();
    if (options.noise_variance > 0.0) {
      mean_lipschitz =
          constants.kernel_lipschitz *
          (nd * options.f_bar + std::sqrt(nd * noise_norm_bound(n, options.delta)) * sigma_n) /
          options.noise_variance;
      modulus = std::sqrt(2.0 * row.tau * constants.kernel_lipschitz *
                          (1.0 + nd * constants.max_kernel / options.noise_variance));
    }
    row.gamma = (mean_lipschitz + options.f_lipschitz) * row.tau + std::sqrt(row.beta) * modulus;
    row.max_sigma = std::sqrt(variances.maxCoeff());
    row.sup_error = (means - truth_values).cwiseAbs().maxCoeff();
    row.bound = std::sqrt(row.beta) * row.max_sigma + row.gamma;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gpbound
