#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gpbound/domain.hpp"
#include "gpbound/gp.hpp"

namespace gpbound {

// Log of the grid covering number bound for the box: sum over dimensions of
// log(ceil(1 + w_i / tau)).  Kept in log space because the product easily
// overflows for small tau.
double log_covering_number(const Domain& domain, double tau);

// The covering number itself; may be infinite for very small tau.
double covering_number_bound(const Domain& domain, double tau);

// beta = 2 log(M / delta) for a covering of log-size log_covering.
double beta_from_log_covering(double log_covering, double delta);
double beta(const Domain& domain, double tau, double delta);

// Lipschitz bound on the posterior mean: L_k sqrt(N) ||alpha||.
double mean_lipschitz_bound(const Posterior& posterior, const KernelConstants& constants);

// Modulus of continuity of the posterior standard deviation at lag tau:
// sqrt(2 tau L_k (1 + N max_k / lambda_min)).
double std_modulus(const Posterior& posterior, const KernelConstants& constants, double tau);

// High-probability bound on ||noise||^2 / sigma_n^2 for an N-vector of
// i.i.d. Gaussian observation noises, at the level delta spread over all N
// by a pi^2 N^2 / 3 schedule: with eta = log(pi^2 N^2 / (3 delta)),
// the bound is 2 sqrt(N eta) + 2 eta + N.
double noise_norm_bound(int n, double delta);

// Uniform error certificate for one scalar output: with probability at
// least 1 - delta, |f(x) - mean(x)| <= eta(x) for all x in the domain.
struct ErrorCertificate {
  double tau = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double mean_lipschitz = 0.0;
  double std_modulus_at_tau = 0.0;
  double f_lipschitz = 0.0;
  std::string min_eigenvalue_provenance;
  std::shared_ptr<const Posterior> posterior;
  Domain domain;

  double eta(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double eta_from_sigma(double sigma) const;
};

ErrorCertificate certify(std::shared_ptr<const Posterior> posterior,
                         const KernelConstants& constants, const Domain& domain, double tau,
                         double delta, double f_lipschitz);

// One scalar output of a vector-valued target, ready for joint certification.
struct OutputModel {
  std::shared_ptr<const Posterior> posterior;
  KernelConstants constants;
  double f_lipschitz = 0.0;
};

// Certifies all outputs jointly by splitting delta uniformly across them.
std::vector<ErrorCertificate> certify_multi(const std::vector<OutputModel>& outputs,
                                            const Domain& domain, double tau, double delta);

using ScalarField = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

struct AsymptoticOptions {
  double tau0 = 1.0;       // virtual grid resolution at N = 1; shrinks as tau0 / N^2
  double delta = 0.01;
  double f_bar = 1.0;      // known bound on sup |f|
  double f_lipschitz = 0.0;
  double noise_variance = 0.01;
  std::uint64_t seed = 0;
  int dense_cap = 4000;    // largest N the dense solve is allowed to attempt
  int eval_points_per_dim = 400;
  int eval_total_cap = 100000;
};

struct AsymptoticRow {
  int n = 0;
  double tau = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double max_sigma = 0.0;
  double sup_error = 0.0;
  double bound = 0.0;  // sqrt(beta) * max_sigma + gamma
};

// Tracks the uniform error bound along a schedule of training set sizes.
// For each N a uniform grid dataset with noisy observations of the truth is
// fit and the bound is evaluated with N-dependent confidence terms: the
// covering level tau0 / N^2, beta with the pi^2 N^2 / 3 schedule, a growth
// bound L_k (N f_bar + sqrt(N noise_norm_bound) sigma_n) / sigma_n^2 on the
// mean Lipschitz constant and the 1 / sigma_n^2 fallback inside the modulus
// term.
std::vector<AsymptoticRow> asymptotic_bounds(const ScalarField& truth, const Kernel& kernel,
                                             const Domain& domain, const std::vector<int>& schedule,
                                             const AsymptoticOptions& options = {});

}  // namespace gpbound
