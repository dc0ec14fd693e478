#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>

#include "gpbound/kernel.hpp"

namespace gpbound {

// Training data for one scalar output.  Rows of inputs are points.
struct Dataset {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
  double noise_variance = 0.0;

  int size() const { return static_cast<int>(inputs.rows()); }
  int dimension() const { return static_cast<int>(inputs.cols()); }
  void validate() const;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

// Gaussian process posterior conditioned on a dataset.  Holds the Cholesky
// factor of K + sigma_n^2 I and the weight vector alpha = (K + sigma_n^2 I)^{-1} y.
class Posterior {
 public:
  Posterior(Dataset data, const Kernel& kernel);

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Rows of points are query points; results are stacked in order.
  void predict_batch(const Eigen::Ref<const Eigen::MatrixXd>& points, Eigen::VectorXd& means,
                     Eigen::VectorXd& variances) const;

  const Dataset& data() const { return data_; }
  const Kernel& kernel() const { return *kernel_; }
  int size() const { return data_.size(); }
  int dimension() const { return data_.dimension(); }

  const Eigen::MatrixXd& cholesky_factor() const { return factor_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

  // Smallest eigenvalue of K + sigma_n^2 I; computed by an eigensolve for
  // moderate N, otherwise lower-bounded by sigma_n^2.
  double min_eigenvalue() const { return min_eigenvalue_; }
  bool min_eigenvalue_from_solver() const { return min_eigenvalue_from_solver_; }

 private:
  Dataset data_;
  std::shared_ptr<const Kernel> kernel_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd alpha_;
  double min_eigenvalue_ = 0.0;
  bool min_eigenvalue_from_solver_ = false;
};

std::shared_ptr<const Posterior> fit(Dataset data, const Kernel& kernel);

// Log marginal likelihood of the data under the kernel (targets treated as
// zero-mean); gradient is with respect to log lengthscales, log signal
// standard deviation and, if requested, log noise standard deviation.
double log_marginal_likelihood(const Dataset& data, const KernelSpec& spec,
                               Eigen::VectorXd* gradient = nullptr, bool with_noise = false);

struct HyperFitOptions {
  int starts = 8;
  int max_iterations = 200;
  double perturbation = 0.5;
  bool fix_noise = true;
  std::uint64_t seed = 0;
};

struct HyperFitResult {
  KernelSpec kernel;
  double noise_variance = 0.0;
  double log_marginal = 0.0;
  bool improved = false;
};

// Multi-start gradient ascent on the log marginal likelihood in log space.
HyperFitResult fit_hyperparameters(const Dataset& data, const KernelSpec& init,
                                   const HyperFitOptions& options = {});

// Draws functions from the prior on a finite grid (rows of grid are points).
// Row i of the result is the i-th draw.  The Gram diagonal is jittered, with
// escalation, to keep the factorization stable.
Eigen::MatrixXd sample_function(const Kernel& kernel, const Eigen::Ref<const Eigen::MatrixXd>& grid,
                                std::uint64_t seed, int count);

}  // namespace gpbound
