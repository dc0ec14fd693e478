#include "gpbound/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "gpbound/errors.hpp"
#include "gpbound/rng.hpp"

namespace gpbound {

namespace {

constexpr double kVarianceClampFloor = -1e-12;
constexpr int kEigensolveLimit = 2000;
constexpr double kLogParamLimit = 13.8;  // roughly 1e-6 .. 1e6 in natural units

double clamp_variance(double variance) {
  if (variance >= 0.0) return variance;
  if (variance >= kVarianceClampFloor) return 0.0;
  throw NumericalError("posterior variance " + std::to_string(variance) +
                       " is below the clamp threshold; covariance solve is unreliable");
}

// Re-runs the factorization step by step to locate the failing pivot.
int failed_pivot(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd m = a;
  const int n = static_cast<int>(m.rows());
  for (int j = 0; j < n; ++j) {
    double pivot = m(j, j) - m.row(j).head(j).squaredNorm();
    if (!std::isfinite(pivot) || pivot <= 0.0) return j;
    pivot = std::sqrt(pivot);
    m(j, j) = pivot;
    for (int i = j + 1; i < n; ++i) {
      m(i, j) = (m(i, j) - m.row(i).head(j).dot(m.row(j).head(j))) / pivot;
    }
  }
  return -1;
}

Eigen::LLT<Eigen::MatrixXd> factorize_or_throw(const Eigen::MatrixXd& a, const std::string& context) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(context + ": covariance factorization failed at pivot " +
                         std::to_string(failed_pivot(a)) + " of " + std::to_string(a.rows()) +
                         "; matrix is not positive definite");
  }
  return llt;
}

}  // namespace

void Dataset::validate() const {
  if (inputs.rows() != targets.size()) {
    throw std::invalid_argument("dataset: input rows and target count differ");
  }
  if (inputs.rows() > 0 && inputs.cols() == 0) {
    throw std::invalid_argument("dataset: input dimension must be positive");
  }
  if (!std::isfinite(noise_variance) || noise_variance < 0.0) {
    throw std::invalid_argument("dataset: noise variance must be finite and non-negative");
  }
  if (inputs.size() > 0 && !inputs.allFinite()) {
    throw std::invalid_argument("dataset: inputs must be finite");
  }
  if (targets.size() > 0 && !targets.allFinite()) {
    throw std::invalid_argument("dataset: targets must be finite");
  }
}

Posterior::Posterior(Dataset data, const Kernel& kernel)
    : data_(std::move(data)), kernel_(kernel.clone()) {
  data_.validate();
  const int n = data_.size();
  if (n == 0) {
    factor_.resize(0, 0);
    alpha_.resize(0);
    min_eigenvalue_ = std::numeric_limits<double>::infinity();
    return;
  }
  if (data_.dimension() != kernel_->dimension()) {
    throw std::invalid_argument("posterior: dataset and kernel dimension mismatch");
  }
  Eigen::MatrixXd a = kernel_->gram(data_.inputs);
  a.diagonal().array() += data_.noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success && data_.noise_variance == 0.0) {
    // Noiseless interpolation: the exact Gram matrix is positive definite
    // but often singular in floating point, so escalate a diagonal jitter.
    const double scale = a.diagonal().maxCoeff();
    for (const double jitter : {1e-12, 1e-10, 1e-8}) {
      Eigen::MatrixXd shifted = a;
      shifted.diagonal().array() += jitter * scale;
      llt.compute(shifted);
      if (llt.info() == Eigen::Success) break;
    }
  }
  if (llt.info() != Eigen::Success) {
    throw NumericalError("posterior fit: covariance factorization failed at pivot " +
                         std::to_string(failed_pivot(a)) + " of " + std::to_string(a.rows()) +
                         "; matrix is not positive definite");
  }
  factor_ = llt.matrixL();
  alpha_ = llt.solve(data_.targets);

  if (n <= kEigensolveLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() == Eigen::Success) {
      // The noiseless Gram matrix is positive semi-definite, so the noise
      // variance is a valid floor even if the solver slightly undershoots.
      min_eigenvalue_ = std::max(solver.eigenvalues()(0), data_.noise_variance);
      min_eigenvalue_from_solver_ = true;
      return;
    }
  }
  min_eigenvalue_ = data_.noise_variance;
  min_eigenvalue_from_solver_ = false;
}

Prediction Posterior::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != kernel_->dimension()) {
    throw std::invalid_argument("posterior: query dimension mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("posterior: query must be finite");
  }
  if (size() == 0) {
    return Prediction{0.0, clamp_variance(kernel_->prior_variance(x))};
  }
  const Eigen::MatrixXd k_cross = kernel_->cross(data_.inputs, x.transpose());
  const Eigen::VectorXd k_vec = k_cross.col(0);
  const double mean = alpha_.dot(k_vec);
  const Eigen::VectorXd v = factor_.triangularView<Eigen::Lower>().solve(k_vec);
  const double variance = kernel_->prior_variance(x) - v.squaredNorm();
  return Prediction{mean, clamp_variance(variance)};
}

void Posterior::predict_batch(const Eigen::Ref<const Eigen::MatrixXd>& points,
                              Eigen::VectorXd& means, Eigen::VectorXd& variances) const {
  if (points.cols() != kernel_->dimension()) {
    throw std::invalid_argument("posterior: query dimension mismatch");
  }
  if (points.size() > 0 && !points.allFinite()) {
    throw std::invalid_argument("posterior: queries must be finite");
  }
  const Eigen::Index m = points.rows();
  means.resize(m);
  variances.resize(m);
  if (size() == 0) {
    for (Eigen::Index i = 0; i < m; ++i) {
      means[i] = 0.0;
      variances[i] = clamp_variance(kernel_->prior_variance(points.row(i).transpose()));
    }
    return;
  }
  const Eigen::Index n = size();
  const Eigen::Index block = std::min<Eigen::Index>(m, std::max<Eigen::Index>(16, 4000000 / std::max<Eigen::Index>(1, n)));
  for (Eigen::Index start = 0; start < m; start += block) {
    const Eigen::Index count = std::min(block, m - start);
    const auto chunk = points.middleRows(start, count);
    Eigen::MatrixXd k_cross = kernel_->cross(data_.inputs, chunk);
    means.segment(start, count) = k_cross.transpose() * alpha_;
    factor_.triangularView<Eigen::Lower>().solveInPlace(k_cross);
    for (Eigen::Index i = 0; i < count; ++i) {
      const double variance =
          kernel_->prior_variance(chunk.row(i).transpose()) - k_cross.col(i).squaredNorm();
      variances[start + i] = clamp_variance(variance);
    }
  }
}

std::shared_ptr<const Posterior> fit(Dataset data, const Kernel& kernel) {
  return std::make_shared<const Posterior>(std::move(data), kernel);
}

double log_marginal_likelihood(const Dataset& data, const KernelSpec& spec,
                               Eigen::VectorXd* gradient, bool with_noise) {
  data.validate();
  spec.validate();
  if (data.size() == 0) {
    throw std::invalid_argument("log marginal likelihood: dataset is empty");
  }
  if (data.dimension() != spec.dimension()) {
    throw std::invalid_argument("log marginal likelihood: dataset and kernel dimension mismatch");
  }
  const int n = data.size();
  const int d = spec.dimension();
  const SquaredExponentialArd kernel(spec);
  const Eigen::MatrixXd k = kernel.gram(data.inputs);
  Eigen::MatrixXd a = k;
  a.diagonal().array() += data.noise_variance;
  const auto llt = factorize_or_throw(a, "log marginal likelihood");
  const Eigen::VectorXd alpha = llt.solve(data.targets);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double value = -0.5 * data.targets.dot(alpha) - 0.5 * log_det -
                       0.5 * n * std::log(2.0 * std::numbers::pi);
  if (gradient == nullptr) return value;

  const Eigen::MatrixXd a_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  // d lml / d theta_j = 0.5 tr((alpha alpha^T - A^{-1}) dA/dtheta_j)
  const Eigen::MatrixXd outer = alpha * alpha.transpose() - a_inv;
  gradient->resize(d + 1 + (with_noise ? 1 : 0));
  const Eigen::MatrixXd weighted = outer.cwiseProduct(k);
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd xi = data.inputs.col(i);
    const Eigen::MatrixXd diff = xi.replicate(1, n) - xi.transpose().replicate(n, 1);
    const double inv_sq = 1.0 / (spec.lengthscales[i] * spec.lengthscales[i]);
    (*gradient)[i] = 0.5 * (weighted.array() * diff.array().square() * inv_sq).sum();
  }
  (*gradient)[d] = weighted.sum();
  if (with_noise) {
    (*gradient)[d + 1] = data.noise_variance * (alpha.squaredNorm() - a_inv.trace());
  }
  return value;
}

namespace {

struct HyperParams {
  Eigen::VectorXd theta;  // log lengthscales, log signal std, optional log noise std
  int input_dim;
  bool with_noise;

  KernelSpec to_spec() const {
    KernelSpec spec;
    spec.lengthscales = theta.head(input_dim).array().exp();
    spec.signal_variance = std::exp(2.0 * theta[input_dim]);
    return spec;
  }
  double noise_variance(double fixed) const {
    return with_noise ? std::exp(2.0 * theta[input_dim + 1]) : fixed;
  }
};

double safe_objective(const Dataset& data, const HyperParams& params, Eigen::VectorXd* gradient) {
  Dataset local = data;
  local.noise_variance = params.noise_variance(data.noise_variance);
  try {
    return log_marginal_likelihood(local, params.to_spec(), gradient, params.with_noise);
  } catch (const NumericalError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

Eigen::VectorXd clamp_theta(Eigen::VectorXd theta) {
  return theta.cwiseMax(-kLogParamLimit).cwiseMin(kLogParamLimit);
}

}  // namespace

HyperFitResult fit_hyperparameters(const Dataset& data, const KernelSpec& init,
                                   const HyperFitOptions& options) {
  data.validate();
  init.validate();
  if (data.size() < 2) {
    throw std::invalid_argument("hyperparameter fit: at least two data points required");
  }
  if (data.dimension() != init.dimension()) {
    throw std::invalid_argument("hyperparameter fit: dataset and kernel dimension mismatch");
  }
  if (options.starts < 1 || options.max_iterations < 1) {
    throw std::invalid_argument("hyperparameter fit: starts and iterations must be positive");
  }
  if (!options.fix_noise && data.noise_variance <= 0.0) {
    throw std::invalid_argument("hyperparameter fit: free-noise fit needs a positive initial noise variance");
  }

  const int d = data.dimension();
  const int p = d + 1 + (options.fix_noise ? 0 : 1);
  HyperParams base;
  base.input_dim = d;
  base.with_noise = !options.fix_noise;
  base.theta.resize(p);
  base.theta.head(d) = init.lengthscales.array().log();
  base.theta[d] = 0.5 * std::log(init.signal_variance);
  if (!options.fix_noise) base.theta[d + 1] = 0.5 * std::log(data.noise_variance);
  base.theta = clamp_theta(base.theta);

  const double init_value = safe_objective(data, base, nullptr);
  double best_value = init_value;
  Eigen::VectorXd best_theta = base.theta;

  for (int start = 0; start < options.starts; ++start) {
    HyperParams params = base;
    if (start > 0) {
      std::mt19937_64 rng(mix_seed(options.seed, static_cast<std::uint64_t>(start)));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int i = 0; i < p; ++i) params.theta[i] += options.perturbation * normal(rng);
      params.theta = clamp_theta(params.theta);
    }
    Eigen::VectorXd gradient;
    double value = safe_objective(data, params, &gradient);
    if (!std::isfinite(value)) continue;
    double step = 0.1;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      const double gradient_norm = gradient.lpNorm<Eigen::Infinity>();
      if (gradient_norm < 1e-7) break;
      const double slope = gradient.squaredNorm();
      // Cap each move at unit length in log space so a badly scaled start
      // cannot jump across the parameter box in one step.
      step = std::min(step, 1.0 / gradient_norm);
      bool accepted = false;
      while (step >= 1e-12) {
        HyperParams trial = params;
        trial.theta = clamp_theta(params.theta + step * gradient);
        Eigen::VectorXd trial_gradient;
        const double trial_value = safe_objective(data, trial, &trial_gradient);
        if (trial_value > value + 1e-4 * step * slope) {
          params = trial;
          value = trial_value;
          gradient = trial_gradient;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      step = std::min(1.0, step * 1.5);
    }
    if (value > best_value) {
      best_value = value;
      best_theta = params.theta;
    }
  }

  HyperParams best = base;
  best.theta = best_theta;
  HyperFitResult result;
  result.kernel = best.to_spec();
  result.noise_variance = best.noise_variance(data.noise_variance);
  result.log_marginal = best_value;
  result.improved = best_value > init_value;
  return result;
}

Eigen::MatrixXd sample_function(const Kernel& kernel, const Eigen::Ref<const Eigen::MatrixXd>& grid,
                                std::uint64_t seed, int count) {
  if (grid.rows() == 0) {
    throw std::invalid_argument("sample: grid must contain at least one point");
  }
  if (grid.cols() != kernel.dimension()) {
    throw std::invalid_argument("sample: grid and kernel dimension mismatch");
  }
  if (!grid.allFinite()) {
    throw std::invalid_argument("sample: grid must be finite");
  }
  if (count < 1) {
    throw std::invalid_argument("sample: draw count must be positive");
  }
  const Eigen::MatrixXd k = kernel.gram(grid);
  const Eigen::Index m = grid.rows();
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool factored = false;
  for (const double jitter : {1e-10, 1e-8, 1e-6}) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += jitter;
    llt.compute(a);
    if (llt.info() == Eigen::Success) {
      factored = true;
      break;
    }
  }
  if (!factored) {
    throw NumericalError("sample: Gram factorization failed even with escalated jitter");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd draws(count, m);
  for (int r = 0; r < count; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) draws(r, c) = normal(rng);
  }
  const Eigen::MatrixXd factor = llt.matrixL();
  return draws * factor.transpose();
}

}  // namespace gpbound
