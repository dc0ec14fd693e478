#include "gpbound/lipschitz.hpp"

#include <cmath>
#include <stdexcept>

namespace gpbound {

namespace {

void check_common(double kernel_max, double kernel_lipschitz, double diameter, int dimension) {
  if (!(kernel_max >= 0.0) || !std::isfinite(kernel_max)) {
    throw std::invalid_argument("sup bound: kernel maximum must be finite and non-negative");
  }
  if (!(kernel_lipschitz >= 0.0) || !std::isfinite(kernel_lipschitz)) {
    throw std::invalid_argument("sup bound: kernel Lipschitz constant must be finite and non-negative");
  }
  if (!(diameter >= 0.0) || !std::isfinite(diameter)) {
    throw std::invalid_argument("sup bound: diameter must be finite and non-negative");
  }
  if (dimension < 1) {
    throw std::invalid_argument("sup bound: dimension must be positive");
  }
}

}  // namespace

double expected_sup_bound(double kernel_max, double kernel_lipschitz, double diameter,
                          int dimension) {
  check_common(kernel_max, kernel_lipschitz, diameter, dimension);
  const double scale = 12.0 * std::sqrt(6.0 * dimension);
  return scale * std::max(std::sqrt(kernel_max), std::sqrt(diameter * kernel_lipschitz));
}

double sample_sup_bound(double kernel_max, double kernel_lipschitz, double diameter, int dimension,
                        double delta) {
  check_common(kernel_max, kernel_lipschitz, diameter, dimension);
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("sup bound: delta must lie in (0, 1)");
  }
  return expected_sup_bound(kernel_max, kernel_lipschitz, diameter, dimension) +
         std::sqrt(2.0 * std::log(1.0 / delta)) * std::sqrt(kernel_max);
}

LipschitzEstimate probabilistic_lipschitz(const Kernel& kernel, const KernelConstants& constants,
                                          const Domain& domain, double delta_l) {
  const int d = kernel.dimension();
  if (domain.dimension() != d) {
    throw std::invalid_argument("lipschitz: domain and kernel dimension mismatch");
  }
  if (constants.derivative_kernel_diag.size() != d ||
      constants.derivative_kernel_lipschitz.size() != d) {
    throw std::invalid_argument("lipschitz: kernel constants dimension mismatch");
  }
  if (!(delta_l > 0.0) || !(delta_l < 1.0)) {
    throw std::invalid_argument("lipschitz: delta must lie in (0, 1)");
  }
  const double r = domain.diameter();
  LipschitzEstimate estimate;
  estimate.per_dimension.resize(d);
  for (int i = 0; i < d; ++i) {
    estimate.per_dimension[i] =
        sample_sup_bound(constants.derivative_kernel_diag[i],
                         constants.derivative_kernel_lipschitz[i], r, d, delta_l / (2.0 * d));
  }
  estimate.value = estimate.per_dimension.norm();
  estimate.confidence = 1.0 - delta_l;
  return estimate;
}

}  // namespace gpbound
