#pragma once

#include <Eigen/Core>

#include "gpbound/domain.hpp"
#include "gpbound/kernel.hpp"

namespace gpbound {

// Bound on the expected supremum of a zero-mean GP sample over a region of
// the given diameter, via a metric-entropy argument:
// 12 sqrt(6 d) max(sqrt(kernel_max), sqrt(diameter * kernel_lipschitz)).
double expected_sup_bound(double kernel_max, double kernel_lipschitz, double diameter,
                          int dimension);

// High-probability supremum bound: the expected supremum plus a Gaussian
// concentration term sqrt(2 log(1/delta)) sqrt(kernel_max).
double sample_sup_bound(double kernel_max, double kernel_lipschitz, double diameter, int dimension,
                        double delta);

struct LipschitzEstimate {
  double value = 0.0;             // Euclidean norm of the per-dimension bounds
  Eigen::VectorXd per_dimension;  // bound on sup |d sample / d x_i|
  double confidence = 0.0;        // 1 - delta_l
};

// Probabilistic Lipschitz constant for samples of a GP with the given
// kernel.  Each partial derivative of a sample is itself a GP sample whose
// kernel is the derivative kernel, so its supremum is bounded by
// sample_sup_bound with the union-bound level delta_l / (2 d) per dimension
// and sign.
LipschitzEstimate probabilistic_lipschitz(const Kernel& kernel, const KernelConstants& constants,
                                          const Domain& domain, double delta_l);

}  // namespace gpbound
