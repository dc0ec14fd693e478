#pragma once

#include <Eigen/Core>
#include <memory>

#include "gpbound/domain.hpp"

namespace gpbound {

// Hyperparameters of the squared-exponential ARD kernel.
struct KernelSpec {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;

  int dimension() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;

  static KernelSpec isotropic(double signal_variance, double lengthscale, int dimension);
};

// Covariance function interface.  derivative_kernel(i, x, x2) is the
// covariance of the i-th partial derivative process,
// d^2 k / (dx_i dx2_i), which is itself a kernel for smooth k.
class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual int dimension() const = 0;
  virtual double eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& x2) const = 0;
  virtual double derivative_kernel(int i, const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& x2) const = 0;

  // Gradient with respect to the first argument.
  virtual Eigen::VectorXd eval_gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                                        const Eigen::Ref<const Eigen::VectorXd>& x2) const = 0;
  virtual Eigen::VectorXd derivative_kernel_gradient(int i, const Eigen::Ref<const Eigen::VectorXd>& x,
                                                     const Eigen::Ref<const Eigen::VectorXd>& x2) const = 0;

  // k(x, x) for this kernel; independent of x when the kernel is stationary.
  virtual double prior_variance(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual bool stationary() const = 0;
  virtual std::unique_ptr<Kernel> clone() const = 0;

  // Dense Gram and cross-covariance matrices.  Default implementations loop
  // over eval(); concrete kernels may override with vectorized versions.
  // Rows of the point matrices are points.
  virtual Eigen::MatrixXd gram(const Eigen::Ref<const Eigen::MatrixXd>& points) const;
  virtual Eigen::MatrixXd cross(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                const Eigen::Ref<const Eigen::MatrixXd>& b) const;
};

class SquaredExponentialArd final : public Kernel {
 public:
  explicit SquaredExponentialArd(KernelSpec spec);

  const KernelSpec& spec() const { return spec_; }

  int dimension() const override { return spec_.dimension(); }
  double eval(const Eigen::Ref<const Eigen::VectorXd>& x,
              const Eigen::Ref<const Eigen::VectorXd>& x2) const override;
  double derivative_kernel(int i, const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& x2) const override;
  Eigen::VectorXd eval_gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& x2) const override;
  Eigen::VectorXd derivative_kernel_gradient(int i, const Eigen::Ref<const Eigen::VectorXd>& x,
                                             const Eigen::Ref<const Eigen::VectorXd>& x2) const override;
  double prior_variance(const Eigen::Ref<const Eigen::VectorXd>&) const override {
    return spec_.signal_variance;
  }
  bool stationary() const override { return true; }
  std::unique_ptr<Kernel> clone() const override;

  Eigen::MatrixXd gram(const Eigen::Ref<const Eigen::MatrixXd>& points) const override;
  Eigen::MatrixXd cross(const Eigen::Ref<const Eigen::MatrixXd>& a,
                        const Eigen::Ref<const Eigen::MatrixXd>& b) const override;

 private:
  void check_point(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  KernelSpec spec_;
  Eigen::VectorXd inv_sq_lengthscales_;
};

// Constants of a kernel over a domain that the bound computations consume:
// Lipschitz constants of k and of each derivative kernel, the maximum of
// k(x, x), and the diagonal values k^{di}(x, x).
struct KernelConstants {
  double kernel_lipschitz = 0.0;
  double max_kernel = 0.0;
  Eigen::VectorXd derivative_kernel_diag;
  Eigen::VectorXd derivative_kernel_lipschitz;
};

// Computes KernelConstants by maximizing the relevant gradient norms over
// the set of difference vectors realizable in the domain (a dense grid
// followed by compass-search refinement, inflated by 1%).  Stationary
// maxima at zero lag are evaluated analytically.
KernelConstants kernel_constants(const Kernel& kernel, const Domain& domain);

}  // namespace gpbound
