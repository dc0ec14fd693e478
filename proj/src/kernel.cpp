#include "gpbound/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gpbound {

void KernelSpec::validate() const {
  if (lengthscales.size() == 0) {
    throw std::invalid_argument("kernel: at least one lengthscale required");
  }
  if (!std::isfinite(signal_variance) || signal_variance <= 0.0) {
    throw std::invalid_argument("kernel: signal variance must be finite and positive");
  }
  for (int i = 0; i < lengthscales.size(); ++i) {
    if (!std::isfinite(lengthscales[i]) || lengthscales[i] <= 0.0) {
      throw std::invalid_argument("kernel: lengthscales must be finite and positive");
    }
  }
}

KernelSpec KernelSpec::isotropic(double signal_variance, double lengthscale, int dimension) {
  KernelSpec spec;
  spec.signal_variance = signal_variance;
  spec.lengthscales = Eigen::VectorXd::Constant(dimension, lengthscale);
  return spec;
}

Eigen::MatrixXd Kernel::gram(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  const auto n = points.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = prior_variance(points.row(i).transpose());
    for (Eigen::Index j = 0; j < i; ++j) {
      const double value = eval(points.row(i).transpose(), points.row(j).transpose());
      out(i, j) = value;
      out(j, i) = value;
    }
  }
  return out;
}

Eigen::MatrixXd Kernel::cross(const Eigen::Ref<const Eigen::MatrixXd>& a,
                              const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out(i, j) = eval(a.row(i).transpose(), b.row(j).transpose());
    }
  }
  return out;
}

SquaredExponentialArd::SquaredExponentialArd(KernelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  inv_sq_lengthscales_ = spec_.lengthscales.array().square().inverse();
}

void SquaredExponentialArd::check_point(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != spec_.dimension()) {
    throw std::invalid_argument("kernel: point dimension mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("kernel: point must be finite");
  }
}

double SquaredExponentialArd::eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& x2) const {
  check_point(x);
  check_point(x2);
  const Eigen::VectorXd diff = x - x2;
  const double sq = diff.array().square().matrix().dot(inv_sq_lengthscales_);
  return spec_.signal_variance * std::exp(-0.5 * sq);
}

double SquaredExponentialArd::derivative_kernel(int i, const Eigen::Ref<const Eigen::VectorXd>& x,
                                                const Eigen::Ref<const Eigen::VectorXd>& x2) const {
  if (i < 0 || i >= spec_.dimension()) {
    throw std::invalid_argument("kernel: derivative dimension index out of range");
  }
  check_point(x);
  check_point(x2);
  const Eigen::VectorXd diff = x - x2;
  const double sq = diff.array().square().matrix().dot(inv_sq_lengthscales_);
  const double base = spec_.signal_variance * std::exp(-0.5 * sq);
  const double li2 = inv_sq_lengthscales_[i];
  return li2 * (1.0 - diff[i] * diff[i] * li2) * base;
}

Eigen::VectorXd SquaredExponentialArd::eval_gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                                                     const Eigen::Ref<const Eigen::VectorXd>& x2) const {
  check_point(x);
  check_point(x2);
  const Eigen::VectorXd diff = x - x2;
  const double sq = diff.array().square().matrix().dot(inv_sq_lengthscales_);
  const double base = spec_.signal_variance * std::exp(-0.5 * sq);
  return (-base) * diff.cwiseProduct(inv_sq_lengthscales_);
}

Eigen::VectorXd SquaredExponentialArd::derivative_kernel_gradient(
    int i, const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::VectorXd>& x2) const {
  if (i < 0 || i >= spec_.dimension()) {
    throw std::invalid_argument("kernel: derivative dimension index out of range");
  }
  check_point(x);
  check_point(x2);
  const Eigen::VectorXd diff = x - x2;
  const double sq = diff.array().square().matrix().dot(inv_sq_lengthscales_);
  const double base = spec_.signal_variance * std::exp(-0.5 * sq);
  const double li2 = inv_sq_lengthscales_[i];
  const double di = diff[i];
  Eigen::VectorXd grad = (-li2 * (1.0 - di * di * li2) * base) * diff.cwiseProduct(inv_sq_lengthscales_);
  grad[i] += -2.0 * li2 * li2 * di * base;
  return grad;
}

std::unique_ptr<Kernel> SquaredExponentialArd::clone() const {
  return std::make_unique<SquaredExponentialArd>(spec_);
}

Eigen::MatrixXd SquaredExponentialArd::cross(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                             const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  if (a.cols() != spec_.dimension() || b.cols() != spec_.dimension()) {
    throw std::invalid_argument("kernel: point dimension mismatch");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("kernel: points must be finite");
  }
  const Eigen::VectorXd inv_lengthscales = inv_sq_lengthscales_.cwiseSqrt();
  const Eigen::MatrixXd as = a * inv_lengthscales.asDiagonal();
  const Eigen::MatrixXd bs = b * inv_lengthscales.asDiagonal();
  Eigen::MatrixXd sq = -2.0 * (as * bs.transpose());
  sq.colwise() += as.rowwise().squaredNorm();
  sq.rowwise() += bs.rowwise().squaredNorm().transpose();
  sq = sq.cwiseMax(0.0);
  return spec_.signal_variance * (-0.5 * sq.array()).exp().matrix();
}

Eigen::MatrixXd SquaredExponentialArd::gram(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  Eigen::MatrixXd out = cross(points, points);
  out = 0.5 * (out + out.transpose()).eval();
  out.diagonal().setConstant(spec_.signal_variance);
  return out;
}

namespace {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Candidate {
  double value;
  Eigen::VectorXd point;
};

// Dense grid scan over the box [lower, upper], keeping the best few nodes.
std::vector<Candidate> grid_scan(const Objective& objective, const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper, int nodes_per_dim, int keep) {
  const int d = static_cast<int>(lower.size());
  std::vector<Candidate> best;
  std::vector<int> index(d, 0);
  Eigen::VectorXd point(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      const double frac = nodes_per_dim > 1 ? static_cast<double>(index[i]) / (nodes_per_dim - 1) : 0.5;
      point[i] = lower[i] + frac * (upper[i] - lower[i]);
    }
    const double value = objective(point);
    if (best.size() < static_cast<size_t>(keep) || value > best.back().value) {
      Candidate c{value, point};
      auto pos = std::upper_bound(best.begin(), best.end(), value,
                                  [](double v, const Candidate& rhs) { return v > rhs.value; });
      best.insert(pos, std::move(c));
      if (best.size() > static_cast<size_t>(keep)) best.pop_back();
    }
    int axis = 0;
    while (axis < d && ++index[axis] == nodes_per_dim) {
      index[axis] = 0;
      ++axis;
    }
    if (axis == d) break;
  }
  return best;
}

// Compass search restricted to the box; halves the step when no axis move improves.
double compass_refine(const Objective& objective, Eigen::VectorXd point, double start_value,
                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                      Eigen::VectorXd step) {
  const int d = static_cast<int>(point.size());
  double best = start_value;
  const double step_floor = 1e-12 * std::max(1.0, (upper - lower).maxCoeff());
  while (step.maxCoeff() > step_floor) {
    double move_value = best;
    Eigen::VectorXd move_point = point;
    for (int i = 0; i < d; ++i) {
      for (double sign : {-1.0, 1.0}) {
        Eigen::VectorXd probe = point;
        probe[i] = std::clamp(probe[i] + sign * step[i], lower[i], upper[i]);
        const double value = objective(probe);
        if (value > move_value) {
          move_value = value;
          move_point = probe;
        }
      }
    }
    if (move_value > best) {
      best = move_value;
      point = move_point;
    } else {
      step *= 0.5;
    }
  }
  return best;
}

double maximize_over_box(const Objective& objective, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper) {
  const int d = static_cast<int>(lower.size());
  int nodes = 33;
  if (d > 4) {
    nodes = std::max(9, static_cast<int>(std::floor(std::pow(4e6, 1.0 / d))));
  }
  const auto seeds = grid_scan(objective, lower, upper, nodes, 8);
  Eigen::VectorXd step = (upper - lower) / std::max(1, nodes - 1);
  double best = seeds.front().value;
  for (const auto& seed : seeds) {
    best = std::max(best, compass_refine(objective, seed.point, seed.value, lower, upper, step));
  }
  return best;
}

}  // namespace

KernelConstants kernel_constants(const Kernel& kernel, const Domain& domain) {
  if (domain.dimension() == 0) {
    throw std::invalid_argument("kernel constants: domain is empty");
  }
  if (domain.dimension() != kernel.dimension()) {
    throw std::invalid_argument("kernel constants: domain and kernel dimension mismatch");
  }
  const int d = kernel.dimension();
  const double safety = 1.01;
  KernelConstants out;
  out.derivative_kernel_diag.resize(d);
  out.derivative_kernel_lipschitz.resize(d);

  if (kernel.stationary()) {
    // Gradients depend only on the difference vector, so search the set of
    // differences realizable inside the box.
    const Eigen::VectorXd widths = domain.widths();
    const Eigen::VectorXd lower = -widths;
    const Eigen::VectorXd upper = widths;
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(d);
    const Eigen::VectorXd center = 0.5 * (domain.lower() + domain.upper());

    out.max_kernel = kernel.prior_variance(center);
    out.kernel_lipschitz =
        safety * maximize_over_box(
                     [&](const Eigen::VectorXd& t) { return kernel.eval_gradient(t, origin).norm(); },
                     lower, upper);
    for (int i = 0; i < d; ++i) {
      out.derivative_kernel_diag[i] = kernel.derivative_kernel(i, center, center);
      out.derivative_kernel_lipschitz[i] =
          safety *
          maximize_over_box(
              [&](const Eigen::VectorXd& t) { return kernel.derivative_kernel_gradient(i, t, origin).norm(); },
              lower, upper);
    }
    return out;
  }

  // Non-stationary fallback: search pairs (x, x2) jointly.
  Eigen::VectorXd lower2(2 * d), upper2(2 * d);
  lower2 << domain.lower(), domain.lower();
  upper2 << domain.upper(), domain.upper();
  const auto split = [d](const Eigen::VectorXd& z) {
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>(z.head(d), z.tail(d));
  };
  out.max_kernel =
      safety * maximize_over_box(
                   [&](const Eigen::VectorXd& x) { return kernel.prior_variance(x); },
                   domain.lower(), domain.upper());
  out.kernel_lipschitz = safety * maximize_over_box(
                                      [&](const Eigen::VectorXd& z) {
                                        auto [x, x2] = split(z);
                                        return kernel.eval_gradient(x, x2).norm();
                                      },
                                      lower2, upper2);
  for (int i = 0; i < d; ++i) {
    out.derivative_kernel_diag[i] =
        safety * maximize_over_box(
                     [&](const Eigen::VectorXd& x) { return kernel.derivative_kernel(i, x, x); },
                     domain.lower(), domain.upper());
    out.derivative_kernel_lipschitz[i] =
        safety * maximize_over_box(
                     [&](const Eigen::VectorXd& z) {
                       auto [x, x2] = split(z);
                       return kernel.derivative_kernel_gradient(i, x, x2).norm();
                     },
                     lower2, upper2);
  }
  return out;
}

}  // namespace gpbound
