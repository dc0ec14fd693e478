#include "gpbound/control.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gpbound/errors.hpp"

namespace gpbound {

void ControllerGains::validate() const {
  if (!(control_gain > 0.0) || !std::isfinite(control_gain)) {
    throw std::invalid_argument("gains: control gain must be finite and positive");
  }
  if (!(filter_gain > 0.0) || !std::isfinite(filter_gain)) {
    throw std::invalid_argument("gains: filter gain must be finite and positive");
  }
}

ReferenceTrajectory::ReferenceTrajectory(int outputs, VectorFn position, VectorFn velocity,
                                         VectorFn acceleration)
    : outputs_(outputs),
      position_(std::move(position)),
      velocity_(std::move(velocity)),
      acceleration_(std::move(acceleration)) {
  if (outputs_ < 1) {
    throw std::invalid_argument("reference: output count must be positive");
  }
  if (!position_ || !velocity_ || !acceleration_) {
    throw std::invalid_argument("reference: all three component functions are required");
  }
}

ReferencePoint ReferenceTrajectory::at(double t) const {
  ReferencePoint ref{position_(t), velocity_(t), acceleration_(t)};
  if (ref.position.size() != outputs_ || ref.velocity.size() != outputs_ ||
      ref.acceleration.size() != outputs_) {
    throw std::invalid_argument("reference: component size mismatch");
  }
  return ref;
}

void ReferenceTrajectory::check_consistency(const std::vector<double>& times, double step,
                                            double tolerance) const {
  for (const double t : times) {
    const ReferencePoint lo = at(t - step);
    const ReferencePoint hi = at(t + step);
    const ReferencePoint mid = at(t);
    const Eigen::VectorXd vel = (hi.position - lo.position) / (2.0 * step);
    const Eigen::VectorXd acc = (hi.velocity - lo.velocity) / (2.0 * step);
    if ((vel - mid.velocity).lpNorm<Eigen::Infinity>() > tolerance ||
        (acc - mid.acceleration).lpNorm<Eigen::Infinity>() > tolerance) {
      throw std::invalid_argument("reference: velocity or acceleration inconsistent with position at t=" +
                                  std::to_string(t));
    }
  }
}

ReferenceTrajectory ReferenceTrajectory::sinusoid(const Eigen::VectorXd& amplitude,
                                                  const Eigen::VectorXd& angular_frequency,
                                                  const Eigen::VectorXd& phase) {
  const int n = static_cast<int>(amplitude.size());
  if (angular_frequency.size() != n || phase.size() != n) {
    throw std::invalid_argument("reference: sinusoid parameter size mismatch");
  }
  return ReferenceTrajectory(
      n,
      [=](double t) -> Eigen::VectorXd {
        return amplitude.array() * (angular_frequency.array() * t + phase.array()).sin();
      },
      [=](double t) -> Eigen::VectorXd {
        return amplitude.array() * angular_frequency.array() *
               (angular_frequency.array() * t + phase.array()).cos();
      },
      [=](double t) -> Eigen::VectorXd {
        return -amplitude.array() * angular_frequency.array().square() *
               (angular_frequency.array() * t + phase.array()).sin();
      });
}

Eigen::VectorXd Plant::derivative(const Eigen::Ref<const Eigen::VectorXd>& state,
                                  const Eigen::Ref<const Eigen::VectorXd>& input) const {
  if (state.size() != state_dimension()) {
    throw std::invalid_argument("plant: state dimension mismatch");
  }
  if (input.size() != outputs) {
    throw std::invalid_argument("plant: input dimension mismatch");
  }
  const Eigen::VectorXd f = unknown(state);
  Eigen::VectorXd out(state.size());
  for (int j = 0; j < outputs; ++j) {
    out[2 * j] = state[2 * j + 1];
    out[2 * j + 1] = f[j] + input[j];
  }
  return out;
}

Eigen::VectorXd reference_state(const ReferencePoint& ref) {
  const int n = static_cast<int>(ref.position.size());
  Eigen::VectorXd out(2 * n);
  for (int j = 0; j < n; ++j) {
    out[2 * j] = ref.position[j];
    out[2 * j + 1] = ref.velocity[j];
  }
  return out;
}

Eigen::VectorXd tracking_error(const Eigen::Ref<const Eigen::VectorXd>& state,
                               const ReferencePoint& ref) {
  const Eigen::VectorXd target = reference_state(ref);
  if (state.size() != target.size()) {
    throw std::invalid_argument("tracking error: state dimension mismatch");
  }
  return state - target;
}

Eigen::VectorXd filtered_error(const Eigen::Ref<const Eigen::VectorXd>& state,
                               const ReferencePoint& ref, double filter_gain) {
  const Eigen::VectorXd e = tracking_error(state, ref);
  const int n = static_cast<int>(ref.position.size());
  Eigen::VectorXd r(n);
  for (int j = 0; j < n; ++j) {
    r[j] = filter_gain * e[2 * j] + e[2 * j + 1];
  }
  return r;
}

Eigen::VectorXd feedback_linearizing_control(const Eigen::Ref<const Eigen::VectorXd>& state,
                                             const MeanFn& model_mean, const ReferencePoint& ref,
                                             const ControllerGains& gains) {
  gains.validate();
  const Eigen::VectorXd e = tracking_error(state, ref);
  const Eigen::VectorXd r = filtered_error(state, ref, gains.filter_gain);
  const Eigen::VectorXd mean = model_mean(state);
  const int n = static_cast<int>(ref.position.size());
  if (mean.size() != n) {
    throw std::invalid_argument("control: model output dimension mismatch");
  }
  Eigen::VectorXd u(n);
  for (int j = 0; j < n; ++j) {
    u[j] = -mean[j] + ref.acceleration[j] - gains.control_gain * r[j] -
           gains.filter_gain * e[2 * j + 1];
  }
  return u;
}

Eigen::VectorXd rk4_step(const StateDerivative& derivative,
                         const Eigen::Ref<const Eigen::VectorXd>& state, double t, double dt) {
  const Eigen::VectorXd k1 = derivative(state, t);
  const Eigen::VectorXd k2 = derivative(state + 0.5 * dt * k1, t + 0.5 * dt);
  const Eigen::VectorXd k3 = derivative(state + 0.5 * dt * k2, t + 0.5 * dt);
  const Eigen::VectorXd k4 = derivative(state + dt * k3, t + dt);
  return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

SimulationTrace simulate(const Plant& plant, const ControlLaw& law,
                         const ReferenceTrajectory& reference, const ControllerGains& gains,
                         double t_span, double dt,
                         const Eigen::Ref<const Eigen::VectorXd>& initial_state) {
  gains.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("simulate: step size must be finite and positive");
  }
  if (!(t_span >= dt)) {
    throw std::invalid_argument("simulate: horizon must cover at least one step");
  }
  if (plant.outputs != reference.outputs()) {
    throw std::invalid_argument("simulate: plant and reference output counts differ");
  }
  if (initial_state.size() != plant.state_dimension()) {
    throw std::invalid_argument("simulate: initial state dimension mismatch");
  }

  const int steps = static_cast<int>(std::llround(t_span / dt));
  const int samples = steps + 1;
  const int nx = plant.state_dimension();
  const int nu = plant.outputs;

  SimulationTrace trace;
  trace.times.resize(samples);
  trace.states.resize(samples, nx);
  trace.controls.resize(samples, nu);
  trace.tracking_errors.resize(samples, nx);
  trace.filtered_errors.resize(samples, nu);
  trace.error_norms.resize(samples, nu);
  trace.bound_radii = Eigen::MatrixXd::Constant(samples, nu,
                                                std::numeric_limits<double>::quiet_NaN());

  const StateDerivative closed_loop = [&](const Eigen::Ref<const Eigen::VectorXd>& x,
                                          double t) -> Eigen::VectorXd {
    return plant.derivative(x, law(x, t));
  };

  Eigen::VectorXd x = initial_state;
  for (int k = 0; k < samples; ++k) {
    const double t = k * dt;
    if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e100) {
      throw DivergenceError("simulate: state diverged at t=" + std::to_string(t), t);
    }
    const ReferencePoint ref = reference.at(t);
    const Eigen::VectorXd u = law(x, t);
    if (u.size() != nu) {
      throw std::invalid_argument("simulate: control dimension mismatch");
    }
    if (!u.allFinite()) {
      throw DivergenceError("simulate: control diverged at t=" + std::to_string(t), t);
    }
    trace.times[k] = t;
    trace.states.row(k) = x;
    trace.controls.row(k) = u;
    const Eigen::VectorXd e = tracking_error(x, ref);
    trace.tracking_errors.row(k) = e;
    trace.filtered_errors.row(k) = filtered_error(x, ref, gains.filter_gain);
    for (int j = 0; j < nu; ++j) {
      trace.error_norms(k, j) = std::hypot(e[2 * j], e[2 * j + 1]);
    }
    if (k < steps) {
      x = rk4_step(closed_loop, x, t, dt);
    }
  }
  return trace;
}

double ultimate_bound_radius(const ErrorCertificate& certificate,
                             const Eigen::Ref<const Eigen::VectorXd>& x,
                             const ControllerGains& gains) {
  gains.validate();
  const double eta = certificate.eta(x);
  return eta / (gains.control_gain * std::hypot(gains.filter_gain, 1.0));
}

void annotate_bound_radii(SimulationTrace& trace,
                          const std::vector<ErrorCertificate>& certificates,
                          const ControllerGains& gains) {
  gains.validate();
  const int nu = static_cast<int>(trace.controls.cols());
  if (static_cast<int>(certificates.size()) != nu) {
    throw std::invalid_argument("annotate: one certificate per output required");
  }
  const double denom = gains.control_gain * std::hypot(gains.filter_gain, 1.0);
  for (int j = 0; j < nu; ++j) {
    const ErrorCertificate& cert = certificates[j];
    Eigen::VectorXd means, variances;
    cert.posterior->predict_batch(trace.states, means, variances);
    for (int k = 0; k < trace.steps(); ++k) {
      if (cert.domain.contains(trace.states.row(k).transpose())) {
        trace.bound_radii(k, j) = cert.eta_from_sigma(std::sqrt(variances[k])) / denom;
      }
    }
  }
}

double synthetic_unknown(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != 2) {
    throw std::invalid_argument("synthetic plant: state must be two-dimensional");
  }
  return 1.0 - std::sin(x[0]) + 1.0 / (1.0 + std::exp(-x[1]));
}

Plant synthetic_plant() {
  Plant plant;
  plant.outputs = 1;
  plant.unknown = [](const Eigen::Ref<const Eigen::VectorXd>& state) -> Eigen::VectorXd {
    Eigen::VectorXd f(1);
    f[0] = synthetic_unknown(state);
    return f;
  };
  return plant;
}

namespace {

// Unit masses and lengths, unit link inertias, centers of mass at the link
// midpoints.
constexpr double kMass1 = 1.0;
constexpr double kMass2 = 1.0;
constexpr double kLength1 = 1.0;
constexpr double kLength2 = 1.0;
constexpr double kCom1 = 0.5 * kLength1;
constexpr double kCom2 = 0.5 * kLength2;
constexpr double kInertia1 = 1.0;
constexpr double kInertia2 = 1.0;

// Standard two-link inertia constants.
constexpr double kAlpha = kInertia1 + kInertia2 + kMass1 * kCom1 * kCom1 +
                          kMass2 * (kLength1 * kLength1 + kCom2 * kCom2);
constexpr double kBeta = kMass2 * kLength1 * kCom2;
constexpr double kDelta = kInertia2 + kMass2 * kCom2 * kCom2;

}  // namespace

TwoLinkArm::TwoLinkArm(double gravity) : gravity_(gravity) {
  if (!std::isfinite(gravity) || gravity < 0.0) {
    throw std::invalid_argument("arm: gravity must be finite and non-negative");
  }
}

Eigen::Matrix2d TwoLinkArm::mass_matrix(const Eigen::Vector2d& q) const {
  const double c2 = std::cos(q[1]);
  Eigen::Matrix2d m;
  m << kAlpha + 2.0 * kBeta * c2, kDelta + kBeta * c2, kDelta + kBeta * c2, kDelta;
  return m;
}

Eigen::Matrix2d TwoLinkArm::coriolis_matrix(const Eigen::Vector2d& q,
                                            const Eigen::Vector2d& qd) const {
  const double s2 = std::sin(q[1]);
  Eigen::Matrix2d c;
  c << -kBeta * s2 * qd[1], -kBeta * s2 * (qd[0] + qd[1]), kBeta * s2 * qd[0], 0.0;
  return c;
}

Eigen::Vector2d TwoLinkArm::gravity_torque(const Eigen::Vector2d& q) const {
  const double c1 = std::cos(q[0]);
  const double c12 = std::cos(q[0] + q[1]);
  Eigen::Vector2d g;
  g[0] = gravity_ * ((kMass1 * kCom1 + kMass2 * kLength1) * c1 + kMass2 * kCom2 * c12);
  g[1] = gravity_ * kMass2 * kCom2 * c12;
  return g;
}

Eigen::Vector2d TwoLinkArm::unknown(const Eigen::Ref<const Eigen::VectorXd>& state) const {
  if (state.size() != 4) {
    throw std::invalid_argument("arm: state must be four-dimensional");
  }
  const Eigen::Vector2d q(state[0], state[2]);
  const Eigen::Vector2d qd(state[1], state[3]);
  const Eigen::Vector2d torque = -coriolis_matrix(q, qd) * qd - gravity_torque(q);
  return mass_matrix(q).ldlt().solve(torque);
}

double TwoLinkArm::energy(const Eigen::Ref<const Eigen::VectorXd>& state) const {
  if (state.size() != 4) {
    throw std::invalid_argument("arm: state must be four-dimensional");
  }
  const Eigen::Vector2d q(state[0], state[2]);
  const Eigen::Vector2d qd(state[1], state[3]);
  const double kinetic = 0.5 * qd.dot(mass_matrix(q) * qd);
  const double potential =
      gravity_ * ((kMass1 * kCom1 + kMass2 * kLength1) * std::sin(q[0]) +
                  kMass2 * kCom2 * std::sin(q[0] + q[1]));
  return kinetic + potential;
}

Eigen::Vector2d TwoLinkArm::end_effector(const Eigen::Vector2d& q) const {
  return Eigen::Vector2d(kLength1 * std::cos(q[0]) + kLength2 * std::cos(q[0] + q[1]),
                         kLength1 * std::sin(q[0]) + kLength2 * std::sin(q[0] + q[1]));
}

Plant TwoLinkArm::plant() const {
  Plant plant;
  plant.outputs = 2;
  plant.unknown = [arm = *this](const Eigen::Ref<const Eigen::VectorXd>& state) -> Eigen::VectorXd {
    return arm.unknown(state);
  };
  return plant;
}

}  // namespace gpbound
