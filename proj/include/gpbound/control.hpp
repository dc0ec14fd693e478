#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "gpbound/error_bounds.hpp"

namespace gpbound {

struct ControllerGains {
  double control_gain = 2.0;  // gain on the filtered error
  double filter_gain = 1.0;   // slope of the error filter
  void validate() const;
};

struct ReferencePoint {
  Eigen::VectorXd position;
  Eigen::VectorXd velocity;
  Eigen::VectorXd acceleration;
};

// Twice-differentiable reference, queried by time.
class ReferenceTrajectory {
 public:
  using VectorFn = std::function<Eigen::VectorXd(double)>;

  ReferenceTrajectory(int outputs, VectorFn position, VectorFn velocity, VectorFn acceleration);

  int outputs() const { return outputs_; }
  ReferencePoint at(double t) const;

  // Checks by central differences that velocity and acceleration are the
  // time derivatives of position at the given times.
  void check_consistency(const std::vector<double>& times, double step = 1e-5,
                         double tolerance = 1e-5) const;

  // position_j(t) = amplitude_j sin(angular_frequency_j t + phase_j)
  static ReferenceTrajectory sinusoid(const Eigen::VectorXd& amplitude,
                                      const Eigen::VectorXd& angular_frequency,
                                      const Eigen::VectorXd& phase);

 private:
  int outputs_;
  VectorFn position_;
  VectorFn velocity_;
  VectorFn acceleration_;
};

// Control-affine plant: per output j the acceleration is f_j(x) + u_j.  The
// state interleaves positions and velocities as (p_1, v_1, p_2, v_2, ...).
struct Plant {
  int outputs = 0;
  std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)> unknown;

  int state_dimension() const { return 2 * outputs; }
  Eigen::VectorXd derivative(const Eigen::Ref<const Eigen::VectorXd>& state,
                             const Eigen::Ref<const Eigen::VectorXd>& input) const;
};

// Interleaved reference state (position_j, velocity_j).
Eigen::VectorXd reference_state(const ReferencePoint& ref);

// Interleaved tracking error state - reference_state.
Eigen::VectorXd tracking_error(const Eigen::Ref<const Eigen::VectorXd>& state,
                               const ReferencePoint& ref);

// Filtered error per output: r_j = filter_gain * e_pos_j + e_vel_j.
Eigen::VectorXd filtered_error(const Eigen::Ref<const Eigen::VectorXd>& state,
                               const ReferencePoint& ref, double filter_gain);

using MeanFn = std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

// Feedback linearizing tracking control built on a model of the unknown
// dynamics: u = -model(x) + acc_ref - control_gain * r - filter_gain * e_vel.
Eigen::VectorXd feedback_linearizing_control(const Eigen::Ref<const Eigen::VectorXd>& state,
                                             const MeanFn& model_mean, const ReferencePoint& ref,
                                             const ControllerGains& gains);

using StateDerivative =
    std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&, double)>;

// One classical fixed-step fourth-order Runge-Kutta step.
Eigen::VectorXd rk4_step(const StateDerivative& derivative,
                         const Eigen::Ref<const Eigen::VectorXd>& state, double t, double dt);

struct SimulationTrace {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;           // interleaved state rows
  Eigen::MatrixXd controls;         // one column per output
  Eigen::MatrixXd tracking_errors;  // interleaved error rows
  Eigen::MatrixXd filtered_errors;  // one column per output
  Eigen::MatrixXd error_norms;      // per-output norm of (e_pos, e_vel)
  Eigen::MatrixXd bound_radii;      // NaN until annotated

  int steps() const { return static_cast<int>(times.size()); }
};

using ControlLaw =
    std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&, double)>;

// Closed-loop fixed-step integration; records state, control and tracking
// quantities at every step.  Throws DivergenceError when the state leaves
// the representable range before the horizon.
SimulationTrace simulate(const Plant& plant, const ControlLaw& law,
                         const ReferenceTrajectory& reference, const ControllerGains& gains,
                         double t_span, double dt,
                         const Eigen::Ref<const Eigen::VectorXd>& initial_state);

// Radius of the certified ultimate ball for the per-output tracking error:
// eta(x) / (control_gain sqrt(filter_gain^2 + 1)).
double ultimate_bound_radius(const ErrorCertificate& certificate,
                             const Eigen::Ref<const Eigen::VectorXd>& x,
                             const ControllerGains& gains);

// Fills bound_radii from one certificate per output; NaN where the state
// leaves the certified domain.
void annotate_bound_radii(SimulationTrace& trace,
                          const std::vector<ErrorCertificate>& certificates,
                          const ControllerGains& gains);

// Scalar benchmark plant: f(x) = 1 - sin(x_1) + 1 / (1 + exp(-x_2)).
double synthetic_unknown(const Eigen::Ref<const Eigen::VectorXd>& x);
Plant synthetic_plant();

// Planar two-link arm with unit masses, lengths and link inertias, centers
// of mass at the link midpoints, angles measured from the horizontal and
// gravity acting along -y.  Control acts at acceleration level: the applied
// torque for a commanded acceleration u is M(q) u, so q'' = f(x) + u with
// f = M^{-1}(-C q' - g).
class TwoLinkArm {
 public:
  explicit TwoLinkArm(double gravity = 9.81);

  double gravity() const { return gravity_; }
  Eigen::Matrix2d mass_matrix(const Eigen::Vector2d& q) const;
  Eigen::Matrix2d coriolis_matrix(const Eigen::Vector2d& q, const Eigen::Vector2d& qd) const;
  Eigen::Vector2d gravity_torque(const Eigen::Vector2d& q) const;
  Eigen::Vector2d unknown(const Eigen::Ref<const Eigen::VectorXd>& state) const;
  double energy(const Eigen::Ref<const Eigen::VectorXd>& state) const;
  Eigen::Vector2d end_effector(const Eigen::Vector2d& q) const;
  Plant plant() const;

 private:
  double gravity_;
};

}  // namespace gpbound
