#include "gpbound/control.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "gpbound/errors.hpp"
#include "gpbound/grid.hpp"
#include "test_support.hpp"

using namespace gpbound;

namespace {

// Solution of x'' = -x - x' from (1, 0) at t = 1.
constexpr double kDampedPosition = 0.6597001533917017;
constexpr double kDampedVelocity = -0.533507195114693;

ReferenceTrajectory zero_reference(int outputs) {
  const auto zero = [outputs](double) { return Eigen::VectorXd::Zero(outputs).eval(); };
  return ReferenceTrajectory(outputs, zero, zero, zero);
}

Plant custom_plant(int outputs,
                   std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)> unknown) {
  Plant plant;
  plant.outputs = outputs;
  plant.unknown = std::move(unknown);
  return plant;
}

}  // namespace

TEST_CASE("controller gains validation") {
  ControllerGains gains{2.0, 1.0};
  CHECK_NOTHROW(gains.validate());
  CHECK_THROWS_AS((ControllerGains{0.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((ControllerGains{2.0, -1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((ControllerGains{std::numeric_limits<double>::quiet_NaN(), 1.0}).validate(),
                  std::invalid_argument);
}

TEST_CASE("sinusoid reference and consistency check") {
  Eigen::VectorXd amplitude(2), omega(2), phase(2);
  amplitude << 2.0, 1.0;
  omega << 1.0, 3.0;
  phase << 0.0, 0.5 * std::numbers::pi;
  const ReferenceTrajectory ref = ReferenceTrajectory::sinusoid(amplitude, omega, phase);
  CHECK(ref.outputs() == 2);

  const ReferencePoint at0 = ref.at(0.0);
  CHECK(at0.position[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(at0.position[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at0.velocity[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(at0.acceleration[1] == doctest::Approx(-9.0).epsilon(1e-12));

  CHECK_NOTHROW(ref.check_consistency({0.0, 0.3, 1.7, 4.0}));

  // A reference whose claimed velocity is wrong is rejected by the check.
  const ReferenceTrajectory broken(
      1, [](double t) { return Eigen::VectorXd::Constant(1, std::sin(t)).eval(); },
      [](double) { return Eigen::VectorXd::Constant(1, 5.0).eval(); },
      [](double t) { return Eigen::VectorXd::Constant(1, -std::sin(t)).eval(); });
  CHECK_THROWS_AS(broken.check_consistency({0.0, 1.0}), std::invalid_argument);

  Eigen::VectorXd short_vec(1);
  short_vec << 1.0;
  CHECK_THROWS_AS(ReferenceTrajectory::sinusoid(amplitude, omega, short_vec),
                  std::invalid_argument);
}

TEST_CASE("tracking and filtered error arithmetic") {
  Eigen::VectorXd amplitude(1), omega(1), phase(1);
  amplitude << 2.0;
  omega << 1.0;
  phase << 0.0;
  const ReferenceTrajectory ref = ReferenceTrajectory::sinusoid(amplitude, omega, phase);
  const ReferencePoint point = ref.at(0.0);  // position 0, velocity 2

  Eigen::VectorXd state(2);
  state << 1.0, 3.0;
  const Eigen::VectorXd e = tracking_error(state, point);
  CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e[1] == doctest::Approx(1.0).epsilon(1e-14));

  const Eigen::VectorXd r = filtered_error(state, point, 1.0);
  CHECK(r[0] == doctest::Approx(2.0).epsilon(1e-14));

  // u = -mean + acc - k_c r - lambda e_vel with mean 0, acc 0, k_c 2.
  const ControllerGains gains{2.0, 1.0};
  const MeanFn zero_mean = [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Zero(1).eval();
  };
  const Eigen::VectorXd u = feedback_linearizing_control(state, zero_mean, point, gains);
  CHECK(u[0] == doctest::Approx(-5.0).epsilon(1e-14));

  // With zero error the control reduces to acc - mean.
  Eigen::VectorXd on_ref(2);
  on_ref << point.position[0], point.velocity[0];
  const MeanFn const_mean = [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Constant(1, 0.7).eval();
  };
  const Eigen::VectorXd exact = feedback_linearizing_control(on_ref, const_mean, point, gains);
  CHECK(exact[0] == doctest::Approx(point.acceleration[0] - 0.7).epsilon(1e-14));
}

TEST_CASE("closed loop matches the linear oracle") {
  // With a zero plant, zero model and zero reference the tracking error obeys
  // e'' = -(k_c + lambda) e' - k_c lambda e; for k_c = 2, lambda = 1 the modes
  // are exp(-t) and exp(-2t).
  const Plant plant = custom_plant(1, [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Zero(1).eval();
  });
  const ControllerGains gains{2.0, 1.0};
  const ReferenceTrajectory ref = zero_reference(1);
  const MeanFn zero_mean = [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Zero(1).eval();
  };
  const ControlLaw law = [&](const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
    return feedback_linearizing_control(x, zero_mean, ref.at(t), gains);
  };
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.5;
  const SimulationTrace trace = simulate(plant, law, ref, gains, 1.0, 1e-3, x0);

  const int last = trace.steps() - 1;
  const double expected_pos = 2.5 * std::exp(-1.0) - 1.5 * std::exp(-2.0);
  const double expected_vel = -2.5 * std::exp(-1.0) + 3.0 * std::exp(-2.0);
  CHECK(trace.states(last, 0) == doctest::Approx(expected_pos).epsilon(1e-8));
  CHECK(trace.states(last, 1) == doctest::Approx(expected_vel).epsilon(1e-8));
}

TEST_CASE("simulation integrates a damped oscillator accurately") {
  const Plant plant = custom_plant(1, [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Zero(1).eval();
  });
  const ControlLaw law = [](const Eigen::Ref<const Eigen::VectorXd>& x, double) {
    return Eigen::VectorXd::Constant(1, -x[0] - x[1]).eval();
  };
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  const SimulationTrace trace =
      simulate(plant, law, zero_reference(1), ControllerGains{1.0, 1.0}, 1.0, 1e-4, x0);

  const int last = trace.steps() - 1;
  CHECK(trace.times[last] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(trace.states(last, 0) - kDampedPosition) < 1e-9);
  CHECK(std::abs(trace.states(last, 1) - kDampedVelocity) < 1e-9);
}

TEST_CASE("rk4 observes fourth order convergence") {
  const Plant plant = custom_plant(1, [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Zero(1).eval();
  });
  const ControlLaw law = [](const Eigen::Ref<const Eigen::VectorXd>& x, double) {
    return Eigen::VectorXd::Constant(1, -x[0] - x[1]).eval();
  };
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;

  const auto end_state = [&](double dt) {
    const SimulationTrace trace =
        simulate(plant, law, zero_reference(1), ControllerGains{1.0, 1.0}, 1.0, dt, x0);
    return trace.states.row(trace.steps() - 1).eval();
  };
  const Eigen::RowVectorXd coarse = end_state(4e-3);
  const Eigen::RowVectorXd mid = end_state(2e-3);
  const Eigen::RowVectorXd fine = end_state(1e-3);
  const double order = std::log2((coarse - mid).norm() / (mid - fine).norm());
  CHECK(order >= 3.5);
  CHECK(order <= 4.5);
}

TEST_CASE("perfect model tracks exactly from matched initial conditions") {
  const Plant plant = synthetic_plant();
  Eigen::VectorXd amplitude(1), omega(1), phase(1);
  amplitude << 2.0;
  omega << 1.0;
  phase << 0.0;
  const ReferenceTrajectory ref = ReferenceTrajectory::sinusoid(amplitude, omega, phase);
  const ControllerGains gains{2.0, 1.0};
  const MeanFn true_mean = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return plant.unknown(x);
  };
  const ControlLaw law = [&](const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
    return feedback_linearizing_control(x, true_mean, ref.at(t), gains);
  };
  const SimulationTrace trace =
      simulate(plant, law, ref, gains, 5.0, 1e-3, reference_state(ref.at(0.0)));
  CHECK(trace.error_norms.maxCoeff() < 1e-9);
  CHECK(trace.filtered_errors.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("simulation detects divergence") {
  const Plant plant = custom_plant(1, [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return Eigen::VectorXd::Constant(1, x[1] * x[1]).eval();
  });
  const ControlLaw law = [](const Eigen::Ref<const Eigen::VectorXd>&, double) {
    return Eigen::VectorXd::Zero(1).eval();
  };
  Eigen::VectorXd x0(2);
  x0 << 0.0, 1.0;
  try {
    simulate(plant, law, zero_reference(1), ControllerGains{1.0, 1.0}, 5.0, 1e-3, x0);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& error) {
    CHECK(error.time() > 0.5);
    CHECK(error.time() <= 5.0);
    CHECK(std::string(error.what()).find("diverged") != std::string::npos);
  }
}

TEST_CASE("simulation trace bookkeeping") {
  const Plant plant = synthetic_plant();
  Eigen::VectorXd amplitude(1), omega(1), phase(1);
  amplitude << 1.0;
  omega << 2.0;
  phase << 0.3;
  const ReferenceTrajectory ref = ReferenceTrajectory::sinusoid(amplitude, omega, phase);
  const ControllerGains gains{3.0, 0.5};
  const ControlLaw law = [&](const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
    return feedback_linearizing_control(
        x, [](const Eigen::Ref<const Eigen::VectorXd>&) { return Eigen::VectorXd::Zero(1).eval(); },
        ref.at(t), gains);
  };
  Eigen::VectorXd x0(2);
  x0 << -1.0, 0.0;
  const SimulationTrace trace = simulate(plant, law, ref, gains, 0.5, 1e-2, x0);

  REQUIRE(trace.steps() == 51);
  CHECK(trace.times[0] == 0.0);
  CHECK(trace.times[50] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(trace.states.row(0).transpose().isApprox(x0));
  CHECK(trace.bound_radii.array().isNaN().all());

  for (const int k : {0, 17, 50}) {
    const double t = trace.times[k];
    const ReferencePoint point = ref.at(t);
    const Eigen::VectorXd state = trace.states.row(k).transpose();
    CHECK(trace.controls.row(k).transpose().isApprox(law(state, t), 1e-14));
    CHECK(trace.tracking_errors.row(k).transpose().isApprox(tracking_error(state, point), 1e-14));
    CHECK(trace.filtered_errors.row(k).transpose().isApprox(
        filtered_error(state, point, gains.filter_gain), 1e-14));
    CHECK(trace.error_norms(k, 0) ==
          doctest::Approx(std::hypot(trace.tracking_errors(k, 0), trace.tracking_errors(k, 1)))
              .epsilon(1e-14));
  }

  CHECK_THROWS_AS(simulate(plant, law, ref, gains, 0.5, 0.0, x0), std::invalid_argument);
  CHECK_THROWS_AS(simulate(plant, law, ref, gains, 0.5, 1e-2, Eigen::Vector3d::Zero()),
                  std::invalid_argument);
}

TEST_CASE("filtered error derivative identity along a trace") {
  // r' = f(x) - model(x) - k_c r holds along closed-loop trajectories; with a
  // zero plant and zero model this reduces to r' = -k_c r.
  const Plant plant = custom_plant(1, [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Zero(1).eval();
  });
  const ControllerGains gains{2.0, 1.0};
  const ReferenceTrajectory ref = zero_reference(1);
  const MeanFn zero_mean = [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Zero(1).eval();
  };
  const ControlLaw law = [&](const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
    return feedback_linearizing_control(x, zero_mean, ref.at(t), gains);
  };
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  const double dt = 1e-3;
  const SimulationTrace trace = simulate(plant, law, ref, gains, 2.0, dt, x0);
  for (int k = 1; k + 1 < trace.steps(); k += 50) {
    const double fd = (trace.filtered_errors(k + 1, 0) - trace.filtered_errors(k - 1, 0)) / (2.0 * dt);
    const double expected = -gains.control_gain * trace.filtered_errors(k, 0);
    CHECK(std::abs(fd - expected) < 1e-4);
  }
}

TEST_CASE("synthetic plant values") {
  CHECK(synthetic_unknown(Eigen::Vector2d(0.0, 0.0)) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(synthetic_unknown(Eigen::Vector2d(0.5 * std::numbers::pi, 0.0)) ==
        doctest::Approx(0.5).epsilon(1e-13));
  CHECK(synthetic_unknown(Eigen::Vector2d(1.0, 50.0)) ==
        doctest::Approx(2.0 - std::sin(1.0)).epsilon(1e-13));

  std::mt19937_64 rng(131);
  const Domain box = Domain::cube(-10.0, 10.0, 2);
  for (int trial = 0; trial < 2000; ++trial) {
    const double f = synthetic_unknown(gpbound::testing::random_point(box, rng));
    CHECK(f > 0.0);
    CHECK(f < 3.0);
  }
  CHECK_THROWS_AS(synthetic_unknown(Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST_CASE("two link arm dynamics structure") {
  const TwoLinkArm arm(9.81);

  // Mass matrix: symmetric, positive definite, dominated by the configuration
  // of the elbow.
  std::mt19937_64 rng(137);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int trial = 0; trial < 5000; ++trial) {
    const Eigen::Vector2d q(angle(rng), angle(rng));
    const Eigen::Matrix2d m = arm.mass_matrix(q);
    CHECK(m(0, 1) == m(1, 0));
    CHECK(m.determinant() > 2.5);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(m);
    CHECK(solver.eigenvalues()(0) > 0.2);
  }

  // The inertia rate minus twice the Coriolis matrix is skew-symmetric.
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector2d q(angle(rng), angle(rng));
    const Eigen::Vector2d qd(angle(rng), angle(rng));
    const double h = 1e-6;
    const Eigen::Matrix2d m_dot =
        (arm.mass_matrix(q + h * qd) - arm.mass_matrix(q - h * qd)) / (2.0 * h);
    const Eigen::Matrix2d skew = m_dot - 2.0 * arm.coriolis_matrix(q, qd);
    CHECK((skew + skew.transpose()).lpNorm<Eigen::Infinity>() < 1e-6);
  }

  // Gravity torque is the configuration gradient of the potential energy.
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector2d q(angle(rng), angle(rng));
    const auto potential = [&](const Eigen::VectorXd& conf) {
      Eigen::VectorXd state(4);
      state << conf[0], 0.0, conf[1], 0.0;
      return arm.energy(state);
    };
    const Eigen::VectorXd grad = gpbound::testing::fd_gradient(potential, q, 1e-6);
    CHECK((grad - arm.gravity_torque(q)).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("two link arm acceleration solve") {
  const TwoLinkArm arm(9.81);

  // M f + C qd + g = 0 defines the drift acceleration.
  std::mt19937_64 rng(139);
  std::uniform_real_distribution<double> angle(-2.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd state(4);
    state << angle(rng), angle(rng), angle(rng), angle(rng);
    const Eigen::Vector2d q(state[0], state[2]);
    const Eigen::Vector2d qd(state[1], state[3]);
    const Eigen::Vector2d f = arm.unknown(state);
    const Eigen::Vector2d residual =
        arm.mass_matrix(q) * f + arm.coriolis_matrix(q, qd) * qd + arm.gravity_torque(q);
    CHECK(residual.lpNorm<Eigen::Infinity>() < 1e-12);
  }

  // Hand-computed drift at the stretched horizontal rest configuration.
  Eigen::VectorXd rest(4);
  rest.setZero();
  const Eigen::Vector2d f0 = arm.unknown(rest);
  CHECK(f0[0] == doctest::Approx(-6.220975609756098).epsilon(1e-12));
  CHECK(f0[1] == doctest::Approx(4.785365853658537).epsilon(1e-12));

  // Without gravity and at rest there is no drift, so the plant reduces to a
  // pair of double integrators.
  const TwoLinkArm weightless(0.0);
  Eigen::VectorXd posed(4);
  posed << 0.7, 0.0, -1.1, 0.0;
  CHECK(weightless.unknown(posed).norm() == 0.0);
  Eigen::VectorXd input(2);
  input << 0.3, -0.2;
  const Eigen::VectorXd deriv = weightless.plant().derivative(posed, input);
  CHECK(deriv[0] == 0.0);
  CHECK(deriv[1] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(deriv[2] == 0.0);
  CHECK(deriv[3] == doctest::Approx(-0.2).epsilon(1e-14));
}

TEST_CASE("two link arm end effector") {
  const TwoLinkArm arm;
  const Eigen::Vector2d stretched = arm.end_effector(Eigen::Vector2d(0.0, 0.0));
  CHECK(stretched[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(stretched[1] == doctest::Approx(0.0).epsilon(1e-14));

  const Eigen::Vector2d bent =
      arm.end_effector(Eigen::Vector2d(0.5 * std::numbers::pi, -0.5 * std::numbers::pi));
  CHECK(bent[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bent[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("passive swing conserves energy") {
  const TwoLinkArm arm(9.81);
  const Plant plant = arm.plant();
  const ControlLaw passive = [](const Eigen::Ref<const Eigen::VectorXd>&, double) {
    return Eigen::VectorXd::Zero(2).eval();
  };
  Eigen::VectorXd x0(4);
  x0 << 1.2, 0.0, -0.5, 0.0;
  const SimulationTrace trace =
      simulate(plant, passive, zero_reference(2), ControllerGains{1.0, 1.0}, 2.0, 1e-3, x0);

  const double initial = arm.energy(x0);
  double worst = 0.0;
  for (int k = 0; k < trace.steps(); ++k) {
    worst = std::max(worst, std::abs(arm.energy(trace.states.row(k).transpose()) - initial));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("perfectly linearized arm tracks the reference") {
  const TwoLinkArm arm(9.81);
  const Plant plant = arm.plant();
  Eigen::VectorXd amplitude(2), omega(2), phase(2);
  amplitude << 1.0, 1.0;
  omega << 1.0, 1.0;
  phase << 0.0, 0.5 * std::numbers::pi;
  const ReferenceTrajectory ref = ReferenceTrajectory::sinusoid(amplitude, omega, phase);
  const ControllerGains gains{7.0, 1.0};
  const MeanFn true_mean = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return Eigen::VectorXd(arm.unknown(x));
  };
  const ControlLaw law = [&](const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
    return feedback_linearizing_control(x, true_mean, ref.at(t), gains);
  };
  const SimulationTrace trace =
      simulate(plant, law, ref, gains, 3.0, 1e-3, reference_state(ref.at(0.0)));
  CHECK(trace.error_norms.maxCoeff() < 1e-8);
}

TEST_CASE("ultimate bound radius scales with the gains") {
  const SquaredExponentialArd kernel(KernelSpec::isotropic(1.0, 1.0, 2));
  const Domain box = Domain::cube(-2.0, 2.0, 2);
  const KernelConstants constants = kernel_constants(kernel, box);
  Dataset data;
  data.inputs = uniform_grid(box, 4);
  data.targets = Eigen::VectorXd::Zero(16);
  data.noise_variance = 0.01;
  const auto posterior = fit(std::move(data), kernel);
  const ErrorCertificate cert = certify(posterior, constants, box, 1e-4, 0.01, 1.0);

  const Eigen::Vector2d x(0.3, -0.4);
  const double base = ultimate_bound_radius(cert, x, ControllerGains{2.0, 1.0});
  CHECK(base == doctest::Approx(cert.eta(x) / (2.0 * std::sqrt(2.0))).epsilon(1e-14));
  CHECK(ultimate_bound_radius(cert, x, ControllerGains{4.0, 1.0}) ==
        doctest::Approx(0.5 * base).epsilon(1e-14));

  CHECK_THROWS_AS(ultimate_bound_radius(cert, Eigen::Vector2d(5.0, 0.0), ControllerGains{2.0, 1.0}),
                  std::domain_error);
}

TEST_CASE("bound radius annotation follows the certified domain") {
  const SquaredExponentialArd kernel(KernelSpec::isotropic(1.0, 1.0, 2));
  const Domain box = Domain::cube(-1.0, 1.0, 2);
  const KernelConstants constants = kernel_constants(kernel, box);
  Dataset data;
  data.inputs = uniform_grid(box, 3);
  data.targets = Eigen::VectorXd::Zero(9);
  data.noise_variance = 0.01;
  const auto posterior = fit(std::move(data), kernel);
  const ErrorCertificate cert = certify(posterior, constants, box, 1e-4, 0.01, 1.0);

  // A trace that wanders out of the box: positions from -2 to 2.
  SimulationTrace trace;
  const int samples = 9;
  trace.times = Eigen::VectorXd::LinSpaced(samples, 0.0, 2.0);
  trace.states.resize(samples, 2);
  for (int k = 0; k < samples; ++k) {
    trace.states(k, 0) = -2.0 + 0.5 * k;
    trace.states(k, 1) = 0.0;
  }
  trace.controls.resize(samples, 1);
  trace.bound_radii = Eigen::MatrixXd::Constant(samples, 1, std::numeric_limits<double>::quiet_NaN());

  const ControllerGains gains{2.0, 1.0};
  annotate_bound_radii(trace, {cert}, gains);
  for (int k = 0; k < samples; ++k) {
    const bool inside = std::abs(trace.states(k, 0)) <= 1.0;
    CHECK(std::isnan(trace.bound_radii(k, 0)) == !inside);
    if (inside) {
      CHECK(trace.bound_radii(k, 0) ==
            doctest::Approx(ultimate_bound_radius(cert, trace.states.row(k).transpose(), gains))
                .epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(annotate_bound_radii(trace, {cert, cert}, gains), std::invalid_argument);
}
