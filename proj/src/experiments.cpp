#include "gpbound/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gpbound/grid.hpp"
#include "gpbound/rng.hpp"
#include "gpbound/svg.hpp"
#include "gpbound/version.hpp"
#include "json.hpp"

namespace gpbound {

namespace {

using ordered_json = nlohmann::ordered_json;

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const std::exception& error) {
    throw std::runtime_error(std::string("stage ") + name + ": " + error.what());
  }
}

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file << content;
  if (!file) throw std::runtime_error("write to " + path + " failed");
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

ordered_json manifest_json(const Manifest& manifest) {
  ordered_json out;
  out["schema"] = manifest.schema;
  out["tool"] = std::string(kToolName) + " " + kToolVersion;
  out["config_hash"] = manifest.config_hash;
  out["seed"] = manifest.seed;
  out["provenance"] = manifest.provenance;
  return out;
}

Manifest make_manifest(const ExperimentConfig& config, const std::string& schema,
                       const std::vector<std::string>& provenance) {
  Manifest manifest;
  manifest.schema = schema;
  manifest.config_hash = config_hash(config);
  manifest.seed = config.seed;
  manifest.provenance = provenance;
  return manifest;
}

using VectorField = std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

VectorField true_unknown(const ExperimentConfig& config) {
  if (config.kind == ExperimentKind::synthetic) {
    return [](const Eigen::Ref<const Eigen::VectorXd>& x) {
      return Eigen::VectorXd::Constant(1, synthetic_unknown(x)).eval();
    };
  }
  const TwoLinkArm arm(config.gravity);
  return [arm](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return Eigen::VectorXd(arm.unknown(x));
  };
}

Plant experiment_plant(const ExperimentConfig& config) {
  if (config.kind == ExperimentKind::synthetic) return synthetic_plant();
  return TwoLinkArm(config.gravity).plant();
}

std::vector<Dataset> generate_training_data(const ExperimentConfig& config) {
  const Eigen::MatrixXd inputs =
      uniform_grid(config.training_grid.region, config.training_grid.nodes);
  const VectorField truth = true_unknown(config);
  const int outputs = config.outputs();
  std::mt19937_64 rng(mix_seed(config.seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = std::sqrt(config.noise_variance);
  std::vector<Dataset> datasets(static_cast<size_t>(outputs));
  for (auto& dataset : datasets) {
    dataset.inputs = inputs;
    dataset.targets.resize(inputs.rows());
    dataset.noise_variance = config.noise_variance;
  }
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const Eigen::VectorXd f = truth(inputs.row(i).transpose());
    for (int j = 0; j < outputs; ++j) datasets[j].targets[i] = f[j] + sigma * normal(rng);
  }
  return datasets;
}

std::vector<Dataset> load_training_data(const ExperimentConfig& config,
                                        const std::vector<std::string>& paths) {
  if (static_cast<int>(paths.size()) != config.outputs()) {
    throw std::invalid_argument("expected one dataset file per output, got " +
                                std::to_string(paths.size()) + " for " +
                                std::to_string(config.outputs()));
  }
  std::vector<Dataset> datasets;
  for (const auto& path : paths) {
    Dataset dataset = read_dataset_csv(path, config.noise_variance);
    if (dataset.dimension() != config.domain.dimension()) {
      throw std::invalid_argument(path + ": dataset dimension does not match the domain");
    }
    if (dataset.size() < 1) throw std::invalid_argument(path + ": dataset is empty");
    datasets.push_back(std::move(dataset));
  }
  return datasets;
}

MeanFn posterior_mean(const std::vector<std::shared_ptr<const Posterior>>& posteriors) {
  return [posteriors](const Eigen::Ref<const Eigen::VectorXd>& x) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(posteriors.size()));
    for (size_t j = 0; j < posteriors.size(); ++j) {
      out[static_cast<Eigen::Index>(j)] = posteriors[j]->predict(x).mean;
    }
    return out;
  };
}

int plot_stride(Eigen::Index samples) {
  return static_cast<int>(std::max<Eigen::Index>(1, samples / 2000));
}

Eigen::VectorXd thin(const Eigen::Ref<const Eigen::VectorXd>& values, int stride) {
  const Eigen::Index count = (values.size() + stride - 1) / stride;
  Eigen::VectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = values[i * stride];
  return out;
}

ordered_json check_json(const std::vector<CheckResult>& checks) {
  ordered_json out = ordered_json::array();
  for (const auto& check : checks) {
    out.push_back(ordered_json{{"name", check.name}, {"passed", check.passed}, {"detail", check.detail}});
  }
  return out;
}

ordered_json kernel_json(const KernelSpec& spec) {
  return ordered_json{{"signal_variance", spec.signal_variance},
                      {"lengthscales", to_std(spec.lengthscales)}};
}

// The ball radius varies with the state and is undefined outside the
// certified region, so "enters and stays" is the start of the longest
// suffix along which every output error sits inside its finite radius.
// Returns -1 when even the final sample is outside.
int containment_entry(const SimulationTrace& trace) {
  const auto inside = [&](int k) {
    for (Eigen::Index j = 0; j < trace.bound_radii.cols(); ++j) {
      const double radius = trace.bound_radii(k, j);
      if (!std::isfinite(radius) || trace.error_norms(k, j) > radius) return false;
    }
    return true;
  };
  int entry = trace.steps();
  for (int k = trace.steps() - 1; k >= 0; --k) {
    if (!inside(k)) break;
    entry = k;
  }
  return entry < trace.steps() ? entry : -1;
}

CheckResult containment_check(const SimulationTrace& trace, int entry) {
  CheckResult check;
  check.name = "error-enters-and-stays";
  const double horizon = trace.times[trace.steps() - 1];
  if (entry < 0) {
    check.passed = false;
    check.detail = "the tracking error is outside the certified ball at the end of the horizon";
    return check;
  }
  const double entry_time = trace.times[entry];
  if (entry_time > 0.5 * horizon) {
    check.passed = false;
    check.detail = "containment only holds from t=" + format_double(entry_time) +
                   ", past half of the " + format_double(horizon) + " s horizon";
    return check;
  }
  check.passed = true;
  check.detail = "contained from t=" + format_double(entry_time) + " through t=" +
                 format_double(horizon);
  return check;
}

struct GridEvaluation {
  Eigen::MatrixXd points;
  Eigen::VectorXd truth;
  Eigen::VectorXd means;
  Eigen::VectorXd etas;
};

GridEvaluation evaluate_on_grid(const ExperimentConfig& config, const ErrorCertificate& certificate,
                                int nodes_per_dim) {
  GridEvaluation eval;
  eval.points = uniform_grid(config.domain, nodes_per_dim);
  const VectorField truth = true_unknown(config);
  eval.truth.resize(eval.points.rows());
  for (Eigen::Index i = 0; i < eval.points.rows(); ++i) {
    eval.truth[i] = truth(eval.points.row(i).transpose())[0];
  }
  Eigen::VectorXd variances;
  certificate.posterior->predict_batch(eval.points, eval.means, variances);
  eval.etas.resize(eval.points.rows());
  for (Eigen::Index i = 0; i < eval.points.rows(); ++i) {
    eval.etas[i] = certificate.eta_from_sigma(std::sqrt(std::max(0.0, variances[i])));
  }
  return eval;
}

CheckResult grid_bound_check(const GridEvaluation& eval) {
  CheckResult check;
  check.name = "bound-holds-on-grid";
  double worst_ratio = 0.0;
  Eigen::Index failures = 0;
  for (Eigen::Index i = 0; i < eval.points.rows(); ++i) {
    const double error = std::abs(eval.truth[i] - eval.means[i]);
    if (error > eval.etas[i]) ++failures;
    if (eval.etas[i] > 0.0) worst_ratio = std::max(worst_ratio, error / eval.etas[i]);
  }
  check.passed = failures == 0;
  check.detail = "max |f - mean| / eta = " + format_double(worst_ratio) + " over " +
                 std::to_string(eval.points.rows()) + " nodes" +
                 (failures > 0 ? ", " + std::to_string(failures) + " violations" : "");
  return check;
}

CheckResult lyapunov_check(const ExperimentConfig& config, const SimulationTrace& trace,
                           const ErrorCertificate& certificate) {
  CheckResult check;
  check.name = "lyapunov-decrease";
  const VectorField truth = true_unknown(config);
  Eigen::VectorXd means, variances;
  certificate.posterior->predict_batch(trace.states, means, variances);
  int active = 0, violations = 0;
  for (int k = 0; k < trace.steps(); ++k) {
    const double eta = certificate.eta_from_sigma(std::sqrt(std::max(0.0, variances[k])));
    const double r = trace.filtered_errors(k, 0);
    if (std::abs(r) * config.gains.control_gain <= eta) continue;
    ++active;
    const Eigen::VectorXd state = trace.states.row(k).transpose();
    const double v_dot =
        r * (truth(state)[0] - means[k] - config.gains.control_gain * r);
    if (v_dot >= 0.0) ++violations;
  }
  check.passed = violations == 0;
  check.detail = std::to_string(violations) + " violations among " + std::to_string(active) +
                 " active samples of " + std::to_string(trace.steps());
  return check;
}

void write_trace_csv(const std::string& path, const SimulationTrace& trace, int outputs,
                     const Manifest& manifest) {
  const int samples = trace.steps();
  const int state_dim = static_cast<int>(trace.states.cols());
  std::vector<std::string> columns;
  columns.push_back("t");
  for (int i = 0; i < state_dim; ++i) columns.push_back("x_" + std::to_string(i + 1));
  for (int j = 0; j < outputs; ++j) columns.push_back("u_" + std::to_string(j + 1));
  for (int j = 0; j < outputs; ++j) columns.push_back("err_norm_" + std::to_string(j + 1));
  for (int j = 0; j < outputs; ++j) columns.push_back("r_" + std::to_string(j + 1));
  for (int j = 0; j < outputs; ++j) columns.push_back("bound_radius_" + std::to_string(j + 1));
  Eigen::MatrixXd table(samples, static_cast<Eigen::Index>(columns.size()));
  table.col(0) = trace.times;
  Eigen::Index col = 1;
  table.middleCols(col, state_dim) = trace.states;
  col += state_dim;
  table.middleCols(col, outputs) = trace.controls;
  col += outputs;
  table.middleCols(col, outputs) = trace.error_norms;
  col += outputs;
  table.middleCols(col, outputs) = trace.filtered_errors;
  col += outputs;
  table.middleCols(col, outputs) = trace.bound_radii;
  write_table_csv(path, columns, table, manifest);
}

ordered_json certificates_json(const ExperimentResult& result, const ExperimentConfig& config,
                               const std::vector<std::string>& provenance) {
  ordered_json certs = ordered_json::array();
  for (size_t j = 0; j < result.certificates.size(); ++j) {
    const ErrorCertificate& cert = result.certificates[j];
    ordered_json entry;
    entry["output"] = j + 1;
    entry["tau"] = cert.tau;
    entry["delta"] = cert.delta;
    entry["beta"] = cert.beta;
    entry["gamma"] = cert.gamma;
    entry["mean_lipschitz"] = cert.mean_lipschitz;
    entry["std_modulus_at_tau"] = cert.std_modulus_at_tau;
    entry["f_lipschitz"] = cert.f_lipschitz;
    entry["min_eigenvalue"] = cert.posterior->min_eigenvalue();
    entry["min_eigenvalue_provenance"] = cert.min_eigenvalue_provenance;
    entry["training_points"] = cert.posterior->size();
    entry["kernel"] = kernel_json(result.kernels[j]);
    if (j < result.log_marginals.size()) entry["log_marginal"] = result.log_marginals[j];
    certs.push_back(entry);
  }
  ordered_json out;
  out["manifest"] = manifest_json(make_manifest(config, "gpbound-certificate-v1", provenance));
  out["noise_variance"] = result.noise_variance;
  out["total_failure_probability"] = result.total_failure_probability;
  out["domain"] = ordered_json{{"lower", to_std(config.domain.lower())},
                               {"upper", to_std(config.domain.upper())}};
  out["certificates"] = certs;
  return out;
}

}  // namespace

bool ExperimentResult::all_passed() const {
  for (const auto& check : checks) {
    if (!check.passed) return false;
  }
  return true;
}

Eigen::Vector2d arm_drift_lipschitz(const TwoLinkArm& arm, const Domain& domain,
                                    std::uint64_t seed) {
  if (domain.dimension() != 4) {
    throw std::invalid_argument("arm drift bound: domain must be four-dimensional");
  }
  const auto gradient_norms = [&](const Eigen::VectorXd& x) {
    Eigen::Matrix<double, 2, 4> jacobian;
    const double h = 1e-5;
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd hi = x, lo = x;
      hi[i] += h;
      lo[i] -= h;
      jacobian.col(i) = (arm.unknown(hi) - arm.unknown(lo)) / (2.0 * h);
    }
    return Eigen::Vector2d(jacobian.row(0).norm(), jacobian.row(1).norm());
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Vector2d best = Eigen::Vector2d::Zero();
  std::array<Eigen::VectorXd, 2> argmax = {domain.lower(), domain.lower()};
  Eigen::VectorXd x(4);
  for (int sample = 0; sample < 20000; ++sample) {
    for (int i = 0; i < 4; ++i) {
      x[i] = domain.lower()[i] + unit(rng) * (domain.upper()[i] - domain.lower()[i]);
    }
    const Eigen::Vector2d value = gradient_norms(x);
    for (int j = 0; j < 2; ++j) {
      if (value[j] > best[j]) {
        best[j] = value[j];
        argmax[j] = x;
      }
    }
  }
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd point = argmax[j];
    double value = best[j];
    Eigen::VectorXd step = 0.05 * domain.widths();
    for (int iteration = 0; iteration < 80; ++iteration) {
      bool improved = false;
      for (int i = 0; i < 4; ++i) {
        for (const double sign : {1.0, -1.0}) {
          Eigen::VectorXd candidate = point;
          candidate[i] += sign * step[i];
          candidate = domain.project(candidate);
          const double v = gradient_norms(candidate)[j];
          if (v > value) {
            value = v;
            point = candidate;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
      if (step.maxCoeff() < 1e-9) break;
    }
    best[j] = value;
  }
  return best * 1.05;
}

ExperimentResult run_tracking(const ExperimentConfig& config, PipelineStage upto,
                              const std::vector<std::string>& data_paths) {
  if (config.kind == ExperimentKind::asymptotics) {
    throw std::invalid_argument("run_tracking: config describes the convergence study");
  }
  config.validate();
  const auto start_time = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.noise_variance = config.noise_variance;
  std::vector<std::string> provenance;
  std::filesystem::create_directories(config.out_dir);
  const int outputs = config.outputs();
  const bool generated = data_paths.empty();

  const std::vector<Dataset> datasets = stage("training-data", [&] {
    if (generated) {
      provenance.push_back("training_data=noisy drift observations on the configured grid");
      return generate_training_data(config);
    }
    provenance.push_back("training_data=loaded from csv");
    return load_training_data(config, data_paths);
  });

  stage("kernel-fit", [&] {
    const KernelSpec init{config.kernel.signal_variance, config.kernel.lengthscales};
    for (int j = 0; j < outputs; ++j) {
      if (config.kernel.fit_from_data) {
        HyperFitOptions options;
        options.starts = config.kernel.starts;
        options.max_iterations = config.kernel.max_iterations;
        options.fix_noise = true;
        options.seed = mix_seed(config.seed, 2 + static_cast<std::uint64_t>(j));
        const HyperFitResult fitted = fit_hyperparameters(datasets[j], init, options);
        result.kernels.push_back(fitted.kernel);
        result.log_marginals.push_back(fitted.log_marginal);
      } else {
        result.kernels.push_back(init);
        result.log_marginals.push_back(log_marginal_likelihood(datasets[j], init));
      }
    }
    provenance.push_back(config.kernel.fit_from_data
                             ? "kernel=fitted by likelihood ascent (" +
                                   std::to_string(config.kernel.starts) +
                                   " starts, fixed noise)"
                             : "kernel=configured");
  });

  std::vector<std::shared_ptr<const Posterior>> posteriors;
  stage("posterior", [&] {
    for (int j = 0; j < outputs; ++j) {
      const SquaredExponentialArd kernel(result.kernels[j]);
      posteriors.push_back(fit(datasets[j], kernel));
    }
  });

  const auto write_training_csvs = [&] {
    if (!generated) return;
    for (int j = 0; j < outputs; ++j) {
      const std::string name =
          outputs == 1 ? "training_data.csv" : "training_data_joint" + std::to_string(j + 1) + ".csv";
      const std::string path = path_join(config.out_dir, name);
      write_dataset_csv(path, datasets[j].inputs, datasets[j].targets,
                        make_manifest(config, "gpbound-dataset-v1", provenance));
      result.files.push_back(path);
    }
  };

  const auto write_manifest = [&](const ordered_json& summary) {
    ordered_json root;
    root["manifest"] = manifest_json(make_manifest(config, "gpbound-manifest-v1", provenance));
    root["config"] = ordered_json::parse(config_to_json(config));
    root["checks"] = check_json(result.checks);
    root["summary"] = summary;
    root["files"] = result.files;
    const std::string path = path_join(config.out_dir, "manifest.json");
    write_text(path, root.dump(2) + "\n");
    result.files.push_back(path);
  };

  const auto wall_seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  };

  if (upto == PipelineStage::fit) {
    write_training_csvs();
    ordered_json fit_report;
    fit_report["manifest"] = manifest_json(make_manifest(config, "gpbound-kernel-v1", provenance));
    fit_report["fitted"] = config.kernel.fit_from_data;
    fit_report["noise_variance"] = config.noise_variance;
    ordered_json per_output = ordered_json::array();
    for (int j = 0; j < outputs; ++j) {
      per_output.push_back(ordered_json{{"output", j + 1},
                                        {"kernel", kernel_json(result.kernels[j])},
                                        {"log_marginal", result.log_marginals[j]}});
    }
    fit_report["outputs"] = per_output;
    const std::string path = path_join(config.out_dir, "kernel_fit.json");
    write_text(path, fit_report.dump(2) + "\n");
    result.files.push_back(path);
    write_manifest(ordered_json{{"wall_seconds", wall_seconds()}});
    return result;
  }

  std::vector<KernelConstants> constants;
  stage("kernel-constants", [&] {
    for (int j = 0; j < outputs; ++j) {
      const SquaredExponentialArd kernel(result.kernels[j]);
      constants.push_back(kernel_constants(kernel, config.domain));
    }
    provenance.push_back(
        "kernel_constants=zero-lag analytic maxima with grid and compass search (1% inflation)");
  });

  stage("lipschitz", [&] {
    result.f_lipschitz.resize(outputs);
    switch (config.lipschitz_mode) {
      case LipschitzMode::estimate: {
        const double split = config.delta_l / outputs;
        for (int j = 0; j < outputs; ++j) {
          const SquaredExponentialArd kernel(result.kernels[j]);
          const LipschitzEstimate estimate =
              probabilistic_lipschitz(kernel, constants[j], config.domain, split);
          result.lipschitz.push_back(estimate);
          result.f_lipschitz[j] = estimate.value;
        }
        result.total_failure_probability = config.delta + config.delta_l;
        provenance.push_back("f_lipschitz=sample-path bound at joint confidence 1-delta_l");
        break;
      }
      case LipschitzMode::from_dynamics: {
        const Eigen::Vector2d bound =
            arm_drift_lipschitz(TwoLinkArm(config.gravity), config.domain, mix_seed(config.seed, 7));
        result.f_lipschitz = bound;
        result.total_failure_probability = config.delta;
        provenance.push_back("f_lipschitz=sampled gradient bound on the known dynamics (5% inflation)");
        break;
      }
      case LipschitzMode::fixed: {
        result.f_lipschitz.setConstant(config.f_lipschitz);
        result.total_failure_probability = config.delta;
        provenance.push_back("f_lipschitz=configured");
        break;
      }
    }
  });

  if (upto == PipelineStage::lipschitz) {
    ordered_json report;
    report["manifest"] = manifest_json(make_manifest(config, "gpbound-lipschitz-v1", provenance));
    ordered_json per_output = ordered_json::array();
    for (int j = 0; j < outputs; ++j) {
      ordered_json entry;
      entry["output"] = j + 1;
      entry["f_lipschitz"] = result.f_lipschitz[j];
      if (j < static_cast<int>(result.lipschitz.size())) {
        entry["per_dimension"] = to_std(result.lipschitz[j].per_dimension);
        entry["confidence"] = result.lipschitz[j].confidence;
      }
      per_output.push_back(entry);
    }
    report["outputs"] = per_output;
    const std::string path = path_join(config.out_dir, "lipschitz.json");
    write_text(path, report.dump(2) + "\n");
    result.files.push_back(path);
    write_manifest(ordered_json{{"wall_seconds", wall_seconds()}});
    return result;
  }

  stage("certify", [&] {
    std::vector<OutputModel> models;
    for (int j = 0; j < outputs; ++j) {
      models.push_back(OutputModel{posteriors[j], constants[j], result.f_lipschitz[j]});
    }
    result.certificates = certify_multi(models, config.domain, config.tau, config.delta);
    provenance.push_back("min_eigenvalue=" + result.certificates[0].min_eigenvalue_provenance);
  });

  write_training_csvs();
  {
    const std::string path = path_join(config.out_dir, "certificates.json");
    write_text(path, certificates_json(result, config, provenance).dump(2) + "\n");
    result.files.push_back(path);
  }

  if (upto == PipelineStage::certify) {
    write_manifest(ordered_json{{"wall_seconds", wall_seconds()}});
    return result;
  }

  const ReferenceTrajectory reference = config.reference.build();
  stage("simulate", [&] {
    const Plant plant = experiment_plant(config);
    const MeanFn mean = posterior_mean(posteriors);
    const ControlLaw law = [&](const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
      return feedback_linearizing_control(x, mean, reference.at(t), config.gains);
    };
    result.trace =
        simulate(plant, law, reference, config.gains, config.integrator.t_span,
                 config.integrator.dt, config.initial_state);
    annotate_bound_radii(result.trace, result.certificates, config.gains);
  });

  GridEvaluation grid_eval;
  const int entry = containment_entry(result.trace);
  stage("checks", [&] {
    result.checks.push_back(containment_check(result.trace, entry));
    if (config.kind == ExperimentKind::synthetic) {
      grid_eval = evaluate_on_grid(config, result.certificates[0], 100);
      result.checks.push_back(grid_bound_check(grid_eval));
      result.checks.push_back(lyapunov_check(config, result.trace, result.certificates[0]));
    } else {
      CheckResult task;
      task.name = "task-space-containment";
      if (entry < 0) {
        task.passed = false;
        task.detail = "joint containment never established";
      } else {
        const TwoLinkArm arm(config.gravity);
        task.passed = true;
        double min_margin = std::numeric_limits<double>::infinity();
        for (int k = entry; k < result.trace.steps(); ++k) {
          const Eigen::Vector2d q(result.trace.states(k, 0), result.trace.states(k, 2));
          const ReferencePoint point = reference.at(result.trace.times[k]);
          const Eigen::Vector2d q_d(point.position[0], point.position[1]);
          const double task_error = (arm.end_effector(q) - arm.end_effector(q_d)).norm();
          // Unit links: the end effector moves at most 2 per unit of the
          // first joint angle and 1 per unit of the second.
          const double task_radius =
              2.0 * result.trace.bound_radii(k, 0) + result.trace.bound_radii(k, 1);
          min_margin = std::min(min_margin, task_radius - task_error);
          if (task_error > task_radius) {
            task.passed = false;
            task.detail = "end effector left the certified region at t=" +
                          format_double(result.trace.times[k]);
            break;
          }
        }
        if (task.passed) {
          task.detail = "post-transient margin >= " + format_double(min_margin);
        }
      }
      result.checks.push_back(task);
    }
  });

  stage("write", [&] {
    {
      const std::string path = path_join(config.out_dir, "trace.csv");
      write_trace_csv(path, result.trace, outputs,
                      make_manifest(config, "gpbound-trace-v1", provenance));
      result.files.push_back(path);
    }
    if (config.kind == ExperimentKind::robot) {
      ordered_json report;
      report["manifest"] =
          manifest_json(make_manifest(config, "gpbound-task-report-v1", provenance));
      report["transient_entry_time"] =
          entry >= 0 ? ordered_json(result.trace.times[entry]) : ordered_json(nullptr);
      const TwoLinkArm arm(config.gravity);
      double max_task_error = 0.0, max_task_radius = 0.0;
      bool contained = entry >= 0;
      if (entry >= 0) {
        for (int k = entry; k < result.trace.steps(); ++k) {
          const Eigen::Vector2d q(result.trace.states(k, 0), result.trace.states(k, 2));
          const ReferencePoint point = reference.at(result.trace.times[k]);
          const Eigen::Vector2d q_d(point.position[0], point.position[1]);
          const double task_error = (arm.end_effector(q) - arm.end_effector(q_d)).norm();
          const double task_radius =
              2.0 * result.trace.bound_radii(k, 0) + result.trace.bound_radii(k, 1);
          max_task_error = std::max(max_task_error, task_error);
          max_task_radius = std::max(max_task_radius, task_radius);
          if (task_error > task_radius) contained = false;
        }
      }
      report["max_task_error_post_transient"] = max_task_error;
      report["max_task_radius_post_transient"] = max_task_radius;
      report["contained"] = contained;
      const std::string path = path_join(config.out_dir, "task_space_report.json");
      write_text(path, report.dump(2) + "\n");
      result.files.push_back(path);
    }
    if (config.plots) {
      const Manifest plot_manifest = make_manifest(config, "gpbound-plot-v1", provenance);
      const int stride = plot_stride(result.trace.steps());
      const Eigen::VectorXd times = thin(result.trace.times, stride);
      if (config.kind == ExperimentKind::synthetic) {
        Eigen::MatrixXd eta_surface(100, 100);
        for (int iy = 0; iy < 100; ++iy) {
          for (int ix = 0; ix < 100; ++ix) {
            eta_surface(iy, ix) = grid_eval.etas[ix + 100 * iy];
          }
        }
        std::vector<OverlayPoints> markers;
        markers.push_back(OverlayPoints{"training points", "#d62728",
                                        datasets[0].inputs.leftCols(2), 2.4});
        std::vector<OverlayPath> paths;
        Eigen::MatrixXd trajectory(times.size(), 2);
        trajectory.col(0) = thin(result.trace.states.col(0), stride);
        trajectory.col(1) = thin(result.trace.states.col(1), stride);
        paths.push_back(OverlayPath{"state trajectory", "#ffffff", trajectory, 1.8, false});
        Eigen::MatrixXd reference_path(times.size(), 2);
        for (Eigen::Index i = 0; i < times.size(); ++i) {
          const ReferencePoint point = reference.at(times[i]);
          reference_path(i, 0) = point.position[0];
          reference_path(i, 1) = point.velocity[0];
        }
        paths.push_back(OverlayPath{"reference", "#eeeeee", reference_path, 1.4, true});
        HeatmapOptions options;
        options.title = "certified error bound eta over the state space";
        options.x_label = "x_1";
        options.y_label = "x_2";
        const std::string path = path_join(config.out_dir, "bound_surface.svg");
        write_text(path, heatmap(eta_surface, config.domain, options, markers, paths,
                                 plot_manifest.lines()));
        result.files.push_back(path);
      }
      {
        std::vector<SvgSeries> series;
        const std::array<const char*, 2> error_colors = {"#1f6fb2", "#2ca02c"};
        const std::array<const char*, 2> radius_colors = {"#d62728", "#ff7f0e"};
        for (int j = 0; j < outputs; ++j) {
          const std::string suffix = outputs == 1 ? "" : " (joint " + std::to_string(j + 1) + ")";
          series.push_back(SvgSeries{"tracking error" + suffix, error_colors[j % 2],
                                     times, thin(result.trace.error_norms.col(j), stride), 1.8,
                                     false});
          series.push_back(SvgSeries{"certified radius" + suffix, radius_colors[j % 2], times,
                                     thin(result.trace.bound_radii.col(j), stride), 1.8, true});
        }
        ChartOptions options;
        options.title = "tracking error and certified ultimate bound";
        options.x_label = "t [s]";
        options.y_label = "norm of (position error, velocity error)";
        const std::string path = path_join(config.out_dir, "error_vs_bound.svg");
        write_text(path, line_chart(series, options, plot_manifest.lines()));
        result.files.push_back(path);
      }
      if (config.kind == ExperimentKind::robot) {
        const TwoLinkArm arm(config.gravity);
        Eigen::VectorXd ee_x(times.size()), ee_y(times.size()), ref_x(times.size()),
            ref_y(times.size());
        for (Eigen::Index i = 0; i < times.size(); ++i) {
          const int k = static_cast<int>(i) * stride;
          const Eigen::Vector2d q(result.trace.states(k, 0), result.trace.states(k, 2));
          const Eigen::Vector2d p = arm.end_effector(q);
          ee_x[i] = p[0];
          ee_y[i] = p[1];
          const ReferencePoint point = reference.at(times[i]);
          const Eigen::Vector2d p_d =
              arm.end_effector(Eigen::Vector2d(point.position[0], point.position[1]));
          ref_x[i] = p_d[0];
          ref_y[i] = p_d[1];
        }
        std::vector<SvgSeries> series;
        series.push_back(SvgSeries{"end effector", "#1f6fb2", ee_x, ee_y, 1.8, false});
        series.push_back(SvgSeries{"reference", "#2ca02c", ref_x, ref_y, 1.8, true});
        ChartOptions options;
        options.title = "end effector path";
        options.x_label = "z_1";
        options.y_label = "z_2";
        const std::string path = path_join(config.out_dir, "task_space.svg");
        write_text(path, line_chart(series, options, plot_manifest.lines()));
        result.files.push_back(path);
      }
    }
    ordered_json summary;
    summary["entry_time"] =
        entry >= 0 ? ordered_json(result.trace.times[entry]) : ordered_json(nullptr);
    summary["final_error_norms"] =
        to_std(result.trace.error_norms.row(result.trace.steps() - 1).transpose());
    summary["wall_seconds"] = wall_seconds();
    write_manifest(summary);
  });

  return result;
}

ExperimentResult run_asymptotics(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::asymptotics) {
    throw std::invalid_argument("run_asymptotics: config does not describe the convergence study");
  }
  config.validate();
  const auto start_time = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.noise_variance = config.noise_variance;
  result.total_failure_probability = config.delta;
  std::vector<std::string> provenance;
  provenance.push_back("kernel=configured");
  provenance.push_back("truth=separable trigonometric benchmark (known sup and Lipschitz constant)");
  std::filesystem::create_directories(config.out_dir);

  const KernelSpec spec{config.kernel.signal_variance, config.kernel.lengthscales};
  result.kernels.push_back(spec);
  const SquaredExponentialArd kernel(spec);
  const int d = config.domain.dimension();
  const double amplitude = config.truth.amplitude;
  const double angular = 2.0 * std::numbers::pi * config.truth.frequency;
  const ScalarField truth = [amplitude, angular](const Eigen::Ref<const Eigen::VectorXd>& x) {
    double value = amplitude;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      value *= (i % 2 == 0) ? std::sin(angular * x[i]) : std::cos(angular * x[i]);
    }
    return value;
  };

  AsymptoticOptions options;
  options.tau0 = config.tau0;
  options.delta = config.delta;
  options.f_bar = amplitude;
  options.f_lipschitz = amplitude * angular * std::sqrt(static_cast<double>(d));
  options.noise_variance = config.noise_variance;
  options.seed = config.seed;
  options.dense_cap = config.dense_cap;
  options.eval_points_per_dim = config.eval_points_per_dim;
  result.rows = stage("harness", [&] {
    return asymptotic_bounds(truth, kernel, config.domain, config.schedule, options);
  });

  CheckResult sound;
  sound.name = "sup-error-below-bound";
  sound.passed = true;
  double worst = 0.0;
  for (const auto& row : result.rows) {
    if (row.sup_error > row.bound) sound.passed = false;
    if (std::isfinite(row.bound) && row.bound > 0.0) {
      worst = std::max(worst, row.sup_error / row.bound);
    }
  }
  sound.detail = "max sup_error / bound = " + format_double(worst);
  result.checks.push_back(sound);

  CheckResult trend;
  trend.name = "bound-non-increasing-after-first";
  trend.passed = true;
  for (size_t i = 2; i < result.rows.size(); ++i) {
    if (result.rows[i].bound > result.rows[i - 1].bound) trend.passed = false;
  }
  trend.detail = "bounds:";
  for (const auto& row : result.rows) trend.detail += " " + format_double(row.bound);
  result.checks.push_back(trend);

  stage("write", [&] {
    const std::vector<std::string> columns = {"n",     "tau",       "beta",  "gamma",
                                              "max_sigma", "sup_error", "bound"};
    Eigen::MatrixXd table(static_cast<Eigen::Index>(result.rows.size()), 7);
    for (size_t i = 0; i < result.rows.size(); ++i) {
      const auto& row = result.rows[i];
      table.row(static_cast<Eigen::Index>(i)) << row.n, row.tau, row.beta, row.gamma,
          row.max_sigma, row.sup_error, row.bound;
    }
    const std::string csv_path = path_join(config.out_dir, "asymptotics.csv");
    write_table_csv(csv_path, columns, table,
                    make_manifest(config, "gpbound-asymptotics-v1", provenance));
    result.files.push_back(csv_path);

    if (config.plots) {
      Eigen::VectorXd ns(result.rows.size()), bounds(result.rows.size()),
          sups(result.rows.size());
      for (size_t i = 0; i < result.rows.size(); ++i) {
        ns[static_cast<Eigen::Index>(i)] = result.rows[i].n;
        bounds[static_cast<Eigen::Index>(i)] = result.rows[i].bound;
        sups[static_cast<Eigen::Index>(i)] = result.rows[i].sup_error;
      }
      std::vector<SvgSeries> series;
      series.push_back(SvgSeries{"certified bound", "#d62728", ns, bounds, 1.8, false});
      series.push_back(SvgSeries{"observed sup error", "#1f6fb2", ns, sups, 1.8, false});
      ChartOptions options_chart;
      options_chart.title = "uniform error bound as the training set grows";
      options_chart.x_label = "training points";
      options_chart.y_label = "sup over the evaluation grid";
      options_chart.log_x = true;
      options_chart.log_y = true;
      const std::string path = path_join(config.out_dir, "convergence.svg");
      write_text(path,
                 line_chart(series, options_chart, make_manifest(config, "gpbound-plot-v1",
                                                                 provenance)
                                                       .lines()));
      result.files.push_back(path);
    }

    ordered_json root;
    root["manifest"] = manifest_json(make_manifest(config, "gpbound-manifest-v1", provenance));
    root["config"] = ordered_json::parse(config_to_json(config));
    root["checks"] = check_json(result.checks);
    ordered_json summary;
    summary["rows"] = result.rows.size();
    summary["final_bound"] = result.rows.back().bound;
    summary["final_sup_error"] = result.rows.back().sup_error;
    summary["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    root["summary"] = summary;
    root["files"] = result.files;
    const std::string path = path_join(config.out_dir, "manifest.json");
    write_text(path, root.dump(2) + "\n");
    result.files.push_back(path);
  });

  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.kind == ExperimentKind::asymptotics) return run_asymptotics(config);
  return run_tracking(config, PipelineStage::simulate);
}

}  // namespace gpbound
