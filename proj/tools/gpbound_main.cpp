#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpbound/experiments.hpp"
#include "gpbound/version.hpp"

namespace {

using gpbound::format_double;

std::string join_doubles(const Eigen::VectorXd& values) {
  std::string out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

void print_result(const gpbound::ExperimentResult& result) {
  for (size_t j = 0; j < result.kernels.size(); ++j) {
    const gpbound::KernelSpec& spec = result.kernels[j];
    std::printf("kernel (output %zu): signal_variance=%s lengthscales=[%s]", j + 1,
                format_double(spec.signal_variance).c_str(),
                join_doubles(spec.lengthscales).c_str());
    if (j < result.log_marginals.size()) {
      std::printf(" log_marginal=%s", format_double(result.log_marginals[j]).c_str());
    }
    std::printf("\n");
  }
  for (Eigen::Index j = 0; j < result.f_lipschitz.size(); ++j) {
    std::printf("f_lipschitz (output %lld): %s\n", static_cast<long long>(j + 1),
                format_double(result.f_lipschitz[j]).c_str());
  }
  for (size_t j = 0; j < result.certificates.size(); ++j) {
    const gpbound::ErrorCertificate& cert = result.certificates[j];
    std::printf(
        "certificate (output %zu): beta=%s gamma=%s mean_lipschitz=%s std_modulus=%s delta=%s\n",
        j + 1, format_double(cert.beta).c_str(), format_double(cert.gamma).c_str(),
        format_double(cert.mean_lipschitz).c_str(),
        format_double(cert.std_modulus_at_tau).c_str(), format_double(cert.delta).c_str());
  }
  if (!result.certificates.empty()) {
    std::printf("all certificates hold jointly with probability >= %s\n",
                format_double(1.0 - result.total_failure_probability).c_str());
  }
  for (const gpbound::AsymptoticRow& row : result.rows) {
    std::printf("n=%d sup_error=%s bound=%s beta=%s gamma=%s max_sigma=%s\n", row.n,
                format_double(row.sup_error).c_str(), format_double(row.bound).c_str(),
                format_double(row.beta).c_str(), format_double(row.gamma).c_str(),
                format_double(row.max_sigma).c_str());
  }
  for (const gpbound::CheckResult& check : result.checks) {
    std::printf("[%s] %s: %s\n", check.passed ? "PASS" : "FAIL", check.name.c_str(),
                check.detail.c_str());
  }
  for (const std::string& file : result.files) std::printf("wrote %s\n", file.c_str());
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool no_plots = false;
  std::vector<std::string> data_paths;
};

void add_common_flags(CLI::App* sub, CommonFlags& flags, CLI::Option*& seed_option,
                      bool with_config, bool with_data) {
  if (with_config) {
    sub->add_option("--config", flags.config_path, "experiment config (json)")
        ->required()
        ->check(CLI::ExistingFile);
  }
  seed_option = sub->add_option("--seed", flags.seed, "override the config seed");
  sub->add_option("--out", flags.out_dir, "override the output directory");
  sub->add_flag("--no-plots", flags.no_plots, "skip svg plots, keep csv/json artifacts");
  if (with_data) {
    sub->add_option("--data", flags.data_paths,
                    "training dataset csv, one per output (skips data generation)")
        ->check(CLI::ExistingFile);
  }
}

void apply_overrides(gpbound::ExperimentConfig& config, const CommonFlags& flags,
                     const CLI::Option* seed_option) {
  if (seed_option != nullptr && seed_option->count() > 0) config.seed = flags.seed;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.no_plots) config.plots = false;
}

gpbound::ExperimentConfig tracking_config(const CommonFlags& flags,
                                          const CLI::Option* seed_option) {
  gpbound::ExperimentConfig config = gpbound::load_config(flags.config_path);
  if (config.kind == gpbound::ExperimentKind::asymptotics) {
    throw std::invalid_argument(
        "this subcommand needs a tracking experiment config (synthetic or robot)");
  }
  apply_overrides(config, flags, seed_option);
  return config;
}

int execute(const std::function<gpbound::ExperimentResult()>& runner) {
  try {
    const gpbound::ExperimentResult result = runner();
    print_result(result);
    if (!result.all_passed()) {
      std::fprintf(stderr, "one or more checks failed\n");
      return 2;
    }
    return 0;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaussian process regression with certified uniform error bounds and "
               "ultimate-boundedness certificates for tracking control"};
  app.set_version_flag("--version", std::string(gpbound::kToolName) + " " + gpbound::kToolVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::Option* seed_option = nullptr;

  CLI::App* fit = app.add_subcommand(
      "fit", "fit kernel hyperparameters on the training data and write the kernel report");
  add_common_flags(fit, flags, seed_option, true, true);

  CLI::App* lipschitz = app.add_subcommand(
      "lipschitz", "bound the Lipschitz constant of the unknown dynamics");
  add_common_flags(lipschitz, flags, seed_option, true, true);

  CLI::App* certify = app.add_subcommand(
      "certify", "compute uniform error bound certificates for the fitted model");
  add_common_flags(certify, flags, seed_option, true, true);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the certified pipeline and the closed-loop tracking simulation");
  add_common_flags(simulate, flags, seed_option, true, true);

  CLI::App* asymptotics = app.add_subcommand(
      "asymptotics", "track the uniform error bound as the training set grows");
  add_common_flags(asymptotics, flags, seed_option, true, false);

  CLI::App* repro_synthetic = app.add_subcommand(
      "repro-synthetic",
      "built-in two-dimensional experiment: fit, certify, simulate, and check containment");
  add_common_flags(repro_synthetic, flags, seed_option, false, false);

  CLI::App* repro_robot = app.add_subcommand(
      "repro-robot",
      "built-in two-joint manipulator experiment: fit, certify, simulate, and check containment");
  add_common_flags(repro_robot, flags, seed_option, false, false);

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(fit)) {
    return execute([&] {
      return gpbound::run_tracking(tracking_config(flags, seed_option),
                                   gpbound::PipelineStage::fit, flags.data_paths);
    });
  }
  if (app.got_subcommand(lipschitz)) {
    return execute([&] {
      return gpbound::run_tracking(tracking_config(flags, seed_option),
                                   gpbound::PipelineStage::lipschitz, flags.data_paths);
    });
  }
  if (app.got_subcommand(certify)) {
    return execute([&] {
      return gpbound::run_tracking(tracking_config(flags, seed_option),
                                   gpbound::PipelineStage::certify, flags.data_paths);
    });
  }
  if (app.got_subcommand(simulate)) {
    return execute([&] {
      return gpbound::run_tracking(tracking_config(flags, seed_option),
                                   gpbound::PipelineStage::simulate, flags.data_paths);
    });
  }
  if (app.got_subcommand(asymptotics)) {
    return execute([&] {
      gpbound::ExperimentConfig config = gpbound::load_config(flags.config_path);
      if (config.kind != gpbound::ExperimentKind::asymptotics) {
        throw std::invalid_argument("this subcommand needs an asymptotics config");
      }
      apply_overrides(config, flags, seed_option);
      return gpbound::run_asymptotics(config);
    });
  }
  if (app.got_subcommand(repro_synthetic)) {
    return execute([&] {
      gpbound::ExperimentConfig config =
          gpbound::default_config(gpbound::ExperimentKind::synthetic);
      apply_overrides(config, flags, seed_option);
      return gpbound::run_experiment(config);
    });
  }
  if (app.got_subcommand(repro_robot)) {
    return execute([&] {
      gpbound::ExperimentConfig config = gpbound::default_config(gpbound::ExperimentKind::robot);
      apply_overrides(config, flags, seed_option);
      return gpbound::run_experiment(config);
    });
  }
  return 1;
}
