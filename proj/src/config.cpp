#include "gpbound/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gpbound {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument("config: " + message);
}

double as_double(const json& value, const std::string& key) {
  if (!value.is_number()) fail(key + " must be a number");
  return value.get<double>();
}

int as_int(const json& value, const std::string& key) {
  if (!value.is_number_integer()) fail(key + " must be an integer");
  return value.get<int>();
}

bool as_bool(const json& value, const std::string& key) {
  if (!value.is_boolean()) fail(key + " must be a boolean");
  return value.get<bool>();
}

std::string as_string(const json& value, const std::string& key) {
  if (!value.is_string()) fail(key + " must be a string");
  return value.get<std::string>();
}

std::uint64_t as_seed(const json& value, const std::string& key) {
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
    fail(key + " must be a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

Eigen::VectorXd as_vector(const json& value, const std::string& key) {
  if (!value.is_array() || value.empty()) fail(key + " must be a non-empty array of numbers");
  Eigen::VectorXd out(value.size());
  for (size_t i = 0; i < value.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_double(value[i], key);
  return out;
}

std::vector<int> as_int_vector(const json& value, const std::string& key) {
  if (!value.is_array() || value.empty()) fail(key + " must be a non-empty array of integers");
  std::vector<int> out(value.size());
  for (size_t i = 0; i < value.size(); ++i) out[i] = as_int(value[i], key);
  return out;
}

void check_keys(const json& object, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : object.items()) {
    if (allowed.count(item.key()) == 0) {
      fail("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

Domain parse_domain(const json& value, const std::string& key) {
  if (!value.is_object()) fail(key + " must be an object with lower and upper");
  check_keys(value, {"lower", "upper"}, key);
  if (!value.contains("lower") || !value.contains("upper")) {
    fail(key + " requires lower and upper");
  }
  return Domain(as_vector(value["lower"], key + ".lower"), as_vector(value["upper"], key + ".upper"));
}

json domain_to_json(const Domain& domain) {
  json out;
  out["lower"] = std::vector<double>(domain.lower().data(), domain.lower().data() + domain.dimension());
  out["upper"] = std::vector<double>(domain.upper().data(), domain.upper().data() + domain.dimension());
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string to_string(LipschitzMode mode) {
  switch (mode) {
    case LipschitzMode::estimate: return "estimate";
    case LipschitzMode::from_dynamics: return "from-dynamics";
    case LipschitzMode::fixed: return "fixed";
  }
  fail("unhandled lipschitz mode");
}

// The effective configuration with every applicable key, used both for the
// hash and for the manifest echo.
json effective_json(const ExperimentConfig& config) {
  json out;
  out["experiment"] = to_string(config.kind);
  out["seed"] = config.seed;
  out["out_dir"] = config.out_dir;
  out["noise_variance"] = config.noise_variance;
  out["domain"] = domain_to_json(config.domain);
  out["delta"] = config.delta;
  json kernel;
  kernel["fit_from_data"] = config.kernel.fit_from_data;
  kernel["signal_variance"] = config.kernel.signal_variance;
  kernel["lengthscales"] = to_std(config.kernel.lengthscales);
  kernel["starts"] = config.kernel.starts;
  kernel["max_iterations"] = config.kernel.max_iterations;
  out["kernel"] = kernel;
  if (config.kind == ExperimentKind::asymptotics) {
    out["schedule"] = config.schedule;
    out["tau0"] = config.tau0;
    out["truth"] = json{{"amplitude", config.truth.amplitude}, {"frequency", config.truth.frequency}};
    out["eval_points_per_dim"] = config.eval_points_per_dim;
    out["dense_cap"] = config.dense_cap;
    return out;
  }
  json grid;
  grid["nodes"] = config.training_grid.nodes;
  grid["lower"] = to_std(config.training_grid.region.lower());
  grid["upper"] = to_std(config.training_grid.region.upper());
  out["training_grid"] = grid;
  out["delta_l"] = config.delta_l;
  out["tau"] = config.tau;
  out["gains"] =
      json{{"control_gain", config.gains.control_gain}, {"filter_gain", config.gains.filter_gain}};
  json reference;
  reference["amplitude"] = to_std(config.reference.amplitude);
  reference["angular_frequency"] = to_std(config.reference.angular_frequency);
  reference["phase"] = to_std(config.reference.phase);
  out["reference"] = reference;
  out["integrator"] = json{{"dt", config.integrator.dt}, {"t_span", config.integrator.t_span}};
  out["initial_state"] = to_std(config.initial_state);
  if (config.lipschitz_mode == LipschitzMode::fixed) {
    out["f_lipschitz"] = config.f_lipschitz;
  } else {
    out["f_lipschitz"] = to_string(config.lipschitz_mode);
  }
  if (config.kind == ExperimentKind::robot) {
    out["gravity"] = config.gravity;
  }
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::synthetic: return "synthetic";
    case ExperimentKind::robot: return "robot";
    case ExperimentKind::asymptotics: return "asymptotics";
  }
  fail("unhandled experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "synthetic") return ExperimentKind::synthetic;
  if (name == "robot") return ExperimentKind::robot;
  if (name == "asymptotics") return ExperimentKind::asymptotics;
  fail("experiment must be synthetic, robot or asymptotics, not \"" + name + "\"");
}

void ExperimentConfig::validate() const {
  if (domain.dimension() == 0) fail("domain is required");
  KernelSpec spec{kernel.signal_variance, kernel.lengthscales};
  spec.validate();
  if (spec.dimension() != domain.dimension()) {
    fail("kernel lengthscale count must match the domain dimension");
  }
  if (kernel.starts < 1) fail("kernel.starts must be positive");
  if (kernel.max_iterations < 1) fail("kernel.max_iterations must be positive");
  if (!std::isfinite(noise_variance) || noise_variance < 0.0) {
    fail("noise_variance must be finite and non-negative");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) fail("delta must lie in (0, 1)");
  if (out_dir.empty()) fail("out_dir must not be empty");

  if (kind == ExperimentKind::asymptotics) {
    if (schedule.empty()) fail("schedule must not be empty");
    for (size_t i = 0; i < schedule.size(); ++i) {
      if (schedule[i] < 1) fail("schedule entries must be positive");
      if (i > 0 && schedule[i] <= schedule[i - 1]) fail("schedule must be strictly increasing");
    }
    if (!(tau0 > 0.0) || !std::isfinite(tau0)) fail("tau0 must be finite and positive");
    if (!(truth.amplitude >= 0.0) || !std::isfinite(truth.amplitude)) {
      fail("truth.amplitude must be finite and non-negative");
    }
    if (!(truth.frequency > 0.0) || !std::isfinite(truth.frequency)) {
      fail("truth.frequency must be finite and positive");
    }
    if (eval_points_per_dim < 2) fail("eval_points_per_dim must be at least 2");
    if (dense_cap < 1) fail("dense_cap must be positive");
    return;
  }

  if (domain.dimension() % 2 != 0) {
    fail("tracking experiments need an even state dimension (position, velocity pairs)");
  }
  const int n_outputs = outputs();
  if (kind == ExperimentKind::synthetic && n_outputs != 1) {
    fail("the synthetic experiment is scalar: domain dimension must be 2");
  }
  if (kind == ExperimentKind::robot && n_outputs != 2) {
    fail("the robot experiment has two joints: domain dimension must be 4");
  }
  if (noise_variance == 0.0) fail("tracking experiments need positive noise_variance");
  if (training_grid.region.dimension() != domain.dimension()) {
    fail("training_grid bounds must match the domain dimension");
  }
  if (static_cast<int>(training_grid.nodes.size()) != domain.dimension()) {
    fail("training_grid.nodes must list one count per dimension");
  }
  for (const int count : training_grid.nodes) {
    if (count < 1) fail("training_grid.nodes entries must be positive");
  }
  if (lipschitz_mode == LipschitzMode::estimate && (!(delta_l > 0.0) || !(delta_l < 1.0))) {
    fail("delta_l must lie in (0, 1)");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be finite and positive");
  gains.validate();
  if (reference.amplitude.size() != n_outputs || reference.angular_frequency.size() != n_outputs ||
      reference.phase.size() != n_outputs) {
    fail("reference arrays must list one entry per output");
  }
  if (!(integrator.dt > 0.0) || !std::isfinite(integrator.dt)) fail("integrator.dt must be positive");
  if (!(integrator.t_span > 0.0) || !std::isfinite(integrator.t_span)) {
    fail("integrator.t_span must be positive");
  }
  if (integrator.t_span < integrator.dt) fail("integrator.t_span must cover at least one step");
  if (initial_state.size() != domain.dimension()) {
    fail("initial_state must match the domain dimension");
  }
  if (!initial_state.allFinite()) fail("initial_state must be finite");
  if (lipschitz_mode == LipschitzMode::fixed &&
      (!(f_lipschitz >= 0.0) || !std::isfinite(f_lipschitz))) {
    fail("f_lipschitz must be finite and non-negative");
  }
  if (lipschitz_mode == LipschitzMode::from_dynamics && kind != ExperimentKind::robot) {
    fail("f_lipschitz mode from-dynamics applies to the robot experiment only");
  }
  if (kind == ExperimentKind::robot && !std::isfinite(gravity)) fail("gravity must be finite");
}

ExperimentConfig default_config(ExperimentKind kind) {
  const double pi = std::numbers::pi;
  ExperimentConfig config;
  config.kind = kind;
  config.seed = 0;
  switch (kind) {
    case ExperimentKind::synthetic: {
      config.out_dir = "out/synthetic";
      config.kernel.fit_from_data = true;
      config.kernel.signal_variance = 1.0;
      config.kernel.lengthscales = Eigen::VectorXd::Constant(2, 1.0);
      config.noise_variance = 0.01;
      config.domain = Domain(Eigen::Vector2d(-6.0, -4.0), Eigen::Vector2d(4.0, 4.0));
      config.training_grid.nodes = {9, 9};
      config.training_grid.region = Domain(Eigen::Vector2d(0.0, -3.0), Eigen::Vector2d(3.0, 3.0));
      config.delta = 0.01;
      config.delta_l = 0.01;
      config.tau = 1e-8;
      config.gains = ControllerGains{2.0, 1.0};
      config.reference.amplitude = Eigen::VectorXd::Constant(1, 2.0);
      config.reference.angular_frequency = Eigen::VectorXd::Constant(1, 1.0);
      config.reference.phase = Eigen::VectorXd::Zero(1);
      config.integrator = IntegratorConfig{1e-3, 20.0};
      config.initial_state = Eigen::Vector2d(-6.0, 0.0);
      config.lipschitz_mode = LipschitzMode::estimate;
      break;
    }
    case ExperimentKind::robot: {
      config.out_dir = "out/robot";
      config.kernel.fit_from_data = true;
      config.kernel.signal_variance = 1.0;
      config.kernel.lengthscales = Eigen::VectorXd::Constant(4, 1.0);
      config.noise_variance = 0.01;
      config.domain = Domain(Eigen::VectorXd::Constant(4, -pi), Eigen::VectorXd::Constant(4, pi));
      config.training_grid.nodes = {3, 3, 3, 3};
      config.training_grid.region =
          Domain(Eigen::VectorXd::Constant(4, -1.0), Eigen::VectorXd::Constant(4, 1.0));
      config.delta = 0.01;
      config.delta_l = 0.01;
      config.tau = 1e-8;
      config.gains = ControllerGains{7.0, 1.0};
      config.reference.amplitude = Eigen::VectorXd::Constant(2, 1.0);
      config.reference.angular_frequency = Eigen::VectorXd::Constant(2, 1.0);
      config.reference.phase = (Eigen::VectorXd(2) << 0.0, 0.5 * pi).finished();
      config.integrator = IntegratorConfig{1e-3, 20.0};
      config.initial_state = Eigen::VectorXd::Zero(4);
      config.lipschitz_mode = LipschitzMode::from_dynamics;
      config.gravity = 9.81;
      break;
    }
    case ExperimentKind::asymptotics: {
      config.out_dir = "out/asymptotics";
      config.kernel.fit_from_data = false;
      config.kernel.signal_variance = 1.0;
      config.kernel.lengthscales = Eigen::VectorXd::Constant(2, 0.2);
      config.noise_variance = 0.01;
      config.domain = Domain(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0));
      config.delta = 0.01;
      config.schedule = {25, 100, 400, 1600};
      config.tau0 = 1.0;
      config.truth = TruthConfig{0.5, 1.0};
      config.eval_points_per_dim = 400;
      config.dense_cap = 4000;
      break;
    }
  }
  config.validate();
  return config;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& error) {
    fail(std::string("invalid JSON: ") + error.what());
  }
  if (!root.is_object()) fail("top level must be an object");
  if (!root.contains("experiment")) fail("experiment key is required");
  const ExperimentKind kind = experiment_kind_from_string(as_string(root["experiment"], "experiment"));
  ExperimentConfig config = default_config(kind);

  std::set<std::string> allowed = {"experiment", "seed",   "out_dir", "kernel",
                                   "noise_variance", "domain", "delta"};
  if (kind == ExperimentKind::asymptotics) {
    allowed.insert({"schedule", "tau0", "truth", "eval_points_per_dim", "dense_cap"});
  } else {
    allowed.insert({"training_grid", "delta_l", "tau", "gains", "reference", "integrator",
                    "initial_state", "f_lipschitz"});
    if (kind == ExperimentKind::robot) allowed.insert("gravity");
  }
  check_keys(root, allowed, "the top level");

  if (root.contains("seed")) config.seed = as_seed(root["seed"], "seed");
  if (root.contains("out_dir")) config.out_dir = as_string(root["out_dir"], "out_dir");
  if (root.contains("noise_variance")) {
    config.noise_variance = as_double(root["noise_variance"], "noise_variance");
  }
  if (root.contains("domain")) config.domain = parse_domain(root["domain"], "domain");
  if (root.contains("delta")) config.delta = as_double(root["delta"], "delta");
  if (root.contains("kernel")) {
    const json& kernel = root["kernel"];
    if (!kernel.is_object()) fail("kernel must be an object");
    check_keys(kernel, {"fit_from_data", "signal_variance", "lengthscales", "starts", "max_iterations"},
               "kernel");
    if (kernel.contains("fit_from_data")) {
      config.kernel.fit_from_data = as_bool(kernel["fit_from_data"], "kernel.fit_from_data");
    }
    if (kernel.contains("signal_variance")) {
      config.kernel.signal_variance = as_double(kernel["signal_variance"], "kernel.signal_variance");
    }
    if (kernel.contains("lengthscales")) {
      config.kernel.lengthscales = as_vector(kernel["lengthscales"], "kernel.lengthscales");
    }
    if (kernel.contains("starts")) config.kernel.starts = as_int(kernel["starts"], "kernel.starts");
    if (kernel.contains("max_iterations")) {
      config.kernel.max_iterations = as_int(kernel["max_iterations"], "kernel.max_iterations");
    }
  }

  if (kind == ExperimentKind::asymptotics) {
    if (root.contains("schedule")) config.schedule = as_int_vector(root["schedule"], "schedule");
    if (root.contains("tau0")) config.tau0 = as_double(root["tau0"], "tau0");
    if (root.contains("truth")) {
      const json& truth = root["truth"];
      if (!truth.is_object()) fail("truth must be an object");
      check_keys(truth, {"amplitude", "frequency"}, "truth");
      if (truth.contains("amplitude")) {
        config.truth.amplitude = as_double(truth["amplitude"], "truth.amplitude");
      }
      if (truth.contains("frequency")) {
        config.truth.frequency = as_double(truth["frequency"], "truth.frequency");
      }
    }
    if (root.contains("eval_points_per_dim")) {
      config.eval_points_per_dim = as_int(root["eval_points_per_dim"], "eval_points_per_dim");
    }
    if (root.contains("dense_cap")) config.dense_cap = as_int(root["dense_cap"], "dense_cap");
    config.validate();
    return config;
  }

  if (root.contains("training_grid")) {
    const json& grid = root["training_grid"];
    if (!grid.is_object()) fail("training_grid must be an object");
    check_keys(grid, {"nodes", "lower", "upper"}, "training_grid");
    if (!grid.contains("nodes") || !grid.contains("lower") || !grid.contains("upper")) {
      fail("training_grid requires nodes, lower and upper");
    }
    config.training_grid.nodes = as_int_vector(grid["nodes"], "training_grid.nodes");
    config.training_grid.region = Domain(as_vector(grid["lower"], "training_grid.lower"),
                                         as_vector(grid["upper"], "training_grid.upper"));
  }
  if (root.contains("delta_l")) config.delta_l = as_double(root["delta_l"], "delta_l");
  if (root.contains("tau")) config.tau = as_double(root["tau"], "tau");
  if (root.contains("gains")) {
    const json& gains = root["gains"];
    if (!gains.is_object()) fail("gains must be an object");
    check_keys(gains, {"control_gain", "filter_gain"}, "gains");
    if (gains.contains("control_gain")) {
      config.gains.control_gain = as_double(gains["control_gain"], "gains.control_gain");
    }
    if (gains.contains("filter_gain")) {
      config.gains.filter_gain = as_double(gains["filter_gain"], "gains.filter_gain");
    }
  }
  if (root.contains("reference")) {
    const json& reference = root["reference"];
    if (!reference.is_object()) fail("reference must be an object");
    check_keys(reference, {"amplitude", "angular_frequency", "phase"}, "reference");
    if (!reference.contains("amplitude") || !reference.contains("angular_frequency") ||
        !reference.contains("phase")) {
      fail("reference requires amplitude, angular_frequency and phase");
    }
    config.reference.amplitude = as_vector(reference["amplitude"], "reference.amplitude");
    config.reference.angular_frequency =
        as_vector(reference["angular_frequency"], "reference.angular_frequency");
    config.reference.phase = as_vector(reference["phase"], "reference.phase");
  }
  if (root.contains("integrator")) {
    const json& integrator = root["integrator"];
    if (!integrator.is_object()) fail("integrator must be an object");
    check_keys(integrator, {"dt", "t_span"}, "integrator");
    if (integrator.contains("dt")) config.integrator.dt = as_double(integrator["dt"], "integrator.dt");
    if (integrator.contains("t_span")) {
      config.integrator.t_span = as_double(integrator["t_span"], "integrator.t_span");
    }
  }
  if (root.contains("initial_state")) {
    config.initial_state = as_vector(root["initial_state"], "initial_state");
  }
  if (root.contains("f_lipschitz")) {
    const json& value = root["f_lipschitz"];
    if (value.is_string()) {
      const std::string mode = value.get<std::string>();
      if (mode == "estimate") {
        config.lipschitz_mode = LipschitzMode::estimate;
      } else if (mode == "from-dynamics") {
        config.lipschitz_mode = LipschitzMode::from_dynamics;
      } else {
        fail("f_lipschitz must be a number, \"estimate\" or \"from-dynamics\"");
      }
    } else if (value.is_number()) {
      config.lipschitz_mode = LipschitzMode::fixed;
      config.f_lipschitz = value.get<double>();
    } else {
      fail("f_lipschitz must be a number, \"estimate\" or \"from-dynamics\"");
    }
  }
  if (root.contains("gravity")) config.gravity = as_double(root["gravity"], "gravity");

  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("config: cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const ExperimentConfig& config) {
  return effective_json(config).dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string config_hash(const ExperimentConfig& config) {
  // The hash identifies the experiment; where artifacts land does not
  // change the results, so out_dir is excluded.
  nlohmann::json hashed = effective_json(config);
  hashed.erase("out_dir");
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(hashed.dump())));
  return buffer;
}

}  // namespace gpbound
