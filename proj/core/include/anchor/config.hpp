// Experiment configuration: defaults, JSON loading and schema validation.
// Unknown keys are rejected; value errors carry the offending key path.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "anchor/allocation.hpp"
#include "anchor/control.hpp"
#include "anchor/dynamics.hpp"

namespace anchor {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
  double h = 1e-3;
  double duration = 30.0;
};

struct MonteCarloConfig {
  int runs = 1000;
  std::uint64_t seed = 7;
  double omega_max = 3.0;
};

struct ProbeTolerances {
  // Convergence probe thresholds.
  double angle = 1e-3;
  double omega = 1e-3;
  // Algebraic set-membership threshold.
  double membership = 1e-9;
};

struct VerifyConfig {
  // Sample counts.
  int rotations = 1000;
  int trajectories = 25;
  double trajectory_duration = 10.0;
  int limit_set_samples = 100000;
  std::uint64_t seed = 12345;
  // Finite-difference step along exponential coordinates.
  double fd_step = 1e-5;
  // Tolerances; zero is allowed (and fails the corresponding property).
  double grad_tol = 1e-6;
  double trace_tol = 1e-12;
  double hessian_tol = 1e-12;
  double quad_form_tol = 1e-10;
  double energy_step_tol = 1e-9;
  double energy_rate_rms_tol = 1e-4;
  double limit_set_min = 1e-12;
};

struct InitialStateSpec {
  enum class Mode { Random, Quaternion, AxisAngle };
  Mode mode = Mode::Random;
  // Quaternion mode, (w, x, y, z).
  Eigen::Vector4d q{1.0, 0.0, 0.0, 0.0};
  // Axis-angle mode; the axis is normalized at load time.
  Vector3 axis{1.0, 0.0, 0.0};
  double angle = 0.0;
  // Shared by the explicit modes.
  Vector3 omega = Vector3::Zero();
  double p_y = 0.0;
  double v_y = 0.0;
};

struct StanceConfig {
  StanceGeometry geometry;
  double f_min = 0.0;
  std::optional<double> gravity_ff;
  Vector3 force{0.0, 0.0, 80.0};
  Vector3 torque{1.0, 0.0, 0.5};
};

struct ExperimentConfig {
  InertiaModel inertia;
  AnchorGains gains;
  TemplateParams template_params;
  IntegratorConfig integrator;
  ProbeTolerances probe;
  VerifyConfig verify;
  MonteCarloConfig monte_carlo;
  InitialStateSpec initial;
  StanceConfig stance;

  static ExperimentConfig defaults();
};

// Both throw ConfigError on parse failures, unknown keys, wrong types or
// out-of-range values.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace anchor
