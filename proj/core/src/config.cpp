#include "anchor/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

namespace anchor {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) fail(path + "." + item.key(), "unknown key");
  }
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double positive(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (!(x > 0.0)) fail(path, "must be > 0");
  return x;
}

double non_negative(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (x < 0.0) fail(path, "must be >= 0");
  return x;
}

int positive_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < 1 || x > 100000000) fail(path, "out of range [1, 1e8]");
  return static_cast<int>(x);
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) {
    fail(path, "expected an integer seed");
  }
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
    fail(path, "seed must be >= 0");
  }
  return v.get<std::uint64_t>();
}

Vector3 as_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected [x, y, z]");
  return Vector3(as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]"),
                 as_number(v[2], path + "[2]"));
}

void apply_inertia(const json& v, ExperimentConfig& cfg) {
  const Vector3 principal = as_vec3(v, "inertia");
  try {
    cfg.inertia = InertiaModel(principal, cfg.inertia.mass);
  } catch (const std::invalid_argument& e) {
    fail("inertia", e.what());
  }
}

void apply_gains(const json& v, ExperimentConfig& cfg) {
  check_keys(v, "gains", {"kappa1", "kappa2", "kp_lat", "kd_lat"});
  AnchorGains g = cfg.gains;
  if (v.contains("kappa1")) g.kappa1 = positive(v["kappa1"], "gains.kappa1");
  if (v.contains("kappa2")) g.kappa2 = positive(v["kappa2"], "gains.kappa2");
  if (v.contains("kp_lat")) g.kp_lat = non_negative(v["kp_lat"], "gains.kp_lat");
  if (v.contains("kd_lat")) g.kd_lat = non_negative(v["kd_lat"], "gains.kd_lat");
  cfg.gains = g;
}

void apply_template(const json& v, ExperimentConfig& cfg) {
  check_keys(v, "template", {"enabled", "gamma", "beta", "mu", "p0_pitch"});
  TemplateParams t = cfg.template_params;
  if (v.contains("enabled")) {
    if (!v["enabled"].is_boolean()) fail("template.enabled", "expected a bool");
    t.enabled = v["enabled"].get<bool>();
  }
  if (v.contains("gamma")) t.gamma = non_negative(v["gamma"], "template.gamma");
  if (v.contains("beta")) t.beta = non_negative(v["beta"], "template.beta");
  if (v.contains("mu")) t.mu = positive(v["mu"], "template.mu");
  if (v.contains("p0_pitch")) {
    t.p0_pitch = as_number(v["p0_pitch"], "template.p0_pitch");
    if (std::abs(t.p0_pitch) > kPi) fail("template.p0_pitch", "must lie in [-pi, pi]");
  }
  cfg.template_params = t;
}

void apply_integrator(const json& v, ExperimentConfig& cfg) {
  check_keys(v, "integrator", {"h", "duration"});
  if (v.contains("h")) cfg.integrator.h = positive(v["h"], "integrator.h");
  if (v.contains("duration")) {
    cfg.integrator.duration = non_negative(v["duration"], "integrator.duration");
  }
}

void apply_tolerances(const json& v, ExperimentConfig& cfg) {
  check_keys(v, "tolerances", {"probe_angle", "probe_omega", "membership"});
  if (v.contains("probe_angle")) {
    cfg.probe.angle = positive(v["probe_angle"], "tolerances.probe_angle");
  }
  if (v.contains("probe_omega")) {
    cfg.probe.omega = positive(v["probe_omega"], "tolerances.probe_omega");
  }
  if (v.contains("membership")) {
    cfg.probe.membership = positive(v["membership"], "tolerances.membership");
  }
}

void apply_verify(const json& v, ExperimentConfig& cfg) {
  check_keys(v, "verify",
             {"rotations", "trajectories", "trajectory_duration",
              "limit_set_samples", "seed", "fd_step", "grad_tol", "trace_tol",
              "hessian_tol", "quad_form_tol", "energy_step_tol",
              "energy_rate_rms_tol", "limit_set_min"});
  VerifyConfig& w = cfg.verify;
  if (v.contains("rotations")) w.rotations = positive_int(v["rotations"], "verify.rotations");
  if (v.contains("trajectories")) w.trajectories = positive_int(v["trajectories"], "verify.trajectories");
  if (v.contains("trajectory_duration")) {
    w.trajectory_duration = positive(v["trajectory_duration"], "verify.trajectory_duration");
  }
  if (v.contains("limit_set_samples")) {
    w.limit_set_samples = positive_int(v["limit_set_samples"], "verify.limit_set_samples");
  }
  if (v.contains("seed")) w.seed = as_seed(v["seed"], "verify.seed");
  if (v.contains("fd_step")) w.fd_step = positive(v["fd_step"], "verify.fd_step");
  // Tolerances may be zero; a zero tolerance simply fails its property.
  if (v.contains("grad_tol")) w.grad_tol = non_negative(v["grad_tol"], "verify.grad_tol");
  if (v.contains("trace_tol")) w.trace_tol = non_negative(v["trace_tol"], "verify.trace_tol");
  if (v.contains("hessian_tol")) w.hessian_tol = non_negative(v["hessian_tol"], "verify.hessian_tol");
  if (v.contains("quad_form_tol")) w.quad_form_tol = non_negative(v["quad_form_tol"], "verify.quad_form_tol");
  if (v.contains("energy_step_tol")) w.energy_step_tol = non_negative(v["energy_step_tol"], "verify.energy_step_tol");
  if (v.contains("energy_rate_rms_tol")) {
    w.energy_rate_rms_tol = non_negative(v["energy_rate_rms_tol"], "verify.energy_rate_rms_tol");
  }
  if (v.contains("limit_set_min")) w.limit_set_min = non_negative(v["limit_set_min"], "verify.limit_set_min");
}

void apply_monte_carlo(const json& v, ExperimentConfig& cfg) {
  check_keys(v, "monte_carlo", {"runs", "seed", "omega_max"});
  if (v.contains("runs")) cfg.monte_carlo.runs = positive_int(v["runs"], "monte_carlo.runs");
  if (v.contains("seed")) cfg.monte_carlo.seed = as_seed(v["seed"], "monte_carlo.seed");
  if (v.contains("omega_max")) {
    cfg.monte_carlo.omega_max = non_negative(v["omega_max"], "monte_carlo.omega_max");
  }
}

void apply_initial(const json& v, ExperimentConfig& cfg) {
  check_keys(v, "initial",
             {"mode", "q", "axis", "angle", "omega", "p_y", "v_y"});
  InitialStateSpec& init = cfg.initial;
  if (!v.contains("mode")) fail("initial.mode", "required");
  if (!v["mode"].is_string()) fail("initial.mode", "expected a string");
  const std::string mode = v["mode"].get<std::string>();
  if (mode == "random") {
    init.mode = InitialStateSpec::Mode::Random;
    for (const char* k : {"q", "axis", "angle", "omega", "p_y", "v_y"}) {
      if (v.contains(k)) fail(std::string("initial.") + k, "not allowed in random mode");
    }
    return;
  }
  if (mode == "quaternion") {
    init.mode = InitialStateSpec::Mode::Quaternion;
    if (!v.contains("q")) fail("initial.q", "required in quaternion mode");
    const json& q = v["q"];
    if (!q.is_array() || q.size() != 4) fail("initial.q", "expected [w, x, y, z]");
    for (int i = 0; i < 4; ++i) {
      init.q(i) = as_number(q[static_cast<std::size_t>(i)],
                            "initial.q[" + std::to_string(i) + "]");
    }
    if (init.q.norm() < 1e-12) fail("initial.q", "norm is degenerate");
  } else if (mode == "axis_angle") {
    init.mode = InitialStateSpec::Mode::AxisAngle;
    if (!v.contains("axis") || !v.contains("angle")) {
      fail("initial", "axis and angle required in axis_angle mode");
    }
    init.axis = as_vec3(v["axis"], "initial.axis");
    if (init.axis.norm() < 1e-12) fail("initial.axis", "norm is degenerate");
    init.axis.normalize();
    init.angle = as_number(v["angle"], "initial.angle");
  } else {
    fail("initial.mode", "expected one of random, quaternion, axis_angle");
  }
  if (v.contains("omega")) init.omega = as_vec3(v["omega"], "initial.omega");
  if (v.contains("p_y")) init.p_y = as_number(v["p_y"], "initial.p_y");
  if (v.contains("v_y")) init.v_y = as_number(v["v_y"], "initial.v_y");
}

void apply_stance(const json& v, ExperimentConfig& cfg) {
  check_keys(v, "stance",
             {"p", "q", "f_min", "gravity_ff", "force", "torque"});
  StanceConfig& st = cfg.stance;
  Vector3 p = st.geometry.p;
  Vector3 q = st.geometry.q;
  if (v.contains("p")) p = as_vec3(v["p"], "stance.p");
  if (v.contains("q")) q = as_vec3(v["q"], "stance.q");
  try {
    st.geometry = StanceGeometry(p, q);
  } catch (const std::invalid_argument& e) {
    fail("stance.q", e.what());
  }
  if (v.contains("f_min")) st.f_min = non_negative(v["f_min"], "stance.f_min");
  if (v.contains("gravity_ff")) {
    if (v["gravity_ff"].is_null()) {
      st.gravity_ff.reset();
    } else {
      st.gravity_ff = as_number(v["gravity_ff"], "stance.gravity_ff");
    }
  }
  if (v.contains("force")) st.force = as_vec3(v["force"], "stance.force");
  if (v.contains("torque")) st.torque = as_vec3(v["torque"], "stance.torque");
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  cfg.template_params.enabled = true;
  return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }

  check_keys(root, "$",
             {"inertia", "mass", "gains", "template", "integrator",
              "tolerances", "verify", "monte_carlo", "initial", "stance"});

  ExperimentConfig cfg = ExperimentConfig::defaults();
  if (root.contains("mass")) {
    const double m = positive(root["mass"], "mass");
    cfg.inertia = InertiaModel(cfg.inertia.principal, m);
  }
  if (root.contains("inertia")) apply_inertia(root["inertia"], cfg);
  if (root.contains("gains")) apply_gains(root["gains"], cfg);
  if (root.contains("template")) apply_template(root["template"], cfg);
  if (root.contains("integrator")) apply_integrator(root["integrator"], cfg);
  if (root.contains("tolerances")) apply_tolerances(root["tolerances"], cfg);
  if (root.contains("verify")) apply_verify(root["verify"], cfg);
  if (root.contains("monte_carlo")) apply_monte_carlo(root["monte_carlo"], cfg);
  if (root.contains("initial")) apply_initial(root["initial"], cfg);
  if (root.contains("stance")) apply_stance(root["stance"], cfg);

  try {
    cfg.template_params.validate();
  } catch (const std::invalid_argument& e) {
    fail("template", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace anchor
