#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "anchor/runners.hpp"

using namespace anchor;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string f;
  while (std::getline(in, f, ',')) fields.push_back(f);
  return fields;
}

// Scratch path that is cleaned up when the guard dies.
struct TempPath {
  fs::path path;
  explicit TempPath(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove(path);
  }
  ~TempPath() { fs::remove(path); }
};

}  // namespace

TEST_SUITE("runners") {

TEST_CASE("double formatting is exact and locale independent") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");

  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = u(rng);
    if (i % 3 == 0) v *= 1e-12;
    if (i % 5 == 0) v *= 1e14;
    const std::string s = format_double(v);
    // Shortest-exact contract: parsing the text recovers the bits.
    CHECK(std::strtod(s.c_str(), nullptr) == v);
    CHECK(s.find(',') == std::string::npos);
  }
}

TEST_CASE("trajectory csv layout") {
  Trajectory traj;
  traj.h = 0.5;
  traj.samples.resize(2);
  auto& a = traj.samples[0];
  a.state.t = 0.0;
  a.state.omega = Vector3(0.25, 0.0, -0.5);
  a.state.v_y = 1.5;
  a.phi = 0.0;
  a.eta = 2.0;
  a.eta_rate = -0.125;
  a.swing = 0.0;
  a.pitch = 0.0;
  auto& b = traj.samples[1];
  b.state.t = 0.5;
  b.state.R = Rotation::from_quaternion(0, 1, 0, 0);
  b.state.omega = Vector3::Zero();
  b.phi = 2.0;
  b.eta = 2.0;
  b.eta_rate = 0.0;
  b.swing = 0.25;
  b.pitch = -0.5;

  std::ostringstream out;
  write_trajectory_csv(traj, out);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == std::string(kTrajectoryCsvHeader));
  CHECK(lines[1] == "0,1,0,0,0,0.25,0,-0.5,0,1.5,0,2,-0.125,0,0");
  CHECK(lines[2] == "0.5,0,1,0,0,0,0,0,0,0,2,2,0,0.25,-0.5");
}

TEST_CASE("basin runs path derivation") {
  CHECK(basin_runs_path("out/basin.json") ==
        fs::path("out/basin.runs.jsonl"));
  CHECK(basin_runs_path("b") == fs::path("b.runs.jsonl"));
  CHECK(basin_runs_path("a.b.c") == fs::path("a.b.runs.jsonl"));
}

TEST_CASE("simulate runner writes a constant row at the anchored rest state") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.initial.mode = InitialStateSpec::Mode::Quaternion;
  cfg.initial.q = Eigen::Vector4d(1, 0, 0, 0);
  cfg.integrator.h = 0.01;
  cfg.integrator.duration = 0.1;

  TempPath out("anchor_runner_rest.csv");
  REQUIRE(run_simulate(cfg, out.path) == kExitOk);
  const auto lines = lines_of(slurp(out.path));
  REQUIRE(lines.size() == 12);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv(lines[i]);
    REQUIRE(f.size() == 15);
    CHECK(f[1] == "1");   // qw
    CHECK(f[5] == "0");   // wx
    CHECK(f[10] == "0");  // phi
    CHECK(f[11] == "0");  // eta
    CHECK(f[13] == "0");  // swing
  }
}

TEST_CASE("simulate runner is deterministic in random mode") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.integrator.duration = 0.5;
  cfg.monte_carlo.seed = 20260823;

  TempPath a("anchor_runner_det_a.csv");
  TempPath b("anchor_runner_det_b.csv");
  REQUIRE(run_simulate(cfg, a.path) == kExitOk);
  REQUIRE(run_simulate(cfg, b.path) == kExitOk);
  CHECK(slurp(a.path) == slurp(b.path));
}

TEST_CASE("simulate runner maps failures onto exit codes") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.initial.mode = InitialStateSpec::Mode::Quaternion;
  cfg.initial.q = Eigen::Vector4d(1, 0, 0, 0);
  cfg.initial.omega = Vector3(1e200, 0, 0);
  cfg.integrator.duration = 1.0;

  TempPath out("anchor_runner_div.csv");
  CHECK(run_simulate(cfg, out.path) == kExitNumericalAbort);

  ExperimentConfig ok = ExperimentConfig::defaults();
  ok.integrator.duration = 0.01;
  // A directory is not a writable file target.
  CHECK(run_simulate(ok, fs::temp_directory_path()) == kExitUnwritablePath);
}

TEST_CASE("energy column is monotone on a pure roll recovery") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.initial.mode = InitialStateSpec::Mode::AxisAngle;
  cfg.initial.axis = Vector3(1, 0, 0);
  cfg.initial.angle = 0.5;
  // The slow roll mode decays at about exp(-1.06 t); eight seconds brings
  // a 0.5 rad tilt safely under a millirad.
  cfg.integrator.duration = 8.0;

  TempPath out("anchor_runner_roll.csv");
  REQUIRE(run_simulate(cfg, out.path) == kExitOk);
  const auto lines = lines_of(slurp(out.path));
  REQUIRE(lines.size() == 8002);
  double prev = std::strtod(split_csv(lines[1])[11].c_str(), nullptr);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const double eta = std::strtod(split_csv(lines[i])[11].c_str(), nullptr);
    CHECK(eta <= prev + 1e-12);
    prev = eta;
  }
  // The tilt must have shrunk substantially by the end.
  const double final_swing =
      std::strtod(split_csv(lines.back())[13].c_str(), nullptr);
  CHECK(final_swing < 1e-3);
}

TEST_CASE("basin runner summary, records and determinism") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.monte_carlo.runs = 6;
  cfg.monte_carlo.seed = 123;
  cfg.integrator.duration = 20.0;
  cfg.integrator.h = 5e-3;

  TempPath s1("anchor_basin_1.json");
  TempPath r1("anchor_basin_1.runs.jsonl");
  BasinSummary summary;
  REQUIRE(run_basin(cfg, s1.path, 1, &summary) == kExitOk);

  CHECK(summary.n_total == 6);
  CHECK(summary.n_converged_p + summary.n_converged_q + summary.n_undecided ==
        6);
  // These mild starts all settle with the template on.
  CHECK(summary.n_converged_p == 6);
  REQUIRE(summary.median_convergence_time.has_value());
  CHECK(*summary.median_convergence_time > 0.0);
  CHECK(*summary.max_convergence_time >= *summary.median_convergence_time);

  const auto doc = nlohmann::json::parse(slurp(s1.path));
  CHECK(doc.at("n_total") == 6);
  CHECK(doc.at("n_converged_p") == summary.n_converged_p);
  CHECK(doc.at("seed") == 123);
  CHECK(doc.at("h") == 5e-3);
  CHECK(doc.at("tol_angle") == 1e-3);

  const auto recs = lines_of(slurp(r1.path));
  REQUIRE(recs.size() == 6);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto line = nlohmann::json::parse(recs[i]);
    CHECK(line.at("run") == static_cast<int>(i));
    CHECK(line.at("q0").size() == 4);
    CHECK(line.at("omega0").size() == 3);
    const std::string outcome = line.at("outcome");
    CHECK((outcome == "pitch_set" || outcome == "antipodal_set" ||
           outcome == "none"));
    if (outcome == "none") {
      CHECK(line.at("time").is_null());
    } else {
      CHECK(line.at("time").is_number());
    }
    CHECK(line.at("steps").is_number_integer());
  }

  // Same seed, different worker count: byte-identical artifacts.
  TempPath s2("anchor_basin_2.json");
  TempPath r2("anchor_basin_2.runs.jsonl");
  REQUIRE(run_basin(cfg, s2.path, 3, nullptr) == kExitOk);
  CHECK(slurp(s1.path) == slurp(s2.path));
  CHECK(slurp(r1.path) == slurp(r2.path));
}

TEST_CASE("basin runner on a pinned antipodal start") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.monte_carlo.runs = 2;
  cfg.integrator.duration = 2.0;
  cfg.initial.mode = InitialStateSpec::Mode::Quaternion;
  cfg.initial.q = Eigen::Vector4d(0, 1, 0, 0);

  TempPath s("anchor_basin_q.json");
  TempPath r("anchor_basin_q.runs.jsonl");
  BasinSummary summary;
  REQUIRE(run_basin(cfg, s.path, 1, &summary) == kExitOk);
  CHECK(summary.n_converged_q == 2);
  CHECK(summary.n_converged_p == 0);
  REQUIRE(summary.median_convergence_time.has_value());
  CHECK(*summary.median_convergence_time == 0.0);
}

TEST_CASE("verify runner passes on defaults and fails under injection") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.verify.rotations = 200;
  cfg.verify.trajectories = 4;
  cfg.verify.trajectory_duration = 4.0;
  cfg.verify.limit_set_samples = 2000;
  cfg.monte_carlo.omega_max = 2.0;

  std::ostringstream out;
  REQUIRE(run_verify(cfg, out) == kExitOk);
  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc.at("passed") == true);
  CHECK(doc.at("seed") == cfg.verify.seed);
  const auto& props = doc.at("properties");
  REQUIRE(props.size() == 5);
  const char* expected_names[] = {"gradient_fd", "gradient_trace_form",
                                  "hessian_critical", "energy_dissipation",
                                  "limit_set_balance"};
  for (int i = 0; i < 5; ++i) {
    CHECK(props[static_cast<std::size_t>(i)].at("name") == expected_names[i]);
    CHECK(props[static_cast<std::size_t>(i)].at("passed") == true);
  }

  // Fault injection poisons exactly the gradient comparison.
  std::ostringstream bad;
  CHECK(run_verify(cfg, bad, true) == kExitVerifyFailed);
  const auto bad_doc = nlohmann::json::parse(bad.str());
  CHECK(bad_doc.at("passed") == false);
  CHECK(bad_doc.at("properties")[0].at("name") == "gradient_fd");
  CHECK(bad_doc.at("properties")[0].at("passed") == false);

  // A zero tolerance cannot be satisfied by real arithmetic.
  ExperimentConfig strict = cfg;
  strict.verify.trace_tol = 0.0;
  std::ostringstream strict_out;
  CHECK(run_verify(strict, strict_out) == kExitVerifyFailed);
}

TEST_CASE("linearize runner emits both equilibria") {
  const ExperimentConfig cfg = ExperimentConfig::defaults();
  std::ostringstream out;
  REQUIRE(run_linearize(cfg, out) == kExitOk);
  const auto doc = nlohmann::json::parse(out.str());

  const auto& p = doc.at("pitch_set");
  CHECK(p.at("classification") == "asymptotically_stable");
  CHECK(p.at("A").size() == 6);
  CHECK(p.at("A")[3][0] == -20.0);
  CHECK(p.at("eigenvalues").size() == 6);
  for (const auto& e : p.at("eigenvalues")) {
    CHECK(e.at("re").get<double>() < 0.0);
  }
  CHECK(p.at("stiffness_block").at("definiteness") == "positive_definite");
  CHECK(p.at("damping_block").at("definiteness") == "positive_definite");

  const auto& q = doc.at("antipodal_set");
  CHECK(q.at("classification") == "saddle");
  CHECK(q.at("A")[3][0] == 20.0);
  CHECK(q.at("stiffness_block").at("definiteness") == "indefinite");
  double max_re = -1e9;
  for (const auto& e : q.at("eigenvalues")) {
    max_re = std::max(max_re, e.at("re").get<double>());
  }
  CHECK(max_re > 0.0);
}

TEST_CASE("allocate runner reports the worked split") {
  const ExperimentConfig cfg = ExperimentConfig::defaults();
  std::ostringstream out;
  REQUIRE(run_allocate(cfg, out) == kExitOk);
  const auto doc = nlohmann::json::parse(out.str());

  CHECK(doc.at("sigma") == 1.0);
  CHECK(doc.at("feasible") == true);
  // The toe-offset division is good to a couple of ulps, not bit-exact.
  CHECK(doc.at("d")[0].get<double>() == doctest::Approx(-5.0).epsilon(1e-13));
  CHECK(doc.at("d")[1] == 0.0);
  CHECK(doc.at("d")[2].get<double>() == doctest::Approx(10.0).epsilon(1e-13));
  CHECK(doc.at("f_l")[0].get<double>() ==
        doctest::Approx(-2.5).epsilon(1e-13));
  CHECK(doc.at("f_l")[2].get<double>() == doctest::Approx(45.0).epsilon(1e-13));
  CHECK(doc.at("f_r")[2].get<double>() == doctest::Approx(35.0).epsilon(1e-13));
  // The vertical halves cancel exactly when summed back.
  CHECK(doc.at("force_residual") == 0.0);
  CHECK(doc.at("torque_residual").get<double>() < 1e-14);
  CHECK(doc.at("reconstructed_torque")[0].get<double>() ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(doc.at("reconstructed_torque")[2].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-13));
  for (const auto& c : doc.at("pitch_coupling_residual")) CHECK(c == 0.0);
}

}  // TEST_SUITE
