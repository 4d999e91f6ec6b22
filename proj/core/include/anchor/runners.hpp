// Experiment runners behind the CLI. Each returns a process exit code:
//   0 success, 1 verification property failure, 2 configuration error,
//   3 numerical abort, 4 unwritable output path.
// All outputs are deterministic for a fixed config and seed: trajectory CSV
// rows and JSON numbers are written with locale-independent formatting, and
// Monte-Carlo runs derive per-run RNG streams as seed xor run-index so the
// results do not depend on the worker count.

#pragma once

#include <filesystem>
#include <iosfwd>

#include "anchor/config.hpp"
#include "anchor/dynamics.hpp"

namespace anchor {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalAbort = 3;
inline constexpr int kExitUnwritablePath = 4;

// CSV column schema of trajectory output.
inline constexpr const char* kTrajectoryCsvHeader =
    "t,qw,qx,qy,qz,wx,wy,wz,py,vy,phi,eta,eta_rate,swing,pitch";

// Shortest-width, 17-significant-digit, locale-independent rendering.
std::string format_double(double v);

void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

struct BasinSummary {
  int n_total = 0;
  int n_converged_p = 0;
  int n_converged_q = 0;
  int n_undecided = 0;
  // Over converged runs; absent when none converged.
  std::optional<double> median_convergence_time;
  std::optional<double> max_convergence_time;
  std::uint64_t seed = 0;
};

// Sibling path holding the per-run JSONL records of a basin run: the
// summary path with ".runs.jsonl" appended to its stem.
std::filesystem::path basin_runs_path(const std::filesystem::path& summary);

// Integrates one trajectory and writes it as CSV to out_csv.
int run_simulate(const ExperimentConfig& cfg,
                 const std::filesystem::path& out_csv);

// Monte-Carlo basin study: monte_carlo.runs independent simulations from
// Haar-random orientations and uniform-in-ball angular velocities (or from
// the explicit initial state when one is configured). Writes the summary
// JSON to out_summary and one JSON record per run to
// basin_runs_path(out_summary). workers <= 0 picks a default.
int run_basin(const ExperimentConfig& cfg,
              const std::filesystem::path& out_summary, int workers);

// Same, returning the summary for in-process callers.
int run_basin(const ExperimentConfig& cfg,
              const std::filesystem::path& out_summary, int workers,
              BasinSummary* summary_out);

// Linearizations at both critical sets as JSON (matrix, eigenvalues,
// classification, definiteness of the lemma blocks).
int run_linearize(const ExperimentConfig& cfg, std::ostream& out);

// Property suites (finite-difference gradient, trace form, Hessian, energy
// rate, limit set) with a JSON report; exit 0 iff every property passes.
// inject_grad_sign_flip is a fault-injection hook that negates the analytic
// gradient inside the finite-difference comparison; it exists to prove the
// gradient check can fail.
int run_verify(const ExperimentConfig& cfg, std::ostream& out,
               bool inject_grad_sign_flip = false);

// Stance allocation of the configured wrench as JSON (forces, sigma,
// feasibility, reconstruction residuals, pitch coupling).
int run_allocate(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace anchor
