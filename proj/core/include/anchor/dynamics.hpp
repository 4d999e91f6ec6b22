// Rigid-body attitude dynamics in the stance frame plus the decoupled
// lateral point mass, with a fixed-step RK4 integrator and convergence
// probes. Kinematic convention: Rdot = R skew(w)^T with w the stance-frame
// angular velocity, and M(R) = R^T I_B R the stance-frame inertia.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "anchor/control.hpp"
#include "anchor/so3.hpp"

namespace anchor {

struct InertiaModel {
  // Principal body inertias (diagonal of I_B), kg m^2.
  Vector3 principal{0.05, 0.15, 0.15};
  // Lateral point mass, kg.
  double mass = 8.0;

  InertiaModel() = default;
  // Throws std::invalid_argument unless all entries are strictly positive,
  // the rigid-body triangle inequalities hold, and mass > 0.
  InertiaModel(const Vector3& principal_inertia, double m);
};

struct BodyState {
  Rotation R;
  Vector3 omega = Vector3::Zero();
  double p_y = 0.0;
  double v_y = 0.0;
  double t = 0.0;
};

// M(R) = R^T I_B R; symmetric positive definite, with M(R) y = I_yy y
// whenever R is a pitch rotation.
Matrix3 inertia_stance(const Rotation& R, const InertiaModel& inert);

// eta = phi(R) + 0.5 w^T M(R) w.
double energy(const BodyState& s, const InertiaModel& inert);

// Anchoring-only energy rate -kappa1 wx^2 - kappa2 wz^2. Equals d(eta)/dt
// along closed-loop trajectories when the template is disabled; with the
// template enabled the pitch channel exchanges its own power.
double energy_rate(const BodyState& s, const AnchorGains& gains);

struct StateDerivative {
  // Quaternion derivative in (w, x, y, z) component order; realizes
  // qdot = 0.5 q * (0, -omega), the quaternion form of Rdot = R skew(w)^T.
  Eigen::Vector4d q_dot;
  Vector3 omega_dot;
  double p_y_dot;
  double v_y_dot;
};

// Closed-loop vector field: kinematics above, Euler equation
// M(R) wdot = tau - w x M(R) w, and the lateral PD point mass.
StateDerivative vector_field(const BodyState& s, const InertiaModel& inert,
                             const AnchorGains& gains,
                             const TemplateParams& tmpl);

struct TrajectorySample {
  BodyState state;
  double phi;
  double swing;
  double pitch;
  double eta;
  double eta_rate;
};

struct Trajectory {
  double h = 0.0;
  std::vector<TrajectorySample> samples;
};

// Raised when the integrator produces a non-finite state.
class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(double time, std::int64_t step);
  double time;
  std::int64_t step;
};

// Classical RK4 with post-step quaternion renormalization; runs
// round(duration / h) steps and records every state including the initial
// one. Throws SimulationDiverged on non-finite states.
Trajectory simulate(const BodyState& initial, const InertiaModel& inert,
                    const AnchorGains& gains, const TemplateParams& tmpl,
                    double h, double duration);

enum class ConvergedTo { PitchSet, AntipodalSet, None };

struct ConvergenceReport {
  ConvergedTo kind = ConvergedTo::None;
  // First time from which the membership condition holds through the end of
  // the trajectory; meaningful only when kind != None.
  double time = 0.0;
};

// Declares convergence to P when swing <= tol_angle and |(wx, wz)| <=
// tol_omega over the trailing 10% of samples; symmetrically for Q with
// swing >= pi - tol_angle.
ConvergenceReport convergence_probe(const Trajectory& traj, double tol_angle,
                                    double tol_omega);

struct RunOutcome {
  ConvergedTo kind = ConvergedTo::None;
  // Entry time of the sustained membership stretch (see convergence_probe).
  double time = 0.0;
  double end_time = 0.0;
  double final_swing = 0.0;
  double final_eta = 0.0;
  std::int64_t steps = 0;
};

// Streaming equivalent of simulate + convergence_probe that stores no
// samples: integrates until the membership condition has held for
// 0.1 * t_max of simulated time (the trailing-10% window of a full-length
// run) or until t_max. Decisions and reported times match running the probe
// on the full trajectory whenever membership, once entered, persists.
RunOutcome simulate_until_converged(const BodyState& initial,
                                    const InertiaModel& inert,
                                    const AnchorGains& gains,
                                    const TemplateParams& tmpl, double h,
                                    double t_max, double tol_angle,
                                    double tol_omega);

}  // namespace anchor
