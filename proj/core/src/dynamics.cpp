#include "anchor/dynamics.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "anchor/potential.hpp"

namespace anchor {

InertiaModel::InertiaModel(const Vector3& principal_inertia, double m)
    : principal(principal_inertia), mass(m) {
  const double a = principal.x(), b = principal.y(), c = principal.z();
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) {
    throw std::invalid_argument("InertiaModel: inertias must be > 0");
  }
  if (a > b + c || b > a + c || c > a + b) {
    throw std::invalid_argument(
        "InertiaModel: triangle inequalities violated");
  }
  if (!(mass > 0.0)) {
    throw std::invalid_argument("InertiaModel: mass must be > 0");
  }
}

Matrix3 inertia_stance(const Rotation& R, const InertiaModel& inert) {
  const Matrix3 rm = R.matrix();
  return rm.transpose() * inert.principal.asDiagonal() * rm;
}

double energy(const BodyState& s, const InertiaModel& inert) {
  const Matrix3 m = inertia_stance(s.R, inert);
  return phi(s.R) + 0.5 * s.omega.dot(m * s.omega);
}

double energy_rate(const BodyState& s, const AnchorGains& gains) {
  return -gains.kappa1 * s.omega.x() * s.omega.x() -
         gains.kappa2 * s.omega.z() * s.omega.z();
}

namespace {

// Flat integrator state; quaternion coefficients are allowed to drift off
// the unit sphere between renormalizations.
struct Flat {
  Eigen::Quaterniond q;
  Vector3 w;
  double py;
  double vy;
};

struct FlatDot {
  Eigen::Quaterniond qd;  // componentwise derivative, not a rotation
  Vector3 wd;
  double pyd;
  double vyd;
};

Flat axpy(const Flat& s, double a, const FlatDot& d) {
  Flat r;
  r.q.coeffs() = s.q.coeffs() + a * d.qd.coeffs();
  r.w = s.w + a * d.wd;
  r.py = s.py + a * d.pyd;
  r.vy = s.vy + a * d.vyd;
  return r;
}

FlatDot eval(const Flat& s, const InertiaModel& inert, const AnchorGains& gains,
             const TemplateParams& tmpl) {
  const Rotation R{s.q};  // renormalized view for the rotation-dependent terms
  const Wrench u = total_wrench(R, s.w, s.py, s.vy, gains, tmpl);
  const Matrix3 m = inertia_stance(R, inert);

  FlatDot d;
  // qdot = 0.5 q * (0, -w): quaternion form of Rdot = R skew(w)^T.
  const Eigen::Quaterniond omega_q(0.0, -0.5 * s.w.x(), -0.5 * s.w.y(),
                                   -0.5 * s.w.z());
  d.qd = s.q * omega_q;
  d.wd = m.llt().solve(u.torque - s.w.cross(m * s.w));
  d.pyd = s.vy;
  d.vyd = u.force.y() / inert.mass;
  return d;
}

FlatDot rk4_combine(const FlatDot& k1, const FlatDot& k2, const FlatDot& k3,
                    const FlatDot& k4) {
  FlatDot d;
  d.qd.coeffs() = (k1.qd.coeffs() + 2.0 * k2.qd.coeffs() +
                   2.0 * k3.qd.coeffs() + k4.qd.coeffs()) / 6.0;
  d.wd = (k1.wd + 2.0 * k2.wd + 2.0 * k3.wd + k4.wd) / 6.0;
  d.pyd = (k1.pyd + 2.0 * k2.pyd + 2.0 * k3.pyd + k4.pyd) / 6.0;
  d.vyd = (k1.vyd + 2.0 * k2.vyd + 2.0 * k3.vyd + k4.vyd) / 6.0;
  return d;
}

bool finite(const Flat& s) {
  return s.q.coeffs().allFinite() && s.w.allFinite() &&
         std::isfinite(s.py) && std::isfinite(s.vy);
}

// One RK4 step with post-step renormalization. Throws SimulationDiverged
// when the state leaves the finite (or representable-norm) range.
void step(Flat& s, double h, const InertiaModel& inert,
          const AnchorGains& gains, const TemplateParams& tmpl, double t_next,
          std::int64_t step_index) {
  try {
    const FlatDot k1 = eval(s, inert, gains, tmpl);
    const FlatDot k2 = eval(axpy(s, 0.5 * h, k1), inert, gains, tmpl);
    const FlatDot k3 = eval(axpy(s, 0.5 * h, k2), inert, gains, tmpl);
    const FlatDot k4 = eval(axpy(s, h, k3), inert, gains, tmpl);
    s = axpy(s, h, rk4_combine(k1, k2, k3, k4));
  } catch (const std::invalid_argument&) {
    // A stage state degenerate enough to reject quaternion normalization is
    // a divergence of the integration, not a caller error.
    throw SimulationDiverged(t_next, step_index);
  }

  const double n = s.q.norm();
  if (!finite(s) || !(n > 0.5) || !(n < 2.0)) {
    throw SimulationDiverged(t_next, step_index);
  }
  s.q.coeffs() /= n;
}

struct ProbeScalars {
  double swing;
  double w_trans;
};

ProbeScalars probe_scalars(const Flat& s) {
  const Rotation R{s.q};
  const Vector3 ry = R.inverse_rotate(kPitchAxis);
  const double swing =
      std::atan2(kPitchAxis.cross(ry).norm(), kPitchAxis.dot(ry));
  return {swing, std::hypot(s.w.x(), s.w.z())};
}

}  // namespace

SimulationDiverged::SimulationDiverged(double t, std::int64_t n)
    : std::runtime_error("simulation diverged at t = " + std::to_string(t) +
                         " (step " + std::to_string(n) + ")"),
      time(t),
      step(n) {}

StateDerivative vector_field(const BodyState& s, const InertiaModel& inert,
                             const AnchorGains& gains,
                             const TemplateParams& tmpl) {
  const FlatDot d =
      eval(Flat{s.R.quaternion(), s.omega, s.p_y, s.v_y}, inert, gains, tmpl);
  StateDerivative out;
  out.q_dot =
      Eigen::Vector4d(d.qd.w(), d.qd.x(), d.qd.y(), d.qd.z());
  out.omega_dot = d.wd;
  out.p_y_dot = d.pyd;
  out.v_y_dot = d.vyd;
  return out;
}

Trajectory simulate(const BodyState& initial, const InertiaModel& inert,
                    const AnchorGains& gains, const TemplateParams& tmpl,
                    double h, double duration) {
  if (!(h > 0.0)) throw std::invalid_argument("simulate: h must be > 0");
  if (duration < 0.0) {
    throw std::invalid_argument("simulate: duration must be >= 0");
  }
  tmpl.validate();
  const std::int64_t steps = std::llround(duration / h);

  Trajectory traj;
  traj.h = h;
  traj.samples.reserve(static_cast<std::size_t>(steps) + 1);

  Flat s{initial.R.quaternion(), initial.omega, initial.p_y, initial.v_y};
  const double t0 = initial.t;

  auto record = [&](double t) {
    BodyState bs{Rotation{s.q}, s.w, s.py, s.vy, t};
    const PitchDecomposition pd = pitch_decompose(bs.R);
    traj.samples.push_back(TrajectorySample{bs, phi(bs.R), pd.swing, pd.pitch,
                                            energy(bs, inert),
                                            energy_rate(bs, gains)});
  };

  record(t0);
  for (std::int64_t k = 0; k < steps; ++k) {
    const double t_next = t0 + static_cast<double>(k + 1) * h;
    step(s, h, inert, gains, tmpl, t_next, k + 1);
    record(t_next);
  }
  return traj;
}

ConvergenceReport convergence_probe(const Trajectory& traj, double tol_angle,
                                    double tol_omega) {
  const auto& samples = traj.samples;
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  if (n == 0) return {};

  auto p_cond = [&](const TrajectorySample& s) {
    return s.swing <= tol_angle &&
           std::hypot(s.state.omega.x(), s.state.omega.z()) <= tol_omega;
  };
  auto q_cond = [&](const TrajectorySample& s) {
    return s.swing >= kPi - tol_angle &&
           std::hypot(s.state.omega.x(), s.state.omega.z()) <= tol_omega;
  };

  const std::int64_t tail = (n + 9) / 10;
  auto sustained = [&](auto&& cond) -> std::optional<double> {
    std::int64_t last_fail = -1;
    for (std::int64_t i = 0; i < n; ++i) {
      if (!cond(samples[static_cast<std::size_t>(i)])) last_fail = i;
    }
    if (last_fail >= n - tail) return std::nullopt;
    const std::int64_t entry = last_fail + 1;
    return samples[static_cast<std::size_t>(entry)].state.t;
  };

  if (auto t = sustained(p_cond)) return {ConvergedTo::PitchSet, *t};
  if (auto t = sustained(q_cond)) return {ConvergedTo::AntipodalSet, *t};
  return {};
}

RunOutcome simulate_until_converged(const BodyState& initial,
                                    const InertiaModel& inert,
                                    const AnchorGains& gains,
                                    const TemplateParams& tmpl, double h,
                                    double t_max, double tol_angle,
                                    double tol_omega) {
  if (!(h > 0.0)) throw std::invalid_argument("simulate: h must be > 0");
  if (!(t_max > 0.0)) {
    throw std::invalid_argument("simulate: t_max must be > 0");
  }
  tmpl.validate();
  const std::int64_t max_steps = std::llround(t_max / h);
  const double window = 0.1 * t_max;

  Flat s{initial.R.quaternion(), initial.omega, initial.p_y, initial.v_y};

  RunOutcome out;
  double p_enter = -1.0;
  double q_enter = -1.0;

  auto update = [&](double t) -> bool {
    const ProbeScalars ps = probe_scalars(s);
    const bool in_p = ps.swing <= tol_angle && ps.w_trans <= tol_omega;
    const bool in_q = ps.swing >= kPi - tol_angle && ps.w_trans <= tol_omega;
    p_enter = in_p ? (p_enter < 0.0 ? t : p_enter) : -1.0;
    q_enter = in_q ? (q_enter < 0.0 ? t : q_enter) : -1.0;
    if (p_enter >= 0.0 && t - p_enter >= window * (1.0 - 1e-12)) {
      out.kind = ConvergedTo::PitchSet;
      out.time = p_enter;
      return true;
    }
    if (q_enter >= 0.0 && t - q_enter >= window * (1.0 - 1e-12)) {
      out.kind = ConvergedTo::AntipodalSet;
      out.time = q_enter;
      return true;
    }
    return false;
  };

  double t = initial.t;
  bool done = update(t);
  std::int64_t k = 0;
  while (!done && k < max_steps) {
    t = initial.t + static_cast<double>(k + 1) * h;
    step(s, h, inert, gains, tmpl, t, k + 1);
    ++k;
    done = update(t);
  }

  out.end_time = t;
  out.steps = k;
  const Rotation R{s.q};
  out.final_swing = probe_scalars(s).swing;
  out.final_eta = energy(BodyState{R, s.w, s.py, s.vy, t}, inert);
  return out;
}

}  // namespace anchor
