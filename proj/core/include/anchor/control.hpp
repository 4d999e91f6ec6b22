// Anchoring controller: potential-gradient torque with transverse damping,
// a lateral PD force, and an optional pitch-steady template torque.

#pragma once

#include "anchor/potential.hpp"
#include "anchor/so3.hpp"

namespace anchor {

struct AnchorGains {
  // Transverse (roll/yaw) damping; both strictly positive.
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  // Lateral PD gains; non-negative.
  double kp_lat = 50.0;
  double kd_lat = 10.0;

  AnchorGains() = default;
  AnchorGains(double k1, double k2, double kp, double kd);

  // K_D = diag(kappa1, 0, kappa2): no damping along the pitch axis.
  Matrix3 damping() const;
};

struct TemplateParams {
  bool enabled = false;
  // Restoring and damping gains of the pitch template; non-negative when
  // enabled. Zero values are degenerate but well-posed: they surface as an
  // Indeterminate classification in the linearization.
  double gamma = 2.0;
  double beta = 1.0;
  // Pitch inertia scale of the template model. The realized torque
  // identifies it with the pitch-axis stance inertia M_yy, so this value
  // only documents the model; strictly positive when enabled.
  double mu = 0.15;
  // Template equilibrium, as a pitch angle (rotation about y).
  double p0_pitch = 0.0;

  void validate() const;  // throws std::invalid_argument
};

struct Wrench {
  Vector3 force = Vector3::Zero();
  Vector3 torque = Vector3::Zero();
};

// tau = -grad(R) - K_D w. Zero y-component by construction.
Vector3 anchor_torque(const Rotation& R, const Vector3& omega,
                      const AnchorGains& gains);

// u_y = -kp_lat * p_y - kd_lat * v_y.
double lateral_force(double p_y, double v_y, const AnchorGains& gains);

// (0, -gamma * pitch - beta * pitch_rate, 0): PD torque of the pitch-steady
// template, expressed in the template's own pitch coordinate.
Vector3 template_pitch_torque(double pitch, double pitch_rate,
                              const TemplateParams& tmpl);

// Full commanded wrench. When the template is enabled its coordinate is
// theta = -(pitch - p0): under Rdot = R skew(w)^T the twist angle from
// pitch_decompose drifts with d(pitch)/dt = -w_y on the pitch set, so theta
// is the coordinate whose rate is w_y and the template PD is evaluated at
// (theta, w_y).
Wrench total_wrench(const Rotation& R, const Vector3& omega, double p_y,
                    double v_y, const AnchorGains& gains,
                    const TemplateParams& tmpl);

}  // namespace anchor
