#include "anchor/control.hpp"

#include <stdexcept>

namespace anchor {

AnchorGains::AnchorGains(double k1, double k2, double kp, double kd)
    : kappa1(k1), kappa2(k2), kp_lat(kp), kd_lat(kd) {
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0)) {
    throw std::invalid_argument("AnchorGains: kappa1, kappa2 must be > 0");
  }
  if (kp_lat < 0.0 || kd_lat < 0.0) {
    throw std::invalid_argument("AnchorGains: lateral gains must be >= 0");
  }
}

Matrix3 AnchorGains::damping() const {
  return Vector3(kappa1, 0.0, kappa2).asDiagonal();
}

void TemplateParams::validate() const {
  if (!enabled) return;
  // Zero gamma or beta is a degenerate but well-posed template (it shows up
  // as an Indeterminate pitch equilibrium in the linearization); negative
  // gains are rejected outright.
  if (gamma < 0.0 || beta < 0.0 || !(mu > 0.0)) {
    throw std::invalid_argument(
        "TemplateParams: gamma, beta must be >= 0 and mu > 0 when enabled");
  }
}

Vector3 anchor_torque(const Rotation& R, const Vector3& omega,
                      const AnchorGains& gains) {
  const Vector3 g = grad(R);
  return Vector3(-g.x() - gains.kappa1 * omega.x(), 0.0,
                 -g.z() - gains.kappa2 * omega.z());
}

double lateral_force(double p_y, double v_y, const AnchorGains& gains) {
  return -gains.kp_lat * p_y - gains.kd_lat * v_y;
}

Vector3 template_pitch_torque(double pitch, double pitch_rate,
                              const TemplateParams& tmpl) {
  return Vector3(0.0, -tmpl.gamma * pitch - tmpl.beta * pitch_rate, 0.0);
}

Wrench total_wrench(const Rotation& R, const Vector3& omega, double p_y,
                    double v_y, const AnchorGains& gains,
                    const TemplateParams& tmpl) {
  Wrench w;
  w.torque = anchor_torque(R, omega, gains);
  if (tmpl.enabled) {
    // See the header: theta = -(pitch - p0) is the coordinate with rate w_y.
    const double theta =
        -wrap_angle(pitch_decompose(R).pitch - tmpl.p0_pitch);
    w.torque += template_pitch_torque(theta, omega.y(), tmpl);
  }
  w.force = Vector3(0.0, lateral_force(p_y, v_y, gains), 0.0);
  return w;
}

}  // namespace anchor
