#include "anchor/potential.hpp"

#include <stdexcept>

namespace anchor {

namespace {
const Vector3& y_axis() { return kPitchAxis; }
}  // namespace

double phi(const Rotation& R) {
  return 1.0 - y_axis().dot(R.inverse_rotate(y_axis()));
}

Vector3 grad(const Rotation& R) {
  return y_axis().cross(R.inverse_rotate(y_axis()));
}

double grad_trace_form(const Rotation& R, const Vector3& u) {
  const Matrix3 rm = R.matrix();
  const Matrix3 yyt = y_axis() * y_axis().transpose();
  const Matrix3 m =
      (yyt - rm.transpose() * yyt * rm.transpose()) * rm * skew(u);
  return 0.5 * m.trace();
}

Matrix3 hessian(const Rotation& R) {
  if (grad(R).norm() > 1e-9) {
    throw std::invalid_argument("hessian: R is not a critical point");
  }
  return skew(y_axis()).transpose() * skew(R.inverse_rotate(y_axis()));
}

double hessian_quadratic_form(const Rotation& R, const Vector3& u) {
  const Matrix3 su = skew(u);
  const Matrix3 m = y_axis() * y_axis().transpose() * R.matrix() * su * su;
  return -m.trace();
}

CriticalClassification classify_critical(const Rotation& R, double tol) {
  if (grad(R).norm() > tol) {
    return {CriticalKind::NotCritical, std::nullopt, std::nullopt};
  }
  const Matrix3 h = skew(y_axis()).transpose() * skew(R.inverse_rotate(y_axis()));
  const bool aligned = y_axis().dot(R.inverse_rotate(y_axis())) > 0.0;
  if (aligned) return {CriticalKind::PitchMinimum, h, 1};
  return {CriticalKind::AntipodalMaximum, h, -1};
}

}  // namespace anchor
