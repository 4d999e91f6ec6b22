// Alignment potential on SO(3): phi(R) = 1 - y . (R^T y). Zero exactly on
// the pitch set, maximal (= 2) exactly on the antipodal set. Gradient and
// Hessian are expressed in angular-velocity coordinates, i.e. along curves
// R(t) with Rdot = R skew(w)^T the chain rule d/dt phi = w . grad(R) holds.

#pragma once

#include <optional>

#include "anchor/so3.hpp"

namespace anchor {

double phi(const Rotation& R);

// grad(R) = y x (R^T y). Always orthogonal to y; vanishes exactly on the
// pitch set and on the antipodal set.
Vector3 grad(const Rotation& R);

// Directional derivative in trace form,
//   0.5 * tr((y y^T - R^T y y^T R^T) R skew(u)),
// kept as a second route; equals grad(R) . u (tested, not assumed).
double grad_trace_form(const Rotation& R, const Vector3& u);

// Hessian at a critical point: skew(y)^T skew(R^T y). Equals diag(1, 0, 1)
// on the pitch set and diag(-1, 0, -1) on the antipodal set; the kernel is
// span(y), the tangent of the critical circle.
// Requires |grad(R)| <= 1e-9, otherwise throws std::invalid_argument.
Matrix3 hessian(const Rotation& R);

// Quadratic form of the second derivative along exponential curves,
//   -tr(y y^T R skew(u) skew(u));
// at critical points phi(R exp(t skew(u))) - phi(R) = 0.5 t^2 * this + O(t^3).
double hessian_quadratic_form(const Rotation& R, const Vector3& u);

enum class CriticalKind { PitchMinimum, AntipodalMaximum, NotCritical };

struct CriticalClassification {
  CriticalKind kind;
  // Present when critical.
  std::optional<Matrix3> hessian;
  // Eigenvalue lambda in R^T y = lambda y: +1 on the pitch set, -1 on the
  // antipodal set.
  std::optional<int> lambda;
};

// A point is treated as critical when |grad(R)| <= tol; the two components
// are told apart by the sign of y . (R^T y).
CriticalClassification classify_critical(const Rotation& R, double tol = 1e-9);

}  // namespace anchor
