// Linearized closed-loop analysis at the two critical sets, a dense real
// eigenvalue solver for the small matrices that arise here, principal-minor
// definiteness classification, and the limit-set residual probe.

#pragma once

#include <array>
#include <complex>

#include "anchor/control.hpp"
#include "anchor/dynamics.hpp"
#include "anchor/so3.hpp"

namespace anchor {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

enum class Equilibrium { PitchSet, AntipodalSet };

enum class StabilityClass { AsymptoticallyStable, Saddle, Indeterminate };

struct LinearizedSystem {
  Matrix6 A;
  // Sorted by real part, then imaginary part.
  std::array<std::complex<double>, 6> eigenvalues;
  StabilityClass classification;
};

// Second-order closed-loop linearization in the exponential chart theta
// (theta_dot = w):
//   A = [ 0, I; -M^-1 (H + K), -M^-1 (K_D + B) ]
// with M = I_B (the stance inertia at the identity equals the one at the
// roll half-turn for diagonal I_B), H the potential Hessian of the chosen
// set, K = diag(0, gamma, 0) and B = diag(0, beta, 0) from the template.
// Requires the template enabled (it supplies K and B); degenerate gains are
// not rejected, they surface as an Indeterminate classification.
LinearizedSystem linearize(Equilibrium at, const InertiaModel& inert,
                           const AnchorGains& gains,
                           const TemplateParams& tmpl);

// Real dense eigenvalues by Householder reduction to Hessenberg form
// followed by shifted (Francis double-shift) QR iteration. Intended for the
// small systems here: requires 1 <= n <= 8; the total iteration budget is
// 100 * n and exhaustion throws std::runtime_error. Results are sorted by
// (real, imaginary).
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& A);

enum class Definiteness {
  PositiveDefinite,
  PositiveSemidefinite,
  NegativeDefinite,
  NegativeSemidefinite,
  Indefinite
};

// Principal-minor classification: leading minors decide the strict cases
// (Sylvester), all principal minors decide the semidefinite ones. Minors
// within tol of zero count as zero. Requires a symmetric matrix (max
// asymmetry 1e-12) with n <= 8; throws std::invalid_argument otherwise.
Definiteness definiteness(const Eigen::MatrixXd& S, double tol = 1e-12);

// Residual of the limit-set balance -(y x R^T y) - alpha^2 (y x M(R) y);
// zero on trajectories that remain in the undamped directions, generically
// nonzero elsewhere.
Vector3 limit_set_residual(const Rotation& R, double alpha,
                           const InertiaModel& inert);

}  // namespace anchor
