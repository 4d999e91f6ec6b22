// Two-toe stance force allocation via the sum/difference change of
// variables: s = f_l + f_r carries the net force, d = f_l - f_r carries the
// roll/yaw torque through tau = q x d, and a scalar sigma scales d to keep
// vertical toe forces above a floor.

#pragma once

#include <optional>

#include "anchor/control.hpp"
#include "anchor/so3.hpp"

namespace anchor {

struct StanceGeometry {
  // Body center to toe midpoint.
  Vector3 p{0.0, 0.0, -0.25};
  // Toe midpoint to left toe; the right toe sits at -q. Nonzero; in the
  // nominal stance frame q = (0, q_y, 0) with q_y > 0.
  Vector3 q{0.0, 0.1, 0.0};

  StanceGeometry() = default;
  StanceGeometry(const Vector3& center_to_mid, const Vector3& mid_to_left);
};

struct ToeForces {
  Vector3 f_l;
  Vector3 f_r;
  // Applied scaling of the difference force, in [0, 1].
  double sigma = 1.0;
};

struct Allocation {
  ToeForces forces;
  // False when the sum force alone already violates the vertical floor; in
  // that case sigma = 0 and each toe carries s / 2.
  bool feasible = true;
};

// Closed-form least-norm difference force d = (tau x q) / |q|^2, the
// pseudoinverse of d -> q x d restricted to the plane orthogonal to q.
// Requires tau orthogonal to q: a parallel component beyond 1e-9 * |tau|
// throws std::invalid_argument (the residual is reported in the message).
Vector3 torque_to_difference(const Vector3& q, const Vector3& tau);

// Splits the commanded wrench into toe forces. gravity_ff, when present, is
// added to the vertical sum force (each toe then carries half of it). sigma
// is chosen maximal in [0, 1] subject to both vertical toe forces staying
// >= f_min.
Allocation allocate(const StanceGeometry& geom, const Wrench& wrench,
                    double f_min,
                    std::optional<double> gravity_ff = std::nullopt);

// Net force and torque produced by the toe forces applied at p + q and
// p - q; equals (s, p x s + q x (sigma d)) up to roundoff.
Wrench reconstruct_wrench(const ToeForces& forces, const StanceGeometry& geom);

// Pitch-channel torque produced by off-plane placement: with p split into
// its sagittal part r_p and lateral part e_y, and s split likewise, the
// residual is e_y x s_xz + r_p x s_y. Zero when the stance stays in the
// sagittal plane.
Vector3 pitch_coupling_residual(const Vector3& p, const Vector3& s);

}  // namespace anchor
