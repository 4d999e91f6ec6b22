#include "anchor/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anchor {

StanceGeometry::StanceGeometry(const Vector3& center_to_mid,
                               const Vector3& mid_to_left)
    : p(center_to_mid), q(mid_to_left) {
  if (!(q.norm() > 0.0)) {
    throw std::invalid_argument("StanceGeometry: q must be nonzero");
  }
}

Vector3 torque_to_difference(const Vector3& q, const Vector3& tau) {
  const double qn = q.norm();
  if (qn < 1e-12) {
    throw std::invalid_argument("torque_to_difference: q is degenerate");
  }
  const double parallel = tau.dot(q) / qn;
  if (std::abs(parallel) > 1e-9 * tau.norm()) {
    std::ostringstream msg;
    msg << "torque_to_difference: torque has a component parallel to q "
           "(residual "
        << parallel << " against |tau| " << tau.norm() << ")";
    throw std::invalid_argument(msg.str());
  }
  return tau.cross(q) / (qn * qn);
}

Allocation allocate(const StanceGeometry& geom, const Wrench& wrench,
                    double f_min, std::optional<double> gravity_ff) {
  Vector3 s = wrench.force;
  if (gravity_ff) s.z() += *gravity_ff;
  const Vector3 d = torque_to_difference(geom.q, wrench.torque);

  // Largest sigma in [0, 1] keeping both vertical toe forces >= f_min:
  // (s_z +/- sigma d_z) / 2 >= f_min  <=>  sigma |d_z| <= s_z - 2 f_min.
  const double margin = s.z() - 2.0 * f_min;
  Allocation out;
  double sigma;
  if (margin < 0.0) {
    out.feasible = false;
    sigma = 0.0;
  } else if (std::abs(d.z()) <= margin) {
    sigma = 1.0;
  } else {
    sigma = margin / std::abs(d.z());
  }

  const Vector3 applied = sigma * d;
  const Vector3 f_l = 0.5 * (s + applied);
  out.forces = ToeForces{f_l, s - f_l, sigma};
  return out;
}

Wrench reconstruct_wrench(const ToeForces& forces,
                          const StanceGeometry& geom) {
  const Vector3 x_l = geom.p + geom.q;
  const Vector3 x_r = geom.p - geom.q;
  Wrench w;
  w.force = forces.f_l + forces.f_r;
  w.torque = x_l.cross(forces.f_l) + x_r.cross(forces.f_r);
  return w;
}

Vector3 pitch_coupling_residual(const Vector3& p, const Vector3& s) {
  const Vector3 e_y(0.0, p.y(), 0.0);
  const Vector3 r_p(p.x(), 0.0, p.z());
  const Vector3 s_y(0.0, s.y(), 0.0);
  const Vector3 s_xz(s.x(), 0.0, s.z());
  return e_y.cross(s_xz) + r_p.cross(s_y);
}

}  // namespace anchor
