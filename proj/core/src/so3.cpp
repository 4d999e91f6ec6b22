#include "anchor/so3.hpp"

#include <cmath>
#include <stdexcept>

namespace anchor {

Matrix3 skew(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(q) {
  const double n = q_.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw std::invalid_argument("Rotation: quaternion norm is degenerate");
  }
  q_.coeffs() /= n;
}

Rotation Rotation::from_axis_angle(const Vector3& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("Rotation::from_axis_angle: axis is not unit");
  }
  return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)));
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  return Rotation(Eigen::Quaterniond(w, x, y, z));
}

Rotation Rotation::from_matrix(const Matrix3& m) {
  if ((m.transpose() * m - Matrix3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      m.determinant() < 0.0) {
    throw std::invalid_argument("Rotation::from_matrix: not a rotation matrix");
  }
  return Rotation(Eigen::Quaterniond(m));
}

Vector3 log(const Rotation& R) {
  Eigen::Quaterniond q = R.quaternion();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vector3 v = q.vec();
  const double vn = v.norm();
  if (vn < 1e-12) {
    // Small angle: angle/sin(angle/2) -> 2 up to O(vn^2).
    return 2.0 * v;
  }
  const double angle = 2.0 * std::atan2(vn, q.w());
  return (angle / vn) * v;
}

PitchDecomposition pitch_decompose(const Rotation& R) {
  // Swing angle from the image of the pitch axis: cos = y . (R^T y) and
  // |sin| = |y x (R^T y)|, which is exact at both ends of [0, pi].
  const Vector3 ry = R.inverse_rotate(kPitchAxis);
  const double swing =
      std::atan2(kPitchAxis.cross(ry).norm(), kPitchAxis.dot(ry));

  // Twist about y from the canonicalized quaternion. With q = (w, x, y, z)
  // the twist factor is (w, 0, y, 0)/|(w, y)| and q * twist^-1 has no y
  // component, so R = swing_factor * rot_y(pitch).
  Eigen::Quaterniond q = R.quaternion();
  if (q.w() < 0.0 || (q.w() == 0.0 && q.y() < 0.0)) q.coeffs() = -q.coeffs();
  double pitch = 0.0;
  if (q.w() != 0.0 || q.y() != 0.0) {
    pitch = 2.0 * std::atan2(q.y(), q.w());
  }
  // else: half turn about an axis orthogonal to y; every pitch value is
  // equally close, report the tie-break value 0.
  return {pitch, swing};
}

SetMembership classify_set(const Rotation& R, double tol) {
  const Vector3 ry = R.inverse_rotate(kPitchAxis);
  const double swing =
      std::atan2(kPitchAxis.cross(ry).norm(), kPitchAxis.dot(ry));
  if ((ry - kPitchAxis).norm() <= tol) return {SetTag::PitchSet, swing};
  if ((ry + kPitchAxis).norm() <= tol) return {SetTag::AntipodalSet, swing};
  return {SetTag::Regular, swing};
}

Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q;
  double n2;
  do {
    q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    n2 = q.squaredNorm();
  } while (n2 < 1e-24);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return Rotation(q);
}

Vector3 random_in_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector3 dir;
  double n;
  do {
    dir = Vector3(gauss(rng), gauss(rng), gauss(rng));
    n = dir.norm();
  } while (n < 1e-12);
  const double r = radius * std::cbrt(unit(rng));
  return (r / n) * dir;
}

}  // namespace anchor
