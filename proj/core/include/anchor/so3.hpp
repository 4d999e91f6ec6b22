// Rotation-group primitives: unit-quaternion rotations, the swing/twist
// split about the body pitch axis, membership tests for the pitch and
// antipodal sets, and Haar-uniform sampling.

#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace anchor {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

// Pitch axis of the stance frame. Every potential, membership and template
// quantity in this library is defined relative to this axis.
inline const Vector3 kPitchAxis{0.0, 1.0, 0.0};

// skew(v) is the cross-product matrix: skew(v) * u = v x u.
Matrix3 skew(const Vector3& v);

// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

// Proper rotation stored as a unit quaternion (Hamilton convention).
// Construction renormalizes the norm but keeps the sign, so integrated
// trajectories stay continuous in the components.
class Rotation {
 public:
  Rotation() : q_(1.0, 0.0, 0.0, 0.0) {}

  static Rotation identity() { return Rotation{}; }

  // Unit axis required: |norm(axis) - 1| <= 1e-9, otherwise throws
  // std::invalid_argument. The matrix view equals exp(angle * skew(axis)).
  static Rotation from_axis_angle(const Vector3& axis, double angle);

  // Components in (w, x, y, z) order; throws if the norm is near zero.
  static Rotation from_quaternion(double w, double x, double y, double z);

  // Requires an orthonormal matrix with det +1 (checked to 1e-9).
  static Rotation from_matrix(const Matrix3& m);

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Matrix3 matrix() const { return q_.toRotationMatrix(); }

  Vector3 rotate(const Vector3& v) const { return q_ * v; }
  Vector3 inverse_rotate(const Vector3& v) const { return q_.conjugate() * v; }

  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Rotation operator*(const Rotation& rhs) const { return Rotation(q_ * rhs.q_); }

  // Wraps a raw quaternion; renormalizes, throws on near-zero norm.
  explicit Rotation(const Eigen::Quaterniond& q);

 private:
  Eigen::Quaterniond q_;
};

// Rotation vector (angle times unit axis, angle in [0, pi]); inverse of
// from_axis_angle away from angle 0 and pi.
Vector3 log(const Rotation& R);

// Swing/twist split about the pitch axis: R = swing * rot_y(pitch) with the
// swing axis orthogonal to y. swing is the geodesic distance to the pitch
// set and lies in [0, pi]; pitch lies in [-pi, pi]. At swing == pi the twist
// factor is undefined and the reported pitch falls back to 0, the rotation
// rot_y(0) being (jointly with every other pitch) Frobenius-closest to R.
struct PitchDecomposition {
  double pitch;
  double swing;
};
PitchDecomposition pitch_decompose(const Rotation& R);

// P = { R : R^T y = y } (rotations about the pitch axis) and its antipode
// Q = { R : R^T y = -y } (half-turns about axes orthogonal to y).
enum class SetTag { PitchSet, AntipodalSet, Regular };

struct SetMembership {
  SetTag tag;
  // Swing angle, i.e. geodesic distance to the pitch set; the distance to
  // the antipodal set is pi minus this.
  double distance;
};

// Chord tests per the definitions above: |R^T y - y| <= tol for P,
// |R^T y + y| <= tol for Q.
SetMembership classify_set(const Rotation& R, double tol = 1e-9);

// Haar-uniform rotation from a normalized 4-dimensional Gaussian quaternion.
// The sign is canonicalized (w >= 0), which maps to the same rotation.
Rotation random_rotation(std::mt19937_64& rng);

// Uniform sample of the closed ball of the given radius.
Vector3 random_in_ball(std::mt19937_64& rng, double radius);

}  // namespace anchor
