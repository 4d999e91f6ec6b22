#include <cmath>
#include <random>

#include <doctest.h>

#include "anchor/so3.hpp"
#include "support/oracles.hpp"

using namespace anchor;

TEST_SUITE("so3") {

TEST_CASE("skew matrix realizes the cross product") {
  const Vector3 v(1.0, 2.0, 3.0);
  Matrix3 expect;
  expect << 0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0;
  CHECK((skew(v) - expect).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Vector3 a(n(rng), n(rng), n(rng)), b(n(rng), n(rng), n(rng));
    CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
    CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
  }
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == kPi);
  CHECK(wrap_angle(-kPi) == kPi);
  CHECK(std::abs(wrap_angle(3.0 * kPi / 2.0) + kPi / 2.0) < 1e-14);
  CHECK(std::abs(wrap_angle(-3.0 * kPi / 2.0) - kPi / 2.0) < 1e-14);
  CHECK(std::abs(wrap_angle(2.0 * kPi)) < 1e-14);
  CHECK(wrap_angle(6.0) == doctest::Approx(-0.28318530717958623).epsilon(1e-13));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    CHECK(w > -kPi - 1e-12);
    CHECK(w <= kPi + 1e-12);
    // Same point on the circle.
    CHECK(std::abs(std::sin(a - w)) < 1e-12);
  }
}

TEST_CASE("rotation construction and validation") {
  const Rotation rx = Rotation::from_axis_angle(Vector3(1, 0, 0), kPi / 2.0);
  Matrix3 expect;
  expect << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((rx.matrix() - expect).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(Rotation::from_axis_angle(Vector3(1, 1, 0), 0.3),
                  std::invalid_argument);
  CHECK_THROWS_AS(Rotation::from_quaternion(0, 0, 0, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Rotation::from_quaternion(1e-13, 0, 0, 0),
                  std::invalid_argument);

  // Renormalization keeps the sign of the components.
  const Rotation neg = Rotation::from_quaternion(-2.0, 0.0, 0.0, 0.0);
  CHECK(neg.quaternion().w() == -1.0);

  Matrix3 reflect = Matrix3::Identity();
  reflect(2, 2) = -1.0;
  CHECK_THROWS_AS(Rotation::from_matrix(reflect), std::invalid_argument);
  Matrix3 scaled = Matrix3::Identity() * 1.001;
  CHECK_THROWS_AS(Rotation::from_matrix(scaled), std::invalid_argument);
  CHECK_NOTHROW(Rotation::from_matrix(rx.matrix()));
}

TEST_CASE("rotation algebra round trips") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Rotation a = random_rotation(rng);
    const Rotation b = random_rotation(rng);
    const Vector3 v = random_in_ball(rng, 2.0);
    CHECK((a.rotate(a.inverse_rotate(v)) - v).norm() < 1e-14);
    CHECK(((a * b).matrix() - a.matrix() * b.matrix()).cwiseAbs().maxCoeff() <
          1e-14);
    CHECK(((a * a.inverse()).matrix() - Matrix3::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    // Matrix and quaternion views agree.
    CHECK((a.matrix() * v - a.rotate(v)).norm() < 1e-13);
  }
}

TEST_CASE("log inverts from_axis_angle") {
  CHECK(log(Rotation::identity()).norm() == 0.0);
  CHECK((log(Rotation::from_axis_angle(Vector3(1, 0, 0), 0.3)) -
         Vector3(0.3, 0, 0))
            .norm() < 1e-15);
  CHECK((log(Rotation::from_axis_angle(Vector3(0, 0, 1), -1e-9)) -
         Vector3(0, 0, -1e-9))
            .norm() < 1e-22);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const Rotation R = random_rotation(rng);
    const Vector3 w = log(R);
    CHECK(w.norm() <= kPi + 1e-12);
    const Rotation back =
        w.norm() > 0 ? Rotation::from_axis_angle(w.normalized(), w.norm())
                     : Rotation::identity();
    CHECK(oracle::geodesic(R, back) < 1e-12);
  }
}

TEST_CASE("pitch decomposition on pure factors") {
  const auto d1 = pitch_decompose(Rotation::from_axis_angle(kPitchAxis, 0.7));
  CHECK(d1.swing == 0.0);
  CHECK(d1.pitch == doctest::Approx(0.7).epsilon(1e-15));

  const auto d2 =
      pitch_decompose(Rotation::from_axis_angle(Vector3(1, 0, 0), 0.4));
  CHECK(d2.swing == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(d2.pitch == 0.0);

  // Composite swing * twist recovers both factors.
  const Rotation R = Rotation::from_axis_angle(Vector3(1, 0, 0), 0.5) *
                     Rotation::from_axis_angle(kPitchAxis, 0.8);
  const auto d3 = pitch_decompose(R);
  CHECK(d3.swing == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(d3.pitch == doctest::Approx(0.8).epsilon(1e-13));

  // Negative pitch through the quaternion sign canonicalization.
  const auto d4 = pitch_decompose(Rotation::from_axis_angle(kPitchAxis, -2.9));
  CHECK(d4.pitch == doctest::Approx(-2.9).epsilon(1e-14));

  // Antipodal points have undefined twist; the convention reports 0.
  const auto d5 =
      pitch_decompose(Rotation::from_quaternion(0.0, 1.0, 0.0, 0.0));
  CHECK(d5.swing == doctest::Approx(kPi));
  CHECK(d5.pitch == 0.0);
  const auto d6 = pitch_decompose(Rotation::from_axis_angle(
      Vector3(1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0)), kPi));
  CHECK(d6.swing == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("swing is the geodesic distance to the pitch circle") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Rotation R = random_rotation(rng);
    const auto d = pitch_decompose(R);
    CHECK(d.swing >= 0.0);
    CHECK(d.swing <= kPi);
    // Nearest pitch rotation sits at the decomposed pitch angle.
    const Rotation nearest = Rotation::from_axis_angle(kPitchAxis, d.pitch);
    CHECK(oracle::geodesic(R, nearest) ==
          doctest::Approx(d.swing).epsilon(1e-10));
    // And no grid point on the circle is closer.
    const double scanned = oracle::swing_by_scan(R);
    CHECK(scanned >= d.swing - 1e-12);
    CHECK(scanned <= d.swing + 1e-4);
  }
}

TEST_CASE("set classification uses the chord tolerance") {
  CHECK(classify_set(Rotation::from_axis_angle(kPitchAxis, 1.3)).tag ==
        SetTag::PitchSet);
  CHECK(classify_set(Rotation::from_quaternion(0, 0.6, 0, 0.8)).tag ==
        SetTag::AntipodalSet);
  const auto reg =
      classify_set(Rotation::from_axis_angle(Vector3(1, 0, 0), 0.3));
  CHECK(reg.tag == SetTag::Regular);
  CHECK(reg.distance == doctest::Approx(0.3).epsilon(1e-14));

  CHECK(classify_set(Rotation::from_axis_angle(Vector3(1, 0, 0), 1e-10)).tag ==
        SetTag::PitchSet);
  CHECK(classify_set(Rotation::from_axis_angle(Vector3(1, 0, 0), 1e-8)).tag ==
        SetTag::Regular);
  CHECK(classify_set(Rotation::from_axis_angle(Vector3(1, 0, 0), 1e-8), 1e-7)
            .tag == SetTag::PitchSet);
}

TEST_CASE("haar sampling statistics") {
  std::mt19937_64 rng(42);
  const int n = 200000;
  double sw = 0, sx = 0, sy = 0, sz = 0, mean_dot = 0;
  Vector3 mean_img = Vector3::Zero();
  int cdf_small = 0, cdf_half = 0, cdf_large = 0;
  bool all_canonical = true, all_unit = true;
  for (int i = 0; i < n; ++i) {
    const Rotation R = random_rotation(rng);
    const auto& q = R.quaternion();
    all_canonical = all_canonical && q.w() >= 0.0;
    all_unit = all_unit && std::abs(q.norm() - 1.0) < 1e-12;
    sw += q.w() * q.w();
    sx += q.x() * q.x();
    sy += q.y() * q.y();
    sz += q.z() * q.z();
    const double c = kPitchAxis.dot(R.inverse_rotate(kPitchAxis));
    mean_dot += c;
    mean_img += R.rotate(kPitchAxis);
    const double swing = std::acos(std::clamp(c, -1.0, 1.0));
    if (swing <= 0.5) ++cdf_small;
    if (swing <= kPi / 2.0) ++cdf_half;
    if (swing <= 2.5) ++cdf_large;
  }
  CHECK(all_canonical);
  CHECK(all_unit);
  // Quaternion components each carry a quarter of the unit norm on average.
  for (double s : {sw, sx, sy, sz}) CHECK(std::abs(s / n - 0.25) < 5e-3);
  CHECK(std::abs(mean_dot / n) < 5e-3);
  CHECK((mean_img / n).norm() < 5e-3);
  // Swing CDF matches the analytic cap measure.
  CHECK(std::abs(cdf_small / double(n) - oracle::haar_swing_cdf(0.5)) < 4e-3);
  CHECK(std::abs(cdf_half / double(n) - 0.5) < 4e-3);
  CHECK(std::abs(cdf_large / double(n) - oracle::haar_swing_cdf(2.5)) < 4e-3);
}

TEST_CASE("ball sampling statistics") {
  std::mt19937_64 rng(43);
  const int n = 200000;
  const double radius = 2.0;
  Vector3 mean = Vector3::Zero();
  double mean_norm = 0.0;
  int inside_half = 0;
  bool all_inside = true;
  for (int i = 0; i < n; ++i) {
    const Vector3 v = random_in_ball(rng, radius);
    all_inside = all_inside && v.norm() <= radius + 1e-12;
    mean += v;
    mean_norm += v.norm();
    if (v.norm() <= 1.0) ++inside_half;
  }
  CHECK(all_inside);
  CHECK((mean / n).norm() < 1e-2);
  // E[|v|] = (3/4) R for the uniform ball.
  CHECK(std::abs(mean_norm / n - 1.5) < 8e-3);
  // P(|v| <= R/2) = 1/8.
  CHECK(std::abs(inside_half / double(n) - 0.125) < 4e-3);
  CHECK(random_in_ball(rng, 0.0).norm() == 0.0);
}

}  // TEST_SUITE
