#include "anchor/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "anchor/potential.hpp"

namespace anchor {

namespace {

// Householder reduction to upper Hessenberg form.
void to_hessenberg(Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  for (int k = 0; k + 2 < n; ++k) {
    Eigen::VectorXd x = a.col(k).segment(k + 1, n - k - 1);
    const double xnorm = x.norm();
    if (xnorm == 0.0) continue;
    const double alpha = (x(0) >= 0.0) ? -xnorm : xnorm;
    Eigen::VectorXd v = x;
    v(0) -= alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // a = P a P with P = I - 2 v v^T acting on the trailing block.
    auto rows = a.block(k + 1, k, n - k - 1, n - k);
    rows -= 2.0 * v * (v.transpose() * rows).eval();
    auto cols = a.block(0, k + 1, n, n - k - 1);
    cols -= (2.0 * (cols * v).eval()) * v.transpose();
    a.col(k).segment(k + 1, n - k - 1).setZero();
    a(k + 1, k) = alpha;
  }
}

// Francis double-shift QR iteration on an upper Hessenberg matrix,
// eigenvalues only. EISPACK hqr lineage, 0-based indexing; deflation uses a
// machine-epsilon relative test and exceptional shifts fire every tenth
// iteration on a stuck block.
std::vector<std::complex<double>> hqr_eigenvalues(Eigen::MatrixXd& a,
                                                  int iteration_budget) {
  const int n = static_cast<int>(a.rows());
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<std::complex<double>> wri(static_cast<std::size_t>(n));

  double anorm = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  }

  int nn = n - 1;
  double t = 0.0;
  int total_its = 0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        wri[nn--] = x + t;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          // 2x2 block: quadratic formula in deflated form.
          double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            wri[nn - 1] = wri[nn] = x + z;
            if (z != 0.0) wri[nn] = x - w / z;
          } else {
            wri[nn] = std::complex<double>(x + p, z);
            wri[nn - 1] = std::conj(wri[nn]);
          }
          nn -= 2;
        } else {
          if (++total_its > iteration_budget) {
            throw std::runtime_error(
                "eigenvalues: QR iteration budget exhausted");
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift to break symmetry on stuck blocks.
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          // Look for two consecutive small subdiagonals from the bottom.
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          int m;
          for (m = nn - 2; m >= l; --m) {
            z = a(m, m);
            const double rr = x - z;
            const double ss = y - z;
            p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - rr - ss;
            r = a(m + 2, m + 1);
            const double scale = std::abs(p) + std::abs(q) + std::abs(r);
            p /= scale;
            q /= scale;
            r /= scale;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(z) *
                (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          // Double-shift QR sweep: chase the 3x1 bulge down the block.
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              double pp = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                pp += r * a(k + 2, j);
                a(k + 2, j) -= pp * z;
              }
              a(k + 1, j) -= pp * y;
              a(k, j) -= pp * x;
            }
            const int mmin = (nn < k + 3) ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              double pp = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                pp += z * a(i, k + 2);
                a(i, k + 2) -= pp * r;
              }
              a(i, k + 1) -= pp * q;
              a(i, k) -= pp;
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return wri;
}

StabilityClass classify_spectrum(
    const std::vector<std::complex<double>>& eigs, double tol) {
  bool any_zero = false;
  bool any_pos = false;
  bool any_neg = false;
  for (const auto& e : eigs) {
    if (std::abs(e.real()) <= tol) {
      any_zero = true;
    } else if (e.real() > 0.0) {
      any_pos = true;
    } else {
      any_neg = true;
    }
  }
  if (any_zero) return StabilityClass::Indeterminate;
  if (any_pos && any_neg) return StabilityClass::Saddle;
  if (any_neg) return StabilityClass::AsymptoticallyStable;
  return StabilityClass::Indeterminate;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != A.rows() || n < 1 || n > 8) {
    throw std::invalid_argument("eigenvalues: need a square matrix, n in [1, 8]");
  }
  if (!A.allFinite()) {
    throw std::invalid_argument("eigenvalues: matrix has non-finite entries");
  }
  Eigen::MatrixXd h = A;
  to_hessenberg(h);
  auto eigs = hqr_eigenvalues(h, 100 * n);
  std::sort(eigs.begin(), eigs.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });
  return eigs;
}

LinearizedSystem linearize(Equilibrium at, const InertiaModel& inert,
                           const AnchorGains& gains,
                           const TemplateParams& tmpl) {
  if (!tmpl.enabled) {
    throw std::invalid_argument(
        "linearize: the template supplies the pitch stiffness and damping "
        "and must be enabled");
  }
  tmpl.validate();

  // Both reference points (identity and the roll half-turn) conjugate the
  // diagonal I_B to itself, so M is just I_B here.
  const Vector3 m = inert.principal;
  // H + K and K_D + B, all diagonal at the reference points.
  const double h_transverse = (at == Equilibrium::PitchSet) ? 1.0 : -1.0;
  const Vector3 stiffness(h_transverse, tmpl.gamma, h_transverse);
  const Vector3 damping(gains.kappa1, tmpl.beta, gains.kappa2);

  LinearizedSystem sys;
  sys.A.setZero();
  sys.A.topRightCorner<3, 3>() = Matrix3::Identity();
  for (int i = 0; i < 3; ++i) {
    sys.A(3 + i, i) = -stiffness(i) / m(i);
    sys.A(3 + i, 3 + i) = -damping(i) / m(i);
  }

  const auto eigs = eigenvalues(Eigen::MatrixXd(sys.A));
  for (int i = 0; i < 6; ++i) sys.eigenvalues[static_cast<std::size_t>(i)] = eigs[static_cast<std::size_t>(i)];
  sys.classification = classify_spectrum(eigs, 1e-9);
  return sys;
}

Definiteness definiteness(const Eigen::MatrixXd& S, double tol) {
  const int n = static_cast<int>(S.rows());
  if (S.cols() != S.rows() || n < 1 || n > 8) {
    throw std::invalid_argument("definiteness: need a square matrix, n in [1, 8]");
  }
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("definiteness: matrix is not symmetric");
  }

  // Leading minors decide the strict cases (Sylvester).
  bool pd = true, nd = true;
  for (int k = 1; k <= n; ++k) {
    const double det = S.topLeftCorner(k, k).determinant();
    pd = pd && det > tol;
    nd = nd && ((k % 2 == 1) ? det < -tol : det > tol);
  }
  if (pd) return Definiteness::PositiveDefinite;
  if (nd) return Definiteness::NegativeDefinite;

  // All principal minors decide the semidefinite ones.
  bool psd = true, nsd = true;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) sub(i, j) = S(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    const double det = sub.determinant();
    psd = psd && det >= -tol;
    nsd = nsd && ((k % 2 == 1) ? det <= tol : det >= -tol);
  }
  if (psd) return Definiteness::PositiveSemidefinite;
  if (nsd) return Definiteness::NegativeSemidefinite;
  return Definiteness::Indefinite;
}

Vector3 limit_set_residual(const Rotation& R, double alpha,
                           const InertiaModel& inert) {
  const Matrix3 m = inertia_stance(R, inert);
  return -grad(R) - alpha * alpha * kPitchAxis.cross(m * kPitchAxis);
}

}  // namespace anchor
