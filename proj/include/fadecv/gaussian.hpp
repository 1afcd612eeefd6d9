#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fadecv/common.hpp"

namespace fadecv {

// Second moments of the quadratures (x1, p1, ..., xn, pn) of an n-mode
// Gaussian state, in shot-noise units. A state is physical when every
// symplectic eigenvalue is >= 1 (up to kPhysicalTol).
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 2 || m_.rows() % 2 != 0) {
      throw std::invalid_argument("covariance matrix must be square with even dimension");
    }
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("covariance matrix must be symmetric");
    }
    m_ = ((m_ + m_.transpose()) / 2.0).eval();
  }

  static CovarianceMatrix vacuum(int n_modes) {
    return CovarianceMatrix(Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
  }

  int n_modes() const { return static_cast<int>(m_.rows()) / 2; }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  // 2x2 block coupling modes i and j (i == j gives a mode's own block).
  Eigen::Matrix2d block(int i, int j) const { return m_.block<2, 2>(2 * i, 2 * j); }

  CovarianceMatrix reduced(std::span<const int> keep_modes) const {
    Eigen::MatrixXd out(2 * keep_modes.size(), 2 * keep_modes.size());
    for (std::size_t a = 0; a < keep_modes.size(); ++a) {
      for (std::size_t b = 0; b < keep_modes.size(); ++b) {
        out.block<2, 2>(2 * a, 2 * b) = m_.block<2, 2>(2 * keep_modes[a], 2 * keep_modes[b]);
      }
    }
    return CovarianceMatrix(std::move(out));
  }

 private:
  Eigen::MatrixXd m_;
};

// Block-diagonal symplectic form: Omega = diag([[0,1],[-1,0]], ...).
inline Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

// Beamsplitter of transmittance eta coupling modes a and b:
// r_a' = sqrt(eta) r_a + sqrt(1-eta) r_b,  r_b' = -sqrt(1-eta) r_a + sqrt(eta) r_b.
inline Eigen::MatrixXd beamsplitter(int n_modes, int mode_a, int mode_b, double eta) {
  if (eta < 0.0 || eta > 1.0) throw std::domain_error("beamsplitter transmittance must lie in [0,1]");
  if (mode_a == mode_b || mode_a < 0 || mode_b < 0 || mode_a >= n_modes || mode_b >= n_modes) {
    throw std::invalid_argument("beamsplitter requires two distinct valid modes");
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes);
  const double t = std::sqrt(eta);
  const double r = std::sqrt(1.0 - eta);
  const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity();
  s.block<2, 2>(2 * mode_a, 2 * mode_a) = t * i2;
  s.block<2, 2>(2 * mode_a, 2 * mode_b) = r * i2;
  s.block<2, 2>(2 * mode_b, 2 * mode_a) = -r * i2;
  s.block<2, 2>(2 * mode_b, 2 * mode_b) = t * i2;
  return s;
}

inline CovarianceMatrix apply_symplectic(const CovarianceMatrix& g, const Eigen::MatrixXd& s) {
  return CovarianceMatrix(s * g.matrix() * s.transpose());
}

// Two-mode squeezed vacuum with quadrature variance v per mode.
inline CovarianceMatrix tmsv_state(double v) {
  if (!(v >= 1.0)) throw std::domain_error("two-mode squeezed vacuum requires variance >= 1");
  const double c = std::sqrt(v * v - 1.0);
  Eigen::Matrix4d m;
  m << v, 0, c, 0,
       0, v, 0, -c,
       c, 0, v, 0,
       0, -c, 0, v;
  return CovarianceMatrix(m);
}

inline CovarianceMatrix attach_vacuum(const CovarianceMatrix& g) {
  const int n = g.n_modes();
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(2 * n + 2, 2 * n + 2);
  out.topLeftCorner(2 * n, 2 * n) = g.matrix();
  return CovarianceMatrix(std::move(out));
}

// Lossy channel on one mode: beamsplitter coupling to a fresh vacuum mode at
// transmittance eta, ancilla traced out, plus excess noise chi on that mode.
inline CovarianceMatrix apply_loss_channel(const CovarianceMatrix& g, int mode, double eta,
                                           double chi = 0.0) {
  const int n = g.n_modes();
  if (mode < 0 || mode >= n) throw std::invalid_argument("loss channel: mode index out of range");
  if (eta < 0.0 || eta > 1.0) throw std::domain_error("loss channel transmittance must lie in [0,1]");
  if (chi < 0.0) throw std::domain_error("excess noise must be non-negative");

  const CovarianceMatrix extended =
      apply_symplectic(attach_vacuum(g), beamsplitter(n + 1, mode, n, eta));
  std::vector<int> keep(n);
  for (int k = 0; k < n; ++k) keep[k] = k;
  Eigen::MatrixXd out = extended.reduced(keep).matrix();
  out.block<2, 2>(2 * mode, 2 * mode) += chi * Eigen::Matrix2d::Identity();
  return CovarianceMatrix(std::move(out));
}

// Moduli of the eigenvalue pairs of i*Omega*gamma, sorted descending. One
// value per mode; >= 1 for physical states.
inline std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& g) {
  const int n = g.n_modes();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(symplectic_form(n) * g.matrix(), false);
  std::vector<double> mags(2 * n);
  for (int k = 0; k < 2 * n; ++k) mags[k] = std::abs(solver.eigenvalues()[k].imag());
  std::sort(mags.begin(), mags.end(), std::greater<>());
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = (mags[2 * k] + mags[2 * k + 1]) / 2.0;
  return out;
}

inline bool is_physical(const CovarianceMatrix& g, double tol = kPhysicalTol) {
  const auto nu = symplectic_eigenvalues(g);
  return nu.back() >= 1.0 - tol;
}

// Smallest symplectic eigenvalue of the partial transpose (sign flip of
// mode B's momentum). Values < 1 witness two-mode entanglement.
inline double pt_min_symplectic_eigenvalue(const CovarianceMatrix& g) {
  if (g.n_modes() != 2) throw std::invalid_argument("partial transpose defined here for two modes");
  Eigen::Vector4d flip(1.0, 1.0, 1.0, -1.0);
  const Eigen::MatrixXd pt = flip.asDiagonal() * g.matrix() * flip.asDiagonal();
  return symplectic_eigenvalues(CovarianceMatrix(pt)).back();
}

// Logarithmic negativity max(0, -ln(pt_min)), natural log.
inline double log_negativity(const CovarianceMatrix& g) {
  return std::max(0.0, -std::log(pt_min_symplectic_eigenvalue(g)));
}

// Gaussian purity 1/sqrt(det gamma).
inline double purity(const CovarianceMatrix& g) {
  const double det = g.matrix().determinant();
  if (det <= 0.0) throw unphysical_error("purity: covariance determinant is non-positive");
  return 1.0 / std::sqrt(det);
}

// Bosonic entropic function G(x) = (x+1) log2(x+1) - x log2 x, G(0) = 0.
inline double bosonic_entropy(double x) {
  if (x < 0.0) throw std::domain_error("bosonic entropy argument must be non-negative");
  if (x < 1e-12) {
    // series limit, avoids 0 * log 0
    return x > 0.0 ? x * (std::log2(1.0 / x) + 1.4426950408889634) : 0.0;
  }
  return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

// Von Neumann entropy in bits: sum of G((nu_k - 1)/2) over the symplectic
// spectrum. Eigenvalues slightly below 1 (within kPhysicalTol) clamp to 1.
inline double von_neumann_entropy(const CovarianceMatrix& g) {
  double s = 0.0;
  for (double nu : symplectic_eigenvalues(g)) {
    if (nu < 1.0 - kPhysicalTol) throw unphysical_error("entropy: symplectic eigenvalue below 1");
    if (nu < 1.0) nu = 1.0;
    s += bosonic_entropy((nu - 1.0) / 2.0);
  }
  return s;
}

// State of mode A conditioned on a homodyne x-measurement of mode B:
// gamma_A - sigma_AB (X gamma_B X)^+ sigma_AB^T with X = diag(1, 0). The
// pseudoinverse of the rank<=1 middle factor is taken exactly.
inline CovarianceMatrix conditional_after_homodyne_x(const CovarianceMatrix& g) {
  if (g.n_modes() != 2) throw std::invalid_argument("conditional state defined for two modes");
  const Eigen::Matrix2d ga = g.block(0, 0);
  const Eigen::Matrix2d gb = g.block(1, 1);
  const Eigen::Matrix2d cab = g.block(0, 1);
  Eigen::Matrix2d out = ga;
  const double vx = gb(0, 0);
  if (vx > 0.0) {
    const Eigen::Vector2d u = cab.col(0);
    out -= (u * u.transpose()) / vx;
  }
  return CovarianceMatrix(out);
}

// Conditional-entropy lower bound on distillable entanglement:
// S(reduced A) - S(full state). Negative values certify nothing.
inline double distillable_entanglement_lower_bound(const CovarianceMatrix& g) {
  if (g.n_modes() != 2) throw std::invalid_argument("distillable bound defined for two modes");
  const int keep[] = {0};
  return von_neumann_entropy(g.reduced(keep)) - von_neumann_entropy(g);
}

}  // namespace fadecv
