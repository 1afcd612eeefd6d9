#pragma once

#include <cmath>
#include <optional>

#include "fadecv/channel.hpp"
#include "fadecv/common.hpp"
#include "fadecv/gaussian.hpp"

namespace fadecv {

// Coherent-state protocol with reverse reconciliation: Alice heterodynes, Bob
// homodynes the x quadrature, reconciliation efficiency is 1. sigma = v - 1 is
// the equivalent prepare-and-measure modulation variance, chi the untrusted
// excess noise at the channel output.
struct ProtocolParams {
  double v = 1.0;
  double chi = 0.0;

  double sigma() const { return v - 1.0; }
  static ProtocolParams from_modulation(double sigma, double chi = 0.0) {
    return {sigma + 1.0, chi};
  }
  void validate() const {
    if (!(v >= 1.0)) throw std::domain_error("state variance must be >= 1");
    if (chi < 0.0) throw std::domain_error("excess noise must be non-negative");
  }
};

struct KeyRateReport {
  double i_ab = 0.0;    // bits per measurement
  double chi_be = 0.0;  // Holevo bound, bits per measurement
  double k = 0.0;       // i_ab - chi_be, may be negative
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 1.0;
  ChannelMoments moments;
  double ps_success = 1.0;
  double k_weighted = 0.0;  // ps_success * max(k, 0)
};

// Mutual information of the heterodyne/homodyne pair:
// (1/2) log2[ 1 / (1 - <sqrt(eta)>^2 sigma / (1 + <eta> sigma + chi)) ].
inline double mutual_information(const ChannelMoments& m, const ProtocolParams& p) {
  p.validate();
  const double sigma = p.sigma();
  const double arg = 1.0 - m.mean_sqrt_sq() * sigma / (1.0 + m.mean * sigma + p.chi);
  if (!(arg > 0.0)) throw unphysical_error("mutual information: moments violate <eta> >= <sqrt(eta)>^2");
  return 0.5 * std::log2(1.0 / arg);
}

namespace detail {

struct HolevoParts {
  double chi_be;
  double lambda1, lambda2, lambda3;
};

// Eve purifies the transmitted state, so her information about Bob's homodyne
// outcome is S(state) - S(state | x_B), both Gaussian entropies.
inline HolevoParts holevo_parts(const CovarianceMatrix& g) {
  const auto nu = symplectic_eigenvalues(g);
  const double l1 = nu[0];
  const double l2 = nu[1];
  if (l2 < 1.0 - kPhysicalTol) throw unphysical_error("Holevo bound: state is unphysical");
  const auto cond = conditional_after_homodyne_x(g);
  const double l3 = symplectic_eigenvalues(cond)[0];
  if (l3 < 1.0 - kPhysicalTol) throw unphysical_error("Holevo bound: conditional state is unphysical");
  const auto gterm = [](double l) { return bosonic_entropy(std::max(l - 1.0, 0.0) / 2.0); };
  const double chi_be = std::max(0.0, gterm(l1) + gterm(l2) - gterm(l3));
  return {chi_be, l1, l2, l3};
}

}  // namespace detail

inline double holevo_bound(const ChannelMoments& m, const ProtocolParams& p) {
  p.validate();
  return detail::holevo_parts(evolve_tmsv(m, p.v, p.chi)).chi_be;
}

// Collective-attack lower bound K = I_AB - chi_BE from the channel moments.
inline KeyRateReport key_rate_from_moments(const ChannelMoments& m, const ProtocolParams& p,
                                           double ps_success = 1.0) {
  KeyRateReport r;
  r.i_ab = mutual_information(m, p);
  const auto h = detail::holevo_parts(evolve_tmsv(m, p.v, p.chi));
  r.chi_be = h.chi_be;
  r.lambda1 = h.lambda1;
  r.lambda2 = h.lambda2;
  r.lambda3 = h.lambda3;
  r.k = r.i_ab - r.chi_be;
  r.moments = m;
  r.ps_success = ps_success;
  r.k_weighted = ps_success * std::max(r.k, 0.0);
  return r;
}

inline KeyRateReport key_rate_collective(const TransmittanceDistribution& d,
                                         const ProtocolParams& p) {
  return key_rate_from_moments(moments(d), p);
}

// Same bound evaluated directly on a reconstructed two-mode covariance matrix
// (e.g. a finite-ensemble estimate); I_AB comes from the measured conditional
// variance instead of the closed form.
inline KeyRateReport key_rate_from_covariance(const CovarianceMatrix& g, double ps_success = 1.0,
                                              std::optional<ChannelMoments> m = std::nullopt) {
  if (g.n_modes() != 2) throw std::invalid_argument("key rate defined for two-mode states");
  KeyRateReport r;
  const double va = g(0, 0);
  const double vb = g(2, 2);
  const double cxx = g(0, 2);
  const double arg = 1.0 - cxx * cxx / ((va + 1.0) * vb);
  if (!(arg > 0.0)) throw unphysical_error("key rate: conditional variance is non-positive");
  r.i_ab = 0.5 * std::log2(1.0 / arg);
  const auto h = detail::holevo_parts(g);
  r.chi_be = h.chi_be;
  r.lambda1 = h.lambda1;
  r.lambda2 = h.lambda2;
  r.lambda3 = h.lambda3;
  r.k = r.i_ab - r.chi_be;
  if (m) r.moments = *m;
  r.ps_success = ps_success;
  r.k_weighted = ps_success * std::max(r.k, 0.0);
  return r;
}

// Largest entanglement-preserving Var(sqrt(eta)) for given <sqrt(eta)>^2,
// state variance and excess noise:
// [2(s-1) - chi + sqrt(4(1+s)^2 + chi^2)] / (2(v-1)).
inline double max_fading_variance_entanglement(double mean_sqrt_sq, double v, double chi = 0.0) {
  if (!(v > 1.0)) throw std::domain_error("entanglement threshold requires v > 1");
  if (mean_sqrt_sq < 0.0 || mean_sqrt_sq > 1.0) {
    throw std::domain_error("<sqrt(eta)>^2 must lie in [0,1]");
  }
  if (chi < 0.0) throw std::domain_error("excess noise must be non-negative");
  const double s = mean_sqrt_sq;
  return (2.0 * (s - 1.0) - chi + std::sqrt(4.0 * (1.0 + s) * (1.0 + s) + chi * chi)) /
         (2.0 * (v - 1.0));
}

// Largest Var(sqrt(eta)) keeping the individual-attack key rate positive:
// [s sigma - 2(sigma+1)(chi+1) + sqrt(s^2 sigma^2 + 4(sigma+1)^2)] / (2 sigma (sigma+1)).
inline double max_fading_variance_individual(double mean_sqrt_sq, double sigma, double chi = 0.0) {
  if (!(sigma > 0.0)) throw std::domain_error("individual threshold requires sigma > 0");
  if (mean_sqrt_sq < 0.0 || mean_sqrt_sq > 1.0) {
    throw std::domain_error("<sqrt(eta)>^2 must lie in [0,1]");
  }
  if (chi < 0.0) throw std::domain_error("excess noise must be non-negative");
  const double s = mean_sqrt_sq;
  return (s * sigma - 2.0 * (sigma + 1.0) * (chi + 1.0) +
          std::sqrt(s * s * sigma * sigma + 4.0 * (sigma + 1.0) * (sigma + 1.0))) /
         (2.0 * sigma * (sigma + 1.0));
}

struct CollectiveVarianceThreshold {
  double var_max = 0.0;
  bool insecure_at_zero = false;  // collective key rate negative even without fading
};

// Largest Var(sqrt(eta)) with non-negative collective-attack key rate, by
// bisection over the two-moment parameterization. The scan is capped at the
// largest variance attainable for distributions on [0,1].
inline CollectiveVarianceThreshold max_fading_variance_collective(double mean_sqrt_sq,
                                                                  double sigma, double chi = 0.0) {
  if (!(sigma > 0.0)) throw std::domain_error("collective threshold requires sigma > 0");
  if (!(mean_sqrt_sq > 0.0 && mean_sqrt_sq <= 1.0)) {
    throw std::domain_error("<sqrt(eta)>^2 must lie in (0,1]");
  }
  const ProtocolParams p = ProtocolParams::from_modulation(sigma, chi);
  const double ms = std::sqrt(mean_sqrt_sq);
  const auto secure = [&](double var) {
    const ChannelMoments m{ms, mean_sqrt_sq + var};
    return key_rate_from_moments(m, p).k >= -1e-10;
  };
  if (!secure(0.0)) return {0.0, true};
  const double cap = std::min(0.25, ms * (1.0 - ms));
  if (cap <= 0.0 || secure(cap)) return {cap, false};
  double lo = 0.0;
  double hi = cap;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    (secure(mid) ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), false};
}

}  // namespace fadecv
