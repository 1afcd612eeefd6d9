#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fadecv/channel.hpp"
#include "fadecv/security.hpp"

namespace fadecv {

// Result of optimizing the post-selection region [eta_min, 1] (and optionally
// the modulation) for the success-probability-weighted key.
struct PSOptimum {
  double eta_min = 0.0;
  double sigma_opt = std::numeric_limits<double>::quiet_NaN();  // set by the joint optimizer
  double k_weighted = 0.0;
  double success_probability = 1.0;
  KeyRateReport report;
};

// Key rate of the region [eta_min, 1], floored at zero and weighted by the
// probability of landing in the region. An empty region contributes nothing.
inline double weighted_key(const TransmittanceDistribution& d, double eta_min,
                           const ProtocolParams& p) {
  try {
    const auto r = restrict(d, eta_min);
    return r.success_probability *
           std::max(0.0, key_rate_collective(r.distribution, p).k);
  } catch (const empty_selection_error&) {
    return 0.0;
  }
}

namespace detail {

// Candidate region starts: no selection, then the lower edge of every
// occupied bin. The weighted key is piecewise constant between bin edges, so
// this scan is exhaustive.
inline std::vector<double> region_start_candidates(const TransmittanceDistribution& d) {
  std::vector<double> c;
  c.reserve(d.size() + 1);
  c.push_back(0.0);
  const double half = d.delta_eta() / 2.0;
  for (const auto& b : d.bins()) c.push_back(std::max(0.0, b.eta - half));
  return c;
}

}  // namespace detail

// Exhaustive scan of the region start over the bin edges; ties resolve to the
// smaller eta_min (the larger ensemble).
inline PSOptimum optimize_ps(const TransmittanceDistribution& d, const ProtocolParams& p) {
  PSOptimum best;
  best.eta_min = 0.0;
  best.k_weighted = -1.0;
  for (const double start : detail::region_start_candidates(d)) {
    const double kw = weighted_key(d, start, p);
    if (kw > best.k_weighted) {
      best.k_weighted = kw;
      best.eta_min = start;
    }
  }
  const auto r = restrict(d, best.eta_min);
  best.success_probability = r.success_probability;
  best.report = key_rate_from_moments(moments(r.distribution), p, r.success_probability);
  return best;
}

// 60 log-spaced modulation values covering 1e-2 .. 1e3 SNU.
inline std::vector<double> default_sigma_grid() {
  std::vector<double> grid(60);
  for (int i = 0; i < 60; ++i) grid[i] = std::pow(10.0, -2.0 + 5.0 * i / 59.0);
  return grid;
}

// Joint scan over modulation and region start; ties resolve to the smaller
// modulation, then the smaller eta_min.
inline PSOptimum optimize_ps_and_modulation(const TransmittanceDistribution& d, double chi,
                                            std::span<const double> sigma_grid) {
  if (sigma_grid.empty()) throw std::invalid_argument("modulation grid is empty");
  PSOptimum best;
  bool first = true;
  for (const double sigma : sigma_grid) {
    if (!(sigma > 0.0)) throw std::domain_error("modulation values must be positive");
    PSOptimum cand = optimize_ps(d, ProtocolParams::from_modulation(sigma, chi));
    cand.sigma_opt = sigma;
    if (first || cand.k_weighted > best.k_weighted) {
      best = cand;
      first = false;
    }
  }
  return best;
}

inline PSOptimum optimize_ps_and_modulation(const TransmittanceDistribution& d, double chi) {
  const auto grid = default_sigma_grid();
  return optimize_ps_and_modulation(d, chi, grid);
}

}  // namespace fadecv
