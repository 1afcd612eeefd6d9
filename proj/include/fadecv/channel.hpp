#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fadecv/common.hpp"
#include "fadecv/gaussian.hpp"

namespace fadecv {

struct TransmittanceBin {
  double eta = 0.0;
  double p = 0.0;
};

enum class Provenance { model, empirical };

// Discrete fading channel: transmittance values eta_i (strictly increasing,
// in [0,1]) with probabilities summing to 1. delta_eta records the width of
// the binning grid the values live on.
class TransmittanceDistribution {
 public:
  TransmittanceDistribution(std::vector<TransmittanceBin> bins, double delta_eta,
                            Provenance provenance)
      : bins_(std::move(bins)), delta_eta_(delta_eta), provenance_(provenance) {
    if (bins_.empty()) throw std::domain_error("transmittance distribution has no bins");
    if (!(delta_eta_ > 0.0)) throw std::invalid_argument("bin width must be positive");
    double total = 0.0;
    for (std::size_t i = 0; i < bins_.size(); ++i) {
      const auto& b = bins_[i];
      if (b.eta < 0.0 || b.eta > 1.0) {
        throw std::domain_error("transmittance value outside [0,1] at bin " + std::to_string(i));
      }
      if (b.p < 0.0) throw std::domain_error("negative probability at bin " + std::to_string(i));
      if (i > 0 && !(b.eta > bins_[i - 1].eta)) {
        throw std::invalid_argument("transmittance values must be strictly increasing");
      }
      total += b.p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::domain_error("bin probabilities must sum to 1 (got " + std::to_string(total) + ")");
    }
  }

  // Degenerate channel with a single fixed transmittance.
  static TransmittanceDistribution single(double eta, double delta_eta = 1e-3,
                                          Provenance provenance = Provenance::model) {
    return TransmittanceDistribution({{eta, 1.0}}, delta_eta, provenance);
  }

  std::span<const TransmittanceBin> bins() const { return bins_; }
  std::size_t size() const { return bins_.size(); }
  double delta_eta() const { return delta_eta_; }
  Provenance provenance() const { return provenance_; }
  double min_eta() const { return bins_.front().eta; }
  double max_eta() const { return bins_.back().eta; }

 private:
  std::vector<TransmittanceBin> bins_;
  double delta_eta_;
  Provenance provenance_;
};

// First moments of the transmittance that govern the evolved state:
// <sqrt(eta)>, <eta> and Var(sqrt(eta)) = <eta> - <sqrt(eta)>^2.
struct ChannelMoments {
  double mean_sqrt = 0.0;
  double mean = 0.0;
  double var_sqrt() const { return mean - mean_sqrt * mean_sqrt; }
  double mean_sqrt_sq() const { return mean_sqrt * mean_sqrt; }
};

inline ChannelMoments moments(const TransmittanceDistribution& d) {
  ChannelMoments m;
  for (const auto& b : d.bins()) {
    m.mean_sqrt += b.p * std::sqrt(b.eta);
    m.mean += b.p * b.eta;
  }
  return m;
}

// Mixture covariance matrix of a two-mode squeezed vacuum of variance v after
// the fading channel, with excess noise chi added to the transmitted mode:
//   [[ v I, <sqrt(eta)> c sigma_z ], [ ., (v<eta> + 1 - <eta> + chi) I ]].
inline CovarianceMatrix evolve_tmsv(const ChannelMoments& m, double v, double chi = 0.0) {
  if (!(v >= 1.0)) throw std::domain_error("state variance must be >= 1");
  if (chi < 0.0) throw std::domain_error("excess noise must be non-negative");
  const double k = m.mean_sqrt * std::sqrt(v * v - 1.0);
  const double vb = v * m.mean + 1.0 - m.mean + chi;
  Eigen::Matrix4d g;
  g << v, 0, k, 0,
       0, v, 0, -k,
       k, 0, vb, 0,
       0, -k, 0, vb;
  return CovarianceMatrix(g);
}

inline CovarianceMatrix evolve_tmsv(const TransmittanceDistribution& d, double v,
                                    double chi = 0.0) {
  return evolve_tmsv(moments(d), v, chi);
}

// Closed-form purity of the evolved state:
// 1 / (Var(sqrt(eta)) v (v-1) + v (1 - <sqrt(eta)>^2) + <sqrt(eta)>^2).
inline double purity_closed_form(const ChannelMoments& m, double v) {
  return 1.0 / (m.var_sqrt() * v * (v - 1.0) + v * (1.0 - m.mean_sqrt_sq()) + m.mean_sqrt_sq());
}

struct RestrictedDistribution {
  TransmittanceDistribution distribution;
  double success_probability = 0.0;  // mass of the kept region before renormalization
};

// Keep sub-channels with eta in [eta_min, eta_max] and renormalize.
inline RestrictedDistribution restrict(const TransmittanceDistribution& d, double eta_min,
                                       double eta_max = 1.0) {
  if (eta_min > eta_max) throw std::invalid_argument("post-selection region is inverted");
  std::vector<TransmittanceBin> kept;
  double mass = 0.0;
  for (const auto& b : d.bins()) {
    if (b.eta >= eta_min && b.eta <= eta_max) {
      kept.push_back(b);
      mass += b.p;
    }
  }
  if (kept.empty() || mass <= 0.0) {
    throw empty_selection_error("post-selection region contains no probability mass");
  }
  for (auto& b : kept) b.p /= mass;
  return {TransmittanceDistribution(std::move(kept), d.delta_eta(), d.provenance()), mass};
}

// Histogram of samples on a uniform grid of n_bins over [0,1]; bin centers
// represent the sub-channels, empty bins are dropped.
inline TransmittanceDistribution from_samples(std::span<const double> samples, int n_bins,
                                              Provenance provenance = Provenance::empirical) {
  if (samples.empty()) throw std::domain_error("no transmittance samples given");
  if (n_bins < 1) throw std::invalid_argument("number of bins must be positive");
  std::vector<std::int64_t> counts(n_bins, 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double s = samples[i];
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::domain_error("transmittance sample out of [0,1] at index " + std::to_string(i));
    }
    const int k = std::min(static_cast<int>(s * n_bins), n_bins - 1);
    ++counts[k];
  }
  std::vector<TransmittanceBin> bins;
  const double width = 1.0 / n_bins;
  for (int k = 0; k < n_bins; ++k) {
    if (counts[k] > 0) {
      bins.push_back({(k + 0.5) * width, static_cast<double>(counts[k]) / samples.size()});
    }
  }
  return TransmittanceDistribution(std::move(bins), width, provenance);
}

// Fixed attenuation in series with the fading channel: eta -> t * eta.
inline TransmittanceDistribution compose_fixed_loss(const TransmittanceDistribution& d, double t) {
  if (t < 0.0 || t > 1.0) throw std::domain_error("fixed loss transmittance must lie in [0,1]");
  std::map<double, double> merged;  // scaled positions may coincide when t == 0
  for (const auto& b : d.bins()) merged[t * b.eta] += b.p;
  std::vector<TransmittanceBin> bins;
  bins.reserve(merged.size());
  for (const auto& [eta, p] : merged) bins.push_back({eta, p});
  const double width = t > 0.0 ? t * d.delta_eta() : d.delta_eta();
  return TransmittanceDistribution(std::move(bins), width, d.provenance());
}

// Two-point distribution {eta_low, 1} realizing given first moments of
// sqrt(eta); useful to scan security thresholds over Var(sqrt(eta)).
inline TransmittanceDistribution two_point_from_moments(double mean_sqrt, double var_sqrt,
                                                        double delta_eta = 1e-6) {
  if (!(mean_sqrt > 0.0 && mean_sqrt <= 1.0)) {
    throw std::domain_error("mean of sqrt(eta) must lie in (0,1]");
  }
  if (var_sqrt < 0.0 || var_sqrt > mean_sqrt * (1.0 - mean_sqrt) + 1e-15) {
    throw std::domain_error("requested Var(sqrt(eta)) is not attainable on [0,1]");
  }
  if (var_sqrt <= 0.0) {
    return TransmittanceDistribution::single(mean_sqrt * mean_sqrt, delta_eta);
  }
  const double q = var_sqrt / ((1.0 - mean_sqrt) * (1.0 - mean_sqrt) + var_sqrt);  // mass at 1
  const double m2 = mean_sqrt * mean_sqrt + var_sqrt;
  const double s_low = std::max(0.0, (m2 - q) / (mean_sqrt - q));
  return TransmittanceDistribution({{s_low * s_low, 1.0 - q}, {1.0, q}}, delta_eta,
                                   Provenance::model);
}

}  // namespace fadecv
