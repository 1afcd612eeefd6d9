#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fadecv/channel.hpp"
#include "fadecv/common.hpp"
#include "fadecv/security.hpp"

namespace fadecv {

// Finite-ensemble simulation of the entanglement-based protocol: two
// orthogonally squeezed vacua mixed on a 50:50 beamsplitter, mode B sent
// through a per-point random transmittance plus excess noise, post-selection
// on the estimated transmittance, covariance estimation over the retained
// points.
struct SimConfig {
  double v = 1.0;
  TransmittanceDistribution channel = TransmittanceDistribution::single(1.0);
  double chi = 0.0;
  std::int64_t n_points = 1;
  double eta_min = 0.0;
  double sigma_eta = 0.0;  // estimation-error standard deviation; 0 = perfect
  std::uint64_t seed = 0;

  // v = cosh(2r) defines the squeezing parameter of the source modes.
  double squeezing() const { return 0.5 * std::acosh(v); }
  void validate() const {
    if (!(v >= 1.0)) throw std::domain_error("state variance must be >= 1");
    if (chi < 0.0) throw std::domain_error("excess noise must be non-negative");
    if (n_points < 1) throw std::domain_error("ensemble size must be at least 1");
    if (sigma_eta < 0.0) throw std::domain_error("estimation deviation must be non-negative");
  }
};

struct SampleCovariance {
  Eigen::Matrix4d entries = Eigen::Matrix4d::Zero();
  std::int64_t retained = 0;
  bool physical = false;
};

struct SimResult {
  SampleCovariance sample;
  std::optional<KeyRateReport> report;  // absent when the estimate is unphysical
};

namespace detail {

// Per-bin first and second moment sums of the retained quadrature vectors,
// compensated so that merging bins reproduces a straight sequential sum.
struct BinAccumulator {
  std::int64_t count = 0;
  std::array<KahanSum, 4> sum;
  std::array<KahanSum, 10> prod;  // upper triangle, row-major

  void add(const std::array<double, 4>& q) {
    ++count;
    int t = 0;
    for (int i = 0; i < 4; ++i) {
      sum[i].add(q[i]);
      for (int j = i; j < 4; ++j) prod[t++].add(q[i] * q[j]);
    }
  }
};

struct Accumulation {
  std::vector<BinAccumulator> per_bin;
  std::int64_t total = 0;
};

inline Accumulation run_ensemble(const SimConfig& cfg) {
  cfg.validate();
  const double r = cfg.squeezing();
  const double squeezed = std::exp(-r);
  const double antisqueezed = std::exp(r);
  const double half = std::sqrt(0.5);
  const double noise = cfg.chi > 0.0 ? std::sqrt(cfg.chi) : 0.0;

  const auto bins = cfg.channel.bins();
  std::vector<double> cumulative(bins.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    mass += bins[i].p;
    cumulative[i] = mass;
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Accumulation acc;
  acc.per_bin.resize(bins.size());
  acc.total = cfg.n_points;
  for (std::int64_t i = 0; i < cfg.n_points; ++i) {
    // source: mode 1 squeezed in x, mode 2 squeezed in p
    const double x1 = squeezed * unit_normal(rng);
    const double p1 = antisqueezed * unit_normal(rng);
    const double x2 = antisqueezed * unit_normal(rng);
    const double p2 = squeezed * unit_normal(rng);
    double xa = half * x1 + half * x2;
    double pa = half * p1 + half * p2;
    double xb = -half * x1 + half * x2;
    double pb = -half * p1 + half * p2;

    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), uniform(rng) * mass);
    const std::size_t bin =
        std::min<std::size_t>(it - cumulative.begin(), bins.size() - 1);
    const double eta_estimated = bins[bin].eta;
    double eta_actual = eta_estimated;
    if (cfg.sigma_eta > 0.0) {
      eta_actual = std::clamp(eta_estimated + cfg.sigma_eta * unit_normal(rng), 0.0, 1.0);
    }

    const double t = std::sqrt(eta_actual);
    const double rr = std::sqrt(1.0 - eta_actual);
    xb = t * xb + rr * unit_normal(rng);
    pb = t * pb + rr * unit_normal(rng);
    if (noise > 0.0) {
      xb += noise * unit_normal(rng);
      pb += noise * unit_normal(rng);
    }
    acc.per_bin[bin].add({xa, pa, xb, pb});
  }
  return acc;
}

// Sample covariance (population normalization) over the bins with
// eta >= eta_min; selection is keyed on the estimated transmittance.
inline SampleCovariance covariance_of_region(const Accumulation& acc,
                                             const TransmittanceDistribution& channel,
                                             double eta_min) {
  const auto bins = channel.bins();
  std::array<KahanSum, 4> sum;
  std::array<KahanSum, 10> prod;
  std::int64_t n = 0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (bins[b].eta < eta_min) continue;
    const auto& cell = acc.per_bin[b];
    n += cell.count;
    for (int i = 0; i < 4; ++i) sum[i].merge(cell.sum[i]);
    for (int t = 0; t < 10; ++t) prod[t].merge(cell.prod[t]);
  }
  SampleCovariance out;
  out.retained = n;
  if (n == 0) return out;
  std::array<double, 4> mean{};
  for (int i = 0; i < 4; ++i) mean[i] = sum[i].value() / n;
  int t = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j, ++t) {
      const double cov = prod[t].value() / n - mean[i] * mean[j];
      out.entries(i, j) = cov;
      out.entries(j, i) = cov;
    }
  }
  out.physical =
      symplectic_eigenvalues(CovarianceMatrix(out.entries)).back() >= 1.0 - kPhysicalTol;
  return out;
}

inline std::optional<KeyRateReport> report_for_sample(const SampleCovariance& sample,
                                                      const TransmittanceDistribution& channel,
                                                      double eta_min, std::int64_t total) {
  if (!sample.physical) return std::nullopt;
  std::optional<ChannelMoments> m;
  try {
    m = moments(restrict(channel, eta_min).distribution);
  } catch (const empty_selection_error&) {
    m = std::nullopt;
  }
  try {
    return key_rate_from_covariance(CovarianceMatrix(sample.entries),
                                    static_cast<double>(sample.retained) / total, m);
  } catch (const unphysical_error&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline SimResult simulate(const SimConfig& cfg) {
  const auto acc = detail::run_ensemble(cfg);
  SimResult result;
  result.sample = detail::covariance_of_region(acc, cfg.channel, cfg.eta_min);
  if (result.sample.retained == 0) {
    throw empty_ensemble_error("post-selection retained no data points");
  }
  result.report =
      detail::report_for_sample(result.sample, cfg.channel, cfg.eta_min, acc.total);
  return result;
}

struct ImperfectEstimationResult {
  double eta_min = 0.0;
  KeyRateReport report;
  std::int64_t retained = 0;
};

// Channel estimation errors: the physics uses transmittances randomized
// around the estimated values, while post-selection and the reconstructed
// matrix are keyed on the estimates. Returns the region start maximizing the
// weighted key over the single simulated ensemble.
inline ImperfectEstimationResult simulate_imperfect_estimation(const SimConfig& cfg) {
  if (!(cfg.sigma_eta > 0.0)) {
    throw std::domain_error("imperfect estimation requires sigma_eta > 0");
  }
  const auto acc = detail::run_ensemble(cfg);

  std::vector<double> candidates;
  candidates.push_back(0.0);
  const double half = cfg.channel.delta_eta() / 2.0;
  for (const auto& b : cfg.channel.bins()) candidates.push_back(std::max(0.0, b.eta - half));

  std::optional<ImperfectEstimationResult> best;
  for (const double start : candidates) {
    const auto sample = detail::covariance_of_region(acc, cfg.channel, start);
    if (sample.retained == 0) continue;
    const auto report = detail::report_for_sample(sample, cfg.channel, start, acc.total);
    if (!report) continue;
    if (!best || report->k_weighted > best->report.k_weighted) {
      best = ImperfectEstimationResult{start, *report, sample.retained};
    }
  }
  if (!best) throw empty_ensemble_error("no post-selection region gave a physical estimate");
  return *best;
}

}  // namespace fadecv
