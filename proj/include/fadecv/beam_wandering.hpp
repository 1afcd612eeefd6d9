#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "fadecv/channel.hpp"
#include "fadecv/common.hpp"

namespace fadecv {

// Gaussian beam of spot radius w whose center wanders around a circular
// aperture of radius a with per-axis standard deviation sigma_b. Lengths are
// dimensionless; a = 1 is the canonical normalization.
struct BeamGeometry {
  double a = 1.0;
  double w = 1.0;
  double sigma_b = 0.0;

  void validate() const {
    if (!(a > 0.0)) throw std::domain_error("aperture radius must be positive");
    if (!(w > 0.0)) throw std::domain_error("beam spot radius must be positive");
    if (sigma_b < 0.0) throw std::domain_error("beam wander deviation must be non-negative");
  }
};

// Transmittance of a centered beam, the cut of the fading distribution:
// 1 - exp(-2 a^2 / w^2).
inline double max_transmittance(const BeamGeometry& g) {
  g.validate();
  return -std::expm1(-2.0 * g.a * g.a / (g.w * g.w));
}

namespace detail {

// exp(-x) I0(x) for x >= 0. Power series below 50 (all terms positive, no
// cancellation), asymptotic expansion above.
inline double bessel_i0_scaled(double x) {
  if (x < 50.0) {
    const double q = x * x / 4.0;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::exp(-x) * sum;
  }
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 10; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd / (8.0 * k * x);
    sum += term;
  }
  return sum / std::sqrt(2.0 * 3.14159265358979323846 * x);
}

}  // namespace detail

// Overlap of the normalized beam intensity profile (2/(pi w^2)) exp(-2 r^2/w^2)
// with the aperture disk, for a beam center offset d from the aperture center.
// Polar coordinates about the aperture center; the angular integral is
// analytic (2 pi I0), the radial one is evaluated by adaptive Gauss-Kronrod
// to absolute tolerance 1e-8.
inline double transmittance_at_offset(const BeamGeometry& g, double d) {
  g.validate();
  if (d < 0.0) throw std::domain_error("beam offset must be non-negative");
  const double w2 = g.w * g.w;
  const auto radial = [&](double r) {
    const double dr = r - d;
    return r * std::exp(-2.0 * dr * dr / w2) * detail::bessel_i0_scaled(4.0 * r * d / w2);
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      radial, 0.0, g.a, 12, 1e-12, &error);
  const double t = 4.0 / w2 * value;
  if (4.0 / w2 * error > 1e-8 * std::max(1.0, std::abs(t))) {
    throw numeric_error("aperture overlap quadrature reached only " +
                        std::to_string(4.0 / w2 * error));
  }
  return std::min(t, 1.0);
}

namespace detail {

inline std::vector<std::int64_t> sample_histogram_counts(const BeamGeometry& g,
                                                         std::int64_t n_samples, int n_bins,
                                                         std::uint64_t seed, int worker) {
  std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(worker)};
  std::mt19937_64 rng(sseq);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::vector<std::int64_t> counts(n_bins, 0);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    double r = 0.0;
    if (g.sigma_b > 0.0) {
      const double dx = g.sigma_b * unit_normal(rng);
      const double dy = g.sigma_b * unit_normal(rng);
      r = std::hypot(dx, dy);
    }
    const double t = transmittance_at_offset(g, r);
    const int k = std::min(static_cast<int>(t * n_bins), n_bins - 1);
    ++counts[k];
  }
  return counts;
}

}  // namespace detail

// Monte Carlo transmittance distribution of the wandering beam: offsets drawn
// from the 2D isotropic Gaussian, overlap evaluated exactly, histogram on a
// uniform n_bins grid. Bit-reproducible for a fixed (seed, n_workers) pair;
// worker histograms are integer counts, so the merge is order-independent.
inline TransmittanceDistribution sample_distribution(const BeamGeometry& g,
                                                     std::int64_t n_samples, int n_bins,
                                                     std::uint64_t seed, int n_workers = 1) {
  g.validate();
  if (n_samples < 1) throw std::domain_error("need at least one sample");
  if (n_bins < 1) throw std::invalid_argument("number of bins must be positive");
  n_workers = std::clamp<int>(n_workers, 1, 256);
  if (n_workers > n_samples) n_workers = static_cast<int>(n_samples);

  std::vector<std::vector<std::int64_t>> partial(n_workers);
  if (n_workers == 1) {
    partial[0] = detail::sample_histogram_counts(g, n_samples, n_bins, seed, 0);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t base = n_samples / n_workers;
    const std::int64_t extra = n_samples % n_workers;
    for (int w = 0; w < n_workers; ++w) {
      const std::int64_t chunk = base + (w < extra ? 1 : 0);
      pool.emplace_back([&, w, chunk] {
        partial[w] = detail::sample_histogram_counts(g, chunk, n_bins, seed, w);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<std::int64_t> counts(n_bins, 0);
  for (const auto& part : partial) {
    for (int k = 0; k < n_bins; ++k) counts[k] += part[k];
  }
  std::vector<TransmittanceBin> bins;
  const double width = 1.0 / n_bins;
  for (int k = 0; k < n_bins; ++k) {
    if (counts[k] > 0) {
      bins.push_back({(k + 0.5) * width, static_cast<double>(counts[k]) / n_samples});
    }
  }
  return TransmittanceDistribution(std::move(bins), width, Provenance::model);
}

}  // namespace fadecv
