#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fadecv {

// Shot-noise units throughout: vacuum quadrature variance = 1.
inline constexpr double kPhysicalTol = 1e-9;

// A symmetric second-moment matrix violates the uncertainty relation.
class unphysical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Post-selection region contains no probability mass.
class empty_selection_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A finite-ensemble run retained no data points.
class empty_ensemble_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine failed to reach its target tolerance.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Compensated (Neumaier) accumulator; keeps merged moment sums exact enough
// to be independent of accumulation grouping.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const KahanSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Parallelism cap from the environment; absent or invalid means serial.
inline int env_thread_cap() {
  const char* v = std::getenv("FADECV_THREADS");
  if (v == nullptr) return 1;
  const int n = std::atoi(v);
  return n > 0 ? n : 1;
}

}  // namespace fadecv
