#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "remlab/random.hpp"

namespace remlab {

/// Open interval (lo, hi) on the extended real line. Endpoints may be
/// infinite; lo < hi is enforced at construction.
class OpenInterval {
 public:
  OpenInterval(double lo, double hi);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  bool contains(double x) const noexcept { return lo_ < x && x < hi_; }

  /// inf |x| over the interval.
  double inf_abs() const noexcept;
  /// sup |x| over the interval (may be infinite).
  double sup_abs() const noexcept;

  friend bool operator==(const OpenInterval&, const OpenInterval&) = default;

 private:
  double lo_;
  double hi_;
};

std::string to_string(const OpenInterval& interval);

/// Energy law of one configuration: density
///   C_{alpha,N} exp(-|x|^alpha / (alpha N^(alpha-1))),
/// the double exponential at alpha = 1 and Gaussian(0, N) at alpha = 2.
class Environment {
 public:
  /// Throws std::invalid_argument unless alpha >= 1 (finite) and n >= 1.
  Environment(double alpha, int n);

  double alpha() const noexcept { return alpha_; }
  int n() const noexcept { return n_; }

  bool is_double_exponential() const noexcept { return alpha_ == 1.0; }
  bool is_gaussian() const noexcept { return alpha_ == 2.0; }

  friend bool operator==(const Environment&, const Environment&) = default;

 private:
  double alpha_;
  int n_;
};

double normalizing_constant(const Environment& env);

double density(const Environment& env, double x);

/// Closed form for alpha in {1, 2}; regularized upper incomplete gamma
/// otherwise.
double cdf(const Environment& env, double x);

/// P(H > t) for t >= 0, computed without cancellation.
double upper_tail(const Environment& env, double t);

/// q_N = P(H/N in interval).
double interval_probability(const Environment& env, const OpenInterval& interval);

/// One energy draw from `stream`.
///
/// alpha = 1 consumes one 64-bit word (inverse CDF), alpha = 2 two words
/// (Box-Muller, cosine branch). Other alpha use |X| = (alpha N^(alpha-1) G)^(1/alpha)
/// with G ~ Gamma(1/alpha, 1) and an independent fair sign.
double sample_energy(const Environment& env, CounterStream& stream);

/// Inverse CDF of the double exponential for u in (0, 1).
inline double laplace_from_uniform(double u) {
  return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
}

}  // namespace remlab
