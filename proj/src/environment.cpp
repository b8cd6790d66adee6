#include "remlab/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace remlab {

OpenInterval::OpenInterval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
    throw std::invalid_argument("open interval requires lo < hi");
  }
}

double OpenInterval::inf_abs() const noexcept {
  if (lo_ < 0.0 && hi_ > 0.0) {
    return 0.0;
  }
  return std::min(std::abs(lo_), std::abs(hi_));
}

double OpenInterval::sup_abs() const noexcept { return std::max(std::abs(lo_), std::abs(hi_)); }

std::string to_string(const OpenInterval& interval) {
  std::ostringstream out;
  out << '(' << interval.lo() << ", " << interval.hi() << ')';
  return out.str();
}

Environment::Environment(double alpha, int n) : alpha_(alpha), n_(n) {
  if (!std::isfinite(alpha) || alpha < 1.0) {
    throw std::invalid_argument("environment alpha must be a finite real >= 1");
  }
  if (n < 1) {
    throw std::invalid_argument("environment n must be >= 1");
  }
}

namespace {

// alpha N^(alpha-1): the scale dividing |x|^alpha in the exponent.
double exponent_scale(const Environment& env) {
  return env.alpha() * std::pow(static_cast<double>(env.n()), env.alpha() - 1.0);
}

double gamma_tail(const Environment& env, double t) {
  return 0.5 * boost::math::gamma_q(1.0 / env.alpha(), std::pow(t, env.alpha()) / exponent_scale(env));
}

}  // namespace

double normalizing_constant(const Environment& env) {
  const double alpha = env.alpha();
  if (alpha == 1.0) {
    return 0.5;
  }
  return std::pow(alpha / env.n(), (alpha - 1.0) / alpha) / (2.0 * std::tgamma(1.0 / alpha));
}

double density(const Environment& env, double x) {
  const double ax = std::abs(x);
  if (env.is_double_exponential()) {
    return 0.5 * std::exp(-ax);
  }
  return normalizing_constant(env) * std::exp(-std::pow(ax, env.alpha()) / exponent_scale(env));
}

double upper_tail(const Environment& env, double t) {
  if (t < 0.0) {
    throw std::invalid_argument("upper_tail requires t >= 0");
  }
  if (std::isinf(t)) {
    return 0.0;
  }
  if (env.is_double_exponential()) {
    return 0.5 * std::exp(-t);
  }
  if (env.is_gaussian()) {
    return 0.5 * std::erfc(t / std::sqrt(2.0 * env.n()));
  }
  return gamma_tail(env, t);
}

double cdf(const Environment& env, double x) {
  if (std::isnan(x)) {
    throw std::invalid_argument("cdf of NaN");
  }
  if (x < 0.0) {
    return upper_tail(env, -x);
  }
  return 1.0 - upper_tail(env, x);
}

double interval_probability(const Environment& env, const OpenInterval& interval) {
  const double n = env.n();
  const double a = interval.lo() * n;
  const double b = interval.hi() * n;
  if (a >= 0.0) {
    if (env.is_double_exponential()) {
      // (1/2)(e^-a - e^-b) without cancellation.
      return std::isinf(b) ? 0.5 * std::exp(-a) : -0.5 * std::exp(-a) * std::expm1(-(b - a));
    }
    return upper_tail(env, a) - upper_tail(env, b);
  }
  if (b <= 0.0) {
    if (env.is_double_exponential()) {
      return std::isinf(a) ? 0.5 * std::exp(b) : -0.5 * std::exp(b) * std::expm1(-(b - a));
    }
    return upper_tail(env, -b) - upper_tail(env, -a);
  }
  // Straddles 0: sum the two half masses directly, 1 - T(-a) - T(b) cancels.
  if (env.is_double_exponential()) {
    return -0.5 * std::expm1(a) - 0.5 * std::expm1(-b);
  }
  if (env.is_gaussian()) {
    const double scale = std::sqrt(2.0 * n);
    return 0.5 * std::erf(-a / scale) + 0.5 * std::erf(b / scale);
  }
  return 1.0 - upper_tail(env, -a) - upper_tail(env, b);
}

double sample_energy(const Environment& env, CounterStream& stream) {
  if (env.is_double_exponential()) {
    return laplace_from_uniform(stream.uniform());
  }
  if (env.is_gaussian()) {
    const double u1 = stream.uniform();
    const double u2 = stream.uniform();
    return std::sqrt(static_cast<double>(env.n())) * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  const double alpha = env.alpha();
  std::gamma_distribution<double> gamma(1.0 / alpha, 1.0);
  const double g = gamma(stream);
  const double magnitude = std::pow(exponent_scale(env) * g, 1.0 / alpha);
  return stream.uniform() < 0.5 ? -magnitude : magnitude;
}

}  // namespace remlab
