#include "remlab/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace remlab {

namespace {

void require_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < 1.0) {
    throw std::invalid_argument("alpha must be a finite real >= 1");
  }
}

void require_beta(double beta) {
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw std::invalid_argument("beta must be a finite real > 0");
  }
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::high_temperature:
      return "high_temperature";
    case Regime::critical:
      return "critical";
    case Regime::low_temperature:
      return "low_temperature";
  }
  return "unknown";
}

double ExtendedReal::value() const {
  if (infinite_) {
    throw std::logic_error("ExtendedReal is infinite");
  }
  return value_;
}

double ExtendedReal::to_double() const noexcept {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

double critical_beta(double alpha) {
  require_alpha(alpha);
  if (alpha == 1.0) {
    return 1.0;
  }
  return std::pow(alpha * std::numbers::ln2, (alpha - 1.0) / alpha);
}

double free_energy_limit(double alpha, double beta) {
  require_alpha(alpha);
  require_beta(beta);
  constexpr double ln2 = std::numbers::ln2;
  if (alpha == 1.0) {
    return beta <= 1.0 ? ln2 : beta * ln2;
  }
  if (beta <= critical_beta(alpha)) {
    return ln2 + (alpha - 1.0) / alpha * std::pow(beta, alpha / (alpha - 1.0));
  }
  return beta * std::pow(alpha * ln2, 1.0 / alpha);
}

PhaseDiagnosis diagnose_phase(double alpha, double beta) {
  require_beta(beta);
  const double bc = critical_beta(alpha);
  Regime regime = Regime::critical;
  if (beta < bc) {
    regime = Regime::high_temperature;
  } else if (beta > bc) {
    regime = Regime::low_temperature;
  }
  return {beta, bc, regime};
}

ExtendedReal rate_function(double alpha, double x) {
  require_alpha(alpha);
  if (std::isnan(x)) {
    throw std::invalid_argument("rate_function of NaN");
  }
  const double ax = std::abs(x);
  const double edge = alpha == 1.0 ? std::numbers::ln2 : std::pow(alpha * std::numbers::ln2, 1.0 / alpha);
  if (ax > edge) {
    return ExtendedReal::infinity();
  }
  return ExtendedReal::finite(alpha == 1.0 ? ax : std::pow(ax, alpha) / alpha);
}

double poisson_count_pmf(double b, unsigned k) {
  if (std::isnan(b)) {
    throw std::invalid_argument("poisson_count_pmf of NaN level");
  }
  const double kk = k;
  return std::exp(-std::exp(-b) - kk * b - std::lgamma(kk + 1.0));
}

double shift_constant(int n) {
  if (n < 1) {
    throw std::invalid_argument("shift_constant requires n >= 1");
  }
  return (n - 1) * std::numbers::ln2;
}

double truncated_exp_moment(int alpha, double beta, double delta, int n, int order) {
  if (alpha != 1 && alpha != 2) {
    throw std::invalid_argument("truncated_exp_moment is defined for alpha in {1, 2}");
  }
  require_beta(beta);
  if (!(delta > 0.0)) {
    throw std::invalid_argument("delta must be > 0");
  }
  if (n < 1) {
    throw std::invalid_argument("n must be >= 1");
  }
  if (order != 1 && order != 2) {
    throw std::invalid_argument("order must be 1 or 2");
  }
  const double gamma = order * beta;
  const double cut = delta * n;  // may be +inf
  if (alpha == 1) {
    if (gamma == 1.0) {
      return 0.25 + 0.5 * cut;
    }
    // (1/2)/(1+g) + (1 - e^{(g-1) cut}) / (2 (1-g))
    return 0.5 / (1.0 + gamma) - std::expm1((gamma - 1.0) * cut) / (2.0 * (1.0 - gamma));
  }
  const double nn = n;
  return std::exp(gamma * gamma * nn / 2.0) * standard_normal_cdf((delta - gamma) * std::sqrt(nn));
}

}  // namespace remlab
