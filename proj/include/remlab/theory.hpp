#pragma once

#include <string_view>

namespace remlab {

enum class Regime { high_temperature, critical, low_temperature };

std::string_view to_string(Regime regime);

struct PhaseDiagnosis {
  double beta;
  double beta_critical;
  Regime regime;
};

/// Real number or a distinguished +infinity ("outside the effective domain").
class ExtendedReal {
 public:
  static ExtendedReal finite(double value) { return ExtendedReal(value, false); }
  static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  /// Throws std::logic_error when infinite.
  double value() const;
  /// IEEE view: +inf when infinite.
  double to_double() const noexcept;

  friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  ExtendedReal(double value, bool infinite) : value_(value), infinite_(infinite) {}
  double value_;
  bool infinite_;
};

/// (alpha log 2)^((alpha-1)/alpha); exactly 1 at alpha = 1.
double critical_beta(double alpha);

/// Almost-sure limit of (1/N) log Z_N(beta).
///
/// alpha = 1: log 2 for beta <= 1 and beta log 2 above. alpha > 1:
/// log 2 + (alpha-1)/alpha beta^(alpha/(alpha-1)) up to critical_beta, then
/// beta (alpha log 2)^(1/alpha).
double free_energy_limit(double alpha, double beta);

PhaseDiagnosis diagnose_phase(double alpha, double beta);

/// Large-deviation rate of the energy-per-spin measure: |x|^alpha / alpha on
/// [-(alpha log 2)^(1/alpha), (alpha log 2)^(1/alpha)], infinite outside.
ExtendedReal rate_function(double alpha, double x);

/// Limit law of the number of configurations with -(H + a_N) >= b:
/// exp(-e^-b) e^(-k b) / k!.
double poisson_count_pmf(double b, unsigned k);

/// a_N = (N - 1) log 2.
double shift_constant(int n);

/// Exact E[exp(order * beta * H) 1{H <= delta N}] under the alpha in {1, 2}
/// environment of size n. delta may be +infinity (untruncated moment).
double truncated_exp_moment(int alpha, double beta, double delta, int n, int order);

}  // namespace remlab
