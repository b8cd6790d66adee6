#pragma once

#include <string>
#include <vector>

namespace remlab {

enum class Relation { less, less_equal, greater, greater_equal };

/// One exact evaluation checked against a closed-form bound.
struct BoundCheck {
  std::string name;
  double alpha = 1.0;
  double beta = 0.0;   // 0 for the interval bounds
  double delta = 0.0;
  int n = 0;
  double lo = 0.0;     // interval endpoints, interval bounds only
  double hi = 0.0;
  double exact = 0.0;
  double bound = 0.0;
  Relation relation = Relation::less_equal;

  bool holds() const noexcept;
};

std::string_view to_string(Relation relation);

/// Interval sandwich bounds on q_N at alpha = 1 over a grid of intervals
/// (including ones straddling 0 and with infinite ends), N in {1, 5, 10, 20}
/// and delta at fixed fractions of M - m.
std::vector<BoundCheck> interval_bound_grid();

/// Truncated exponential moment bounds over the admissible (beta, delta)
/// ranges: at alpha = 1, beta in (0, 1) with delta > log 2 (and
/// delta < log 2 / (2 beta - 1) above beta = 1/2); at alpha = 2, beta in
/// (0, sqrt(2 log 2)) with delta = 2 sqrt(log 2) or inside
/// (sqrt(2 log 2), 2 beta - sqrt(2 (beta^2 - log 2))). N in {10, 20, 40}.
std::vector<BoundCheck> moment_bound_grid();

}  // namespace remlab
