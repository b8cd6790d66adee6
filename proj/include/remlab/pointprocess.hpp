#pragma once

#include <cstddef>
#include <vector>

#include "remlab/random.hpp"

namespace remlab {

/// Finite element of the space of nonincreasing nonnegative sequences with
/// sum at most one. `deficit` is the mass the representation leaves out
/// (truncated sticks, unresolved point-process tail); entries + deficit = 1
/// for sampler output.
struct WeightSequence {
  std::vector<double> entries;
  double deficit = 0.0;

  double sum() const noexcept;
};

/// Nonincreasing, nonnegative, sum <= 1 + tolerance.
bool in_sequence_space(const WeightSequence& w, double tolerance = 1e-9);

/// Parameters of the PD(m, 0) Poisson construction.
struct PDParams {
  double m = 0.5;
  /// Initial lower cutoff b of the intensity e^{-x} dx process.
  double truncation_b = 0.0;
  /// Refinement stops once the expected mass still below the cutoff is this
  /// small relative to the mass collected.
  double epsilon_mass = 1e-6;
  /// Point budget. When refinement would exceed it, the expected remaining
  /// mass is reported as the sequence deficit instead of being resolved.
  std::size_t max_points = std::size_t{1} << 22;
};

/// Throws std::invalid_argument unless 0 < m < 1, epsilon_mass in (0, 1),
/// truncation_b finite and max_points >= 1.
void validate(const PDParams& params);

/// Points of the Poisson process with intensity e^{-x} dx on
/// [truncation_b, inf), sorted descending.
std::vector<double> sample_poisson_points(const PDParams& params, CounterStream& stream);

/// v_i = e^{beta c_i} / sum_j e^{beta c_j} over the Poisson points c_i,
/// with the cutoff lowered one unit at a time until the expected unresolved
/// mass is below epsilon_mass. Requires beta > 1 and params.m == 1/beta.
WeightSequence sample_pd_poisson(double beta, const PDParams& params, CounterStream& stream);

/// Stick breaking: V_i ~ Beta(1 - m, i m), stick_i = V_i prod_{j<i} (1 - V_j),
/// first `length` sticks sorted descending; the unbroken remainder is the
/// deficit.
WeightSequence sample_pd_stick(double m, std::size_t length, CounterStream& stream);

/// sum_i |x_i - y_i| with the shorter sequence padded by zeros.
double l1_distance(const WeightSequence& x, const WeightSequence& y);

}  // namespace remlab
