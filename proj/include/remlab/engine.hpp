#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "remlab/environment.hpp"
#include "remlab/random.hpp"

namespace remlab {

/// Largest system size the streaming engine accepts (2^30 configurations).
inline constexpr int kMaxSystemSize = 30;
/// Largest marginal block size; the marginal table holds 2^K entries per beta.
inline constexpr int kMaxMarginalBlock = 20;

/// Everything needed to regenerate and reduce one replica.
///
/// Configuration sigma is the bit pattern of its index: bit j is spin j,
/// 0 -> -1 and 1 -> +1. The marginal block is the low `k_marginal` bits.
struct ReplicaSpec {
  Environment env{1.0, 1};
  std::vector<double> betas{1.0};
  int k_marginal = 0;
  std::vector<OpenInterval> intervals;
  std::vector<double> b_levels;
  std::size_t top_m = 1024;
  std::uint64_t master_seed = 0;
  std::uint64_t replica_id = 0;
};

/// Throws std::invalid_argument when the spec breaks an engine precondition.
void validate(const ReplicaSpec& spec);

/// Descending Gibbs weights truncated to top_m, plus the mass left out.
struct GibbsSpectrum {
  std::vector<double> weights;
  double tail_mass = 0.0;
};

struct ReplicaResult {
  int n = 0;
  std::vector<double> betas;
  std::vector<double> log_z;                   // per beta
  std::vector<GibbsSpectrum> spectrum;         // per beta
  std::vector<std::vector<double>> marginal;   // per beta, 2^K entries
  std::vector<OpenInterval> intervals;
  std::vector<std::uint64_t> interval_hits;    // per interval
  std::vector<double> b_levels;
  std::vector<std::uint64_t> exceedance;       // per b level
  /// Descending values of -(H + a_N) at or above min(b_levels). Dropped
  /// (and `exceedance_values_complete` cleared) past kMaxStoredExceedances.
  std::vector<double> exceedance_values;
  bool exceedance_values_complete = true;
  double min_energy = 0.0;

  const std::vector<double>& marginal_for(double beta) const;
  const GibbsSpectrum& spectrum_for(double beta) const;
  double log_z_for(double beta) const;
};

inline constexpr std::size_t kMaxStoredExceedances = std::size_t{1} << 20;

/// Fills out[j] with the energy of configuration first + j.
using EnergySource = std::function<void(std::uint64_t first, std::span<double> out)>;

struct RunOptions {
  /// Worker threads used inside this replica. Results do not depend on it.
  unsigned workers = 1;
};

/// Energy of configuration `index`; a pure function of
/// (master_seed, replica_id, index) and the environment.
double energy_at(const ReplicaSpec& spec, std::uint64_t index);

/// Energies of configurations [first, first + out.size()), bit-identical to
/// energy_at.
void fill_energies(const ReplicaSpec& spec, std::uint64_t first, std::span<double> out);

/// Online log(sum exp(v_i)) with a running maximum.
class LogSumExp {
 public:
  void add(double value);
  /// Folds in a partial sum represented as shift + log(scaled_sum).
  void add_scaled(double shift, double scaled_sum);
  bool empty() const noexcept { return empty_; }
  /// Throws std::logic_error on an empty stream.
  double value() const;

 private:
  double shift_ = 0.0;
  double sum_ = 0.0;
  bool empty_ = true;
};

/// Throws std::invalid_argument on an empty input.
double log_sum_exp_stream(std::span<const double> values);

/// Single streaming pass over all 2^N configurations.
ReplicaResult run_replica(const ReplicaSpec& spec, RunOptions options = {});

/// Same reduction over caller-supplied energies (pinned tables, shifted
/// environments). The generator in `spec` is ignored.
ReplicaResult run_replica(const ReplicaSpec& spec, const EnergySource& energies,
                          RunOptions options = {});

/// log_z(beta) / N. Throws std::invalid_argument for a beta not in the spec.
double free_energy(const ReplicaResult& result, double beta);

/// -(1/N) log(hits / 2^N), or nullopt when the interval was never hit
/// (an estimate of +infinity).
std::optional<double> rate_estimate(const ReplicaResult& result, const OpenInterval& interval);

std::uint64_t exceedance_count(const ReplicaResult& result, double b);

/// Second pass: descending values -(H + a_N) >= b.
std::vector<double> exceedance_positions(const ReplicaSpec& spec, double b);

}  // namespace remlab
