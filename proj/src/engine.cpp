#include "remlab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "energy_kernel.hpp"
#include "remlab/theory.hpp"

namespace remlab {

namespace {

constexpr std::size_t kSubChunk = 4096;
constexpr int kMinBlockBits = 16;

struct Candidate {
  double energy;
  std::uint64_t index;
};

bool lower_energy(const Candidate& a, const Candidate& b) {
  return a.energy < b.energy || (a.energy == b.energy && a.index < b.index);
}

// Keeps the `limit` lowest candidates, sorted ascending.
void keep_lowest(std::vector<Candidate>& candidates, std::size_t limit) {
  if (candidates.size() > limit) {
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(limit),
                     candidates.end(), lower_energy);
    candidates.resize(limit);
  }
  std::sort(candidates.begin(), candidates.end(), lower_energy);
}

// Reduction state over a contiguous run of configurations. Boltzmann sums are
// stored relative to `ref`, the lowest energy seen: sums[b] = sum exp(-beta_b (H - ref)).
struct Partial {
  bool empty = true;
  double ref = 0.0;
  std::vector<double> sums;
  std::vector<std::vector<double>> marginal;
  std::vector<Candidate> lowest;
  std::vector<std::uint64_t> hits;
  std::vector<std::uint64_t> exceed;
  std::vector<double> values;
  bool values_complete = true;
};

struct Context {
  const ReplicaSpec& spec;
  const EnergySource& energies;
  std::uint64_t marginal_mask;
  double shift;       // a_N
  double min_level;   // min(b_levels) or +inf
  bool collect_marginal;
};

Partial make_partial(const Context& ctx) {
  Partial p;
  const std::size_t nb = ctx.spec.betas.size();
  p.sums.assign(nb, 0.0);
  if (ctx.collect_marginal) {
    p.marginal.assign(nb, std::vector<double>(ctx.marginal_mask + 1, 0.0));
  }
  p.hits.assign(ctx.spec.intervals.size(), 0);
  p.exceed.assign(ctx.spec.b_levels.size(), 0);
  return p;
}

// Re-expresses the Boltzmann sums of `p` relative to a lower reference energy.
void lower_reference(Partial& p, const std::vector<double>& betas, double new_ref) {
  if (p.empty) {
    p.ref = new_ref;
    p.empty = false;
    return;
  }
  if (new_ref >= p.ref) {
    return;
  }
  for (std::size_t b = 0; b < betas.size(); ++b) {
    const double factor = std::exp(-betas[b] * (p.ref - new_ref));
    p.sums[b] *= factor;
    if (!p.marginal.empty()) {
      for (double& m : p.marginal[b]) {
        m *= factor;
      }
    }
  }
  p.ref = new_ref;
}

void process_range(const Context& ctx, std::uint64_t first, std::uint64_t count, Partial& p) {
  const ReplicaSpec& spec = ctx.spec;
  const std::size_t nb = spec.betas.size();
  const double n = spec.env.n();
  const std::size_t top_m = spec.top_m;
  const std::size_t chunk = std::min<std::uint64_t>(kSubChunk, count);
  std::vector<double> energies(chunk);
  std::vector<double> weights(chunk);
  double threshold = std::numeric_limits<double>::infinity();
  p.lowest.reserve(2 * top_m);

  for (std::uint64_t start = first; start < first + count; start += chunk) {
    ctx.energies(start, std::span<double>(energies));
    const double chunk_min = *std::min_element(energies.begin(), energies.end());
    lower_reference(p, spec.betas, chunk_min);

    for (std::size_t b = 0; b < nb; ++b) {
      p.sums[b] += detail::boltzmann_weights(energies.data(), chunk, spec.betas[b], p.ref, weights.data());
      if (ctx.collect_marginal) {
        auto& table = p.marginal[b];
        for (std::size_t j = 0; j < chunk; ++j) {
          table[(start + j) & ctx.marginal_mask] += weights[j];
        }
      }
    }

    for (std::size_t j = 0; j < chunk; ++j) {
      const double e = energies[j];
      if (e <= threshold) {
        p.lowest.push_back({e, start + j});
        if (p.lowest.size() >= 2 * top_m) {
          keep_lowest(p.lowest, top_m);
          threshold = p.lowest.back().energy;
        }
      }
    }

    if (!spec.intervals.empty()) {
      for (std::size_t j = 0; j < chunk; ++j) {
        const double per_spin = energies[j] / n;
        for (std::size_t i = 0; i < spec.intervals.size(); ++i) {
          p.hits[i] += spec.intervals[i].contains(per_spin) ? 1 : 0;
        }
      }
    }

    if (!spec.b_levels.empty()) {
      for (std::size_t j = 0; j < chunk; ++j) {
        const double x = -(energies[j] + ctx.shift);
        if (x < ctx.min_level) {
          continue;
        }
        for (std::size_t i = 0; i < spec.b_levels.size(); ++i) {
          p.exceed[i] += x >= spec.b_levels[i] ? 1 : 0;
        }
        if (p.values_complete) {
          p.values.push_back(x);
          if (p.values.size() > kMaxStoredExceedances) {
            p.values.clear();
            p.values.shrink_to_fit();
            p.values_complete = false;
          }
        }
      }
    }
  }
  keep_lowest(p.lowest, top_m);
}

void merge_into(Partial& total, Partial&& part, const ReplicaSpec& spec) {
  if (part.empty) {
    return;
  }
  if (total.empty) {
    total = std::move(part);
    return;
  }
  const double ref = std::min(total.ref, part.ref);
  lower_reference(total, spec.betas, ref);
  lower_reference(part, spec.betas, ref);
  for (std::size_t b = 0; b < total.sums.size(); ++b) {
    total.sums[b] += part.sums[b];
    if (!total.marginal.empty()) {
      auto& dst = total.marginal[b];
      const auto& src = part.marginal[b];
      for (std::size_t s = 0; s < dst.size(); ++s) {
        dst[s] += src[s];
      }
    }
  }
  total.lowest.insert(total.lowest.end(), part.lowest.begin(), part.lowest.end());
  keep_lowest(total.lowest, spec.top_m);
  for (std::size_t i = 0; i < total.hits.size(); ++i) {
    total.hits[i] += part.hits[i];
  }
  for (std::size_t i = 0; i < total.exceed.size(); ++i) {
    total.exceed[i] += part.exceed[i];
  }
  total.values_complete = total.values_complete && part.values_complete;
  if (total.values_complete) {
    total.values.insert(total.values.end(), part.values.begin(), part.values.end());
    if (total.values.size() > kMaxStoredExceedances) {
      total.values_complete = false;
    }
  }
  if (!total.values_complete) {
    total.values.clear();
  }
}

ReplicaResult finish(const ReplicaSpec& spec, Partial&& total) {
  ReplicaResult r;
  r.n = spec.env.n();
  r.betas = spec.betas;
  r.intervals = spec.intervals;
  r.b_levels = spec.b_levels;
  r.min_energy = total.ref;
  r.interval_hits = std::move(total.hits);
  r.exceedance = std::move(total.exceed);
  r.exceedance_values_complete = total.values_complete;
  r.exceedance_values = std::move(total.values);
  std::sort(r.exceedance_values.begin(), r.exceedance_values.end(), std::greater<>());

  const std::size_t nb = spec.betas.size();
  r.log_z.resize(nb);
  r.spectrum.resize(nb);
  r.marginal.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const double beta = spec.betas[b];
    const double sum = total.sums[b];
    r.log_z[b] = -beta * total.ref + std::log(sum);

    GibbsSpectrum& spectrum = r.spectrum[b];
    spectrum.weights.reserve(total.lowest.size());
    double kept = 0.0;
    for (const Candidate& c : total.lowest) {
      const double w = std::exp(-beta * (c.energy - total.ref)) / sum;
      spectrum.weights.push_back(w);
      kept += w;
    }
    spectrum.tail_mass = std::max(0.0, 1.0 - kept);

    if (total.marginal.empty()) {
      r.marginal[b] = {1.0};
    } else {
      r.marginal[b] = std::move(total.marginal[b]);
      for (double& m : r.marginal[b]) {
        m /= sum;
      }
    }
  }
  return r;
}

template <typename T>
std::size_t position_of(const std::vector<T>& values, const T& key, const char* what) {
  const auto it = std::find(values.begin(), values.end(), key);
  if (it == values.end()) {
    throw std::invalid_argument(std::string("unknown ") + what);
  }
  return static_cast<std::size_t>(it - values.begin());
}

EnergySource generator_source(const ReplicaSpec& spec) {
  return [&spec](std::uint64_t first, std::span<double> out) { fill_energies(spec, first, out); };
}

// Runs `work(block)` for every block, `workers` at a time, and hands the
// results to `consume` strictly in block order.
template <typename Work, typename Consume>
void for_each_block_ordered(std::uint64_t blocks, unsigned workers, Work&& work, Consume&& consume) {
  workers = std::max(1u, workers);
  for (std::uint64_t wave = 0; wave < blocks; wave += workers) {
    const std::uint64_t width = std::min<std::uint64_t>(workers, blocks - wave);
    std::vector<Partial> parts(width);
    if (width == 1) {
      parts[0] = work(wave);
    } else {
      std::vector<std::jthread> threads;
      threads.reserve(width);
      for (std::uint64_t t = 0; t < width; ++t) {
        threads.emplace_back([&, t] { parts[t] = work(wave + t); });
      }
    }
    for (auto& part : parts) {
      consume(std::move(part));
    }
  }
}

}  // namespace

void validate(const ReplicaSpec& spec) {
  const int n = spec.env.n();
  if (n > kMaxSystemSize) {
    throw std::invalid_argument("system size " + std::to_string(n) + " exceeds the streaming budget of " +
                                std::to_string(kMaxSystemSize));
  }
  if (spec.betas.empty()) {
    throw std::invalid_argument("beta list is empty");
  }
  for (double beta : spec.betas) {
    if (!std::isfinite(beta) || beta < 0.0) {
      throw std::invalid_argument("beta values must be finite and >= 0");
    }
  }
  if (spec.k_marginal < 0 || spec.k_marginal > n) {
    throw std::invalid_argument("marginal block size must satisfy 0 <= K <= N");
  }
  if (spec.k_marginal > kMaxMarginalBlock) {
    throw std::invalid_argument("marginal block size exceeds " + std::to_string(kMaxMarginalBlock));
  }
  if (spec.top_m < 1) {
    throw std::invalid_argument("top_m must be >= 1");
  }
  for (double b : spec.b_levels) {
    if (!std::isfinite(b)) {
      throw std::invalid_argument("exceedance levels must be finite");
    }
  }
  if (spec.replica_id > kMaxReplicaId) {
    throw std::invalid_argument("replica id out of range");
  }
}

const std::vector<double>& ReplicaResult::marginal_for(double beta) const {
  return marginal[position_of(betas, beta, "beta")];
}

const GibbsSpectrum& ReplicaResult::spectrum_for(double beta) const {
  return spectrum[position_of(betas, beta, "beta")];
}

double ReplicaResult::log_z_for(double beta) const { return log_z[position_of(betas, beta, "beta")]; }

void fill_energies(const ReplicaSpec& spec, std::uint64_t first, std::span<double> out) {
  const StreamKey key = seed_derivation(spec.master_seed, spec.replica_id, StreamLabel::energies);
  const Environment& env = spec.env;
  if (env.is_double_exponential()) {
    detail::fill_laplace(key, first, out.data(), out.size());
  } else if (env.is_gaussian()) {
    detail::fill_gaussian(key, std::sqrt(static_cast<double>(env.n())), first, out.data(), out.size());
  } else {
    for (std::size_t j = 0; j < out.size(); ++j) {
      CounterStream stream = CounterStream::for_index(key, first + j);
      out[j] = sample_energy(env, stream);
    }
  }
}

double energy_at(const ReplicaSpec& spec, std::uint64_t index) {
  const int n = spec.env.n();
  if (n > kMaxSystemSize || index >= (std::uint64_t{1} << n)) {
    throw std::out_of_range("configuration index out of range");
  }
  double value = 0.0;
  fill_energies(spec, index, std::span<double>(&value, 1));
  return value;
}

void LogSumExp::add(double value) { add_scaled(value, 1.0); }

void LogSumExp::add_scaled(double shift, double scaled_sum) {
  if (empty_) {
    shift_ = shift;
    sum_ = scaled_sum;
    empty_ = false;
    return;
  }
  if (shift > shift_) {
    sum_ = sum_ * std::exp(shift_ - shift) + scaled_sum;
    shift_ = shift;
  } else {
    sum_ += scaled_sum * std::exp(shift - shift_);
  }
}

double LogSumExp::value() const {
  if (empty_) {
    throw std::logic_error("log-sum-exp of an empty stream");
  }
  return shift_ + std::log(sum_);
}

double log_sum_exp_stream(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("log_sum_exp_stream requires a nonempty stream");
  }
  LogSumExp acc;
  for (double v : values) {
    acc.add(v);
  }
  return acc.value();
}

ReplicaResult run_replica(const ReplicaSpec& spec, RunOptions options) {
  validate(spec);
  return run_replica(spec, generator_source(spec), options);
}

ReplicaResult run_replica(const ReplicaSpec& spec, const EnergySource& energies, RunOptions options) {
  validate(spec);
  const int n = spec.env.n();
  const std::uint64_t total = std::uint64_t{1} << n;
  const int block_bits = std::min(n, std::max(kMinBlockBits, spec.k_marginal));
  const std::uint64_t block = std::uint64_t{1} << block_bits;
  const std::uint64_t blocks = total / block;

  double min_level = std::numeric_limits<double>::infinity();
  for (double b : spec.b_levels) {
    min_level = std::min(min_level, b);
  }
  const Context ctx{spec,
                    energies,
                    (std::uint64_t{1} << spec.k_marginal) - 1,
                    shift_constant(n),
                    min_level,
                    spec.k_marginal > 0};

  Partial result = make_partial(ctx);
  for_each_block_ordered(
      blocks, options.workers,
      [&](std::uint64_t index) {
        Partial p = make_partial(ctx);
        process_range(ctx, index * block, block, p);
        return p;
      },
      [&](Partial&& p) { merge_into(result, std::move(p), spec); });
  return finish(spec, std::move(result));
}

double free_energy(const ReplicaResult& result, double beta) {
  return result.log_z[position_of(result.betas, beta, "beta")] / result.n;
}

std::optional<double> rate_estimate(const ReplicaResult& result, const OpenInterval& interval) {
  const std::uint64_t hits = result.interval_hits[position_of(result.intervals, interval, "interval")];
  if (hits == 0) {
    return std::nullopt;
  }
  const double log_fraction = std::log(static_cast<double>(hits)) - result.n * std::numbers::ln2;
  return -log_fraction / result.n;
}

std::uint64_t exceedance_count(const ReplicaResult& result, double b) {
  return result.exceedance[position_of(result.b_levels, b, "exceedance level")];
}

std::vector<double> exceedance_positions(const ReplicaSpec& spec, double b) {
  validate(spec);
  if (!std::isfinite(b)) {
    throw std::invalid_argument("exceedance level must be finite");
  }
  const int n = spec.env.n();
  const std::uint64_t total = std::uint64_t{1} << n;
  const double shift = shift_constant(n);
  const std::uint64_t chunk = std::min<std::uint64_t>(kSubChunk, total);
  std::vector<double> energies(chunk);
  std::vector<double> out;
  for (std::uint64_t start = 0; start < total; start += chunk) {
    fill_energies(spec, start, energies);
    for (double e : energies) {
      const double x = -(e + shift);
      if (x >= b) {
        out.push_back(x);
      }
    }
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace remlab
