#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "remlab/engine.hpp"
#include "remlab/stats.hpp"
#include "support/naive_oracle.hpp"

using namespace remlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ReplicaSpec laplace_spec(int n) {
  ReplicaSpec spec;
  spec.env = Environment(1.0, n);
  spec.betas = {0.5, 1.0, 2.0};
  spec.k_marginal = std::min(n, 3);
  spec.intervals = {OpenInterval(-kInf, -0.1), OpenInterval(0.2, 0.3), OpenInterval(-0.05, 0.05)};
  spec.b_levels = {-1.0, 0.0, 1.0};
  spec.top_m = 16;
  spec.master_seed = 77;
  spec.replica_id = 3;
  return spec;
}

bool same_bits(const ReplicaResult& a, const ReplicaResult& b) {
  auto eq = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin(), [](double p, double q) {
             return std::bit_cast<std::uint64_t>(p) == std::bit_cast<std::uint64_t>(q);
           });
  };
  if (!eq(a.log_z, b.log_z) || a.interval_hits != b.interval_hits || a.exceedance != b.exceedance ||
      !eq(a.exceedance_values, b.exceedance_values) || a.min_energy != b.min_energy) {
    return false;
  }
  for (std::size_t i = 0; i < a.betas.size(); ++i) {
    if (!eq(a.spectrum[i].weights, b.spectrum[i].weights) || a.spectrum[i].tail_mass != b.spectrum[i].tail_mass ||
        !eq(a.marginal[i], b.marginal[i])) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("fill_energies is bit-identical to energy_at") {
  for (double alpha : {1.0, 2.0, 1.5}) {
    ReplicaSpec spec = laplace_spec(12);
    spec.env = Environment(alpha, 12);
    // Odd offsets and lengths exercise the partial SIMD groups.
    for (std::uint64_t first : {0ull, 1ull, 15ull, 17ull, 1000ull}) {
      for (std::size_t len : {1u, 7u, 16u, 33u, 200u}) {
        std::vector<double> out(len);
        fill_energies(spec, first, out);
        for (std::size_t j = 0; j < len; ++j) {
          REQUIRE(std::bit_cast<std::uint64_t>(out[j]) == std::bit_cast<std::uint64_t>(energy_at(spec, first + j)));
        }
      }
    }
  }
}

TEST_CASE("energy_at follows the per-index substream") {
  for (double alpha : {1.0, 2.0, 3.0}) {
    ReplicaSpec spec = laplace_spec(10);
    spec.env = Environment(alpha, 10);
    const StreamKey key = seed_derivation(spec.master_seed, spec.replica_id, StreamLabel::energies);
    for (std::uint64_t i : {0ull, 5ull, 1023ull}) {
      CounterStream s = CounterStream::for_index(key, i);
      CHECK(energy_at(spec, i) == doctest::Approx(sample_energy(spec.env, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("energies are independent of position and follow the law") {
  for (double alpha : {1.0, 2.0}) {
    ReplicaSpec spec = laplace_spec(16);
    spec.env = Environment(alpha, 16);
    std::vector<double> e(1u << 14);
    fill_energies(spec, 12345, e);
    CHECK(ks_one_sample(e, [&](double x) { return cdf(spec.env, x); }).passed());
  }
}

TEST_CASE("log-sum-exp") {
  LogSumExp acc;
  CHECK(acc.empty());
  CHECK_THROWS_AS(acc.value(), std::logic_error);
  acc.add(1000.0);
  acc.add(1000.0);
  CHECK(acc.value() == doctest::Approx(1000.0 + std::log(2.0)));
  acc.add(-kInf);
  CHECK(acc.value() == doctest::Approx(1000.0 + std::log(2.0)));
  acc.add_scaled(1001.0, 3.0);
  CHECK(acc.value() == doctest::Approx(std::log(2.0 * std::exp(-1.0) + 3.0) + 1001.0));

  const std::vector<double> v{-800.0, -801.0, -802.5};
  long double ref = 0.0L;
  for (double x : v) {
    ref += std::exp(static_cast<long double>(x) + 800.0L);
  }
  CHECK(log_sum_exp_stream(v) == doctest::Approx(static_cast<double>(std::log(ref)) - 800.0));
  CHECK_THROWS_AS(log_sum_exp_stream(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("worker count does not change results") {
  for (int n : {1, 5, 14}) {
    const ReplicaSpec spec = laplace_spec(n);
    const ReplicaResult one = run_replica(spec, {.workers = 1});
    const ReplicaResult three = run_replica(spec, {.workers = 3});
    const ReplicaResult eight = run_replica(spec, {.workers = 8});
    CHECK(same_bits(one, three));
    CHECK(same_bits(one, eight));
    CHECK(same_bits(one, run_replica(spec, {.workers = 1})));
  }
}

TEST_CASE("streaming pass agrees with the naive reduction") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 40; ++trial) {
    const ReplicaSpec spec = testing::random_spec(rng, 13);
    const ReplicaResult expected = testing::naive_replica(spec, testing::materialize(spec));
    const ReplicaResult actual = run_replica(spec, {.workers = 1 + static_cast<unsigned>(trial % 3)});
    const std::string diff = testing::compare_results(expected, actual, 1e-10);
    INFO(testing::describe(spec));
    CHECK_MESSAGE(diff.empty(), diff);
  }
}

TEST_CASE("edge cases of the reduction") {
  SUBCASE("single spin") {
    ReplicaSpec spec = laplace_spec(1);
    spec.k_marginal = 1;
    const ReplicaResult r = run_replica(spec);
    const double h0 = energy_at(spec, 0);
    const double h1 = energy_at(spec, 1);
    CHECK(r.log_z_for(1.0) == doctest::Approx(std::log(std::exp(-h0) + std::exp(-h1))));
    CHECK(r.marginal_for(1.0).size() == 2);
    CHECK(r.marginal_for(1.0)[1] == doctest::Approx(std::exp(-h1) / (std::exp(-h0) + std::exp(-h1))));
    CHECK(r.min_energy == std::min(h0, h1));
  }
  SUBCASE("top_m beyond 2^N keeps everything") {
    ReplicaSpec spec = laplace_spec(4);
    spec.top_m = 100;
    const ReplicaResult r = run_replica(spec);
    CHECK(r.spectrum_for(2.0).weights.size() == 16);
    CHECK(r.spectrum_for(2.0).tail_mass == doctest::Approx(0.0));
    CHECK(std::accumulate(r.spectrum_for(2.0).weights.begin(), r.spectrum_for(2.0).weights.end(), 0.0) ==
          doctest::Approx(1.0));
    CHECK(std::is_sorted(r.spectrum_for(2.0).weights.rbegin(), r.spectrum_for(2.0).weights.rend()));
  }
  SUBCASE("marginal block covers every spin") {
    ReplicaSpec spec = laplace_spec(6);
    spec.k_marginal = 6;
    spec.top_m = 64;
    const ReplicaResult r = run_replica(spec);
    // With K = N the marginal is the full Gibbs measure.
    std::vector<double> m = r.marginal_for(2.0);
    std::sort(m.rbegin(), m.rend());
    const auto& w = r.spectrum_for(2.0).weights;
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(m[i] == doctest::Approx(w[i]).epsilon(1e-12));
    }
  }
  SUBCASE("beta zero gives the uniform measure") {
    ReplicaSpec spec = laplace_spec(8);
    spec.betas = {0.0, 1.0};
    const ReplicaResult r = run_replica(spec);
    CHECK(r.log_z_for(0.0) == doctest::Approx(8 * std::log(2.0)));
    for (double p : r.marginal_for(0.0)) {
      CHECK(p == doctest::Approx(1.0 / 8.0));
    }
  }
}

TEST_CASE("spec validation") {
  ReplicaSpec spec = laplace_spec(4);
  CHECK_NOTHROW(validate(spec));
  auto expect_invalid = [](ReplicaSpec s) { CHECK_THROWS_AS(validate(s), std::invalid_argument); };
  {
    ReplicaSpec s = spec;
    s.env = Environment(1.0, kMaxSystemSize + 1);
    expect_invalid(s);
  }
  {
    ReplicaSpec s = spec;
    s.betas = {};
    expect_invalid(s);
  }
  {
    ReplicaSpec s = spec;
    s.betas = {-1.0};
    expect_invalid(s);
  }
  {
    ReplicaSpec s = spec;
    s.betas = {std::nan("")};
    expect_invalid(s);
  }
  {
    ReplicaSpec s = spec;
    s.k_marginal = 5;
    expect_invalid(s);
  }
  {
    ReplicaSpec s = spec;
    s.top_m = 0;
    expect_invalid(s);
  }
  {
    ReplicaSpec s = spec;
    s.replica_id = kMaxReplicaId + 1;
    expect_invalid(s);
  }
  CHECK_THROWS_AS(run_replica(ReplicaSpec{.env = Environment(1.0, 4), .k_marginal = 9}), std::invalid_argument);
}

TEST_CASE("queries on a result") {
  const ReplicaSpec spec = laplace_spec(10);
  const ReplicaResult r = run_replica(spec);
  CHECK(free_energy(r, 1.0) == doctest::Approx(r.log_z_for(1.0) / 10.0));
  CHECK_THROWS_AS(free_energy(r, 0.75), std::invalid_argument);
  CHECK_THROWS_AS(r.marginal_for(0.75), std::invalid_argument);
  CHECK_THROWS_AS(exceedance_count(r, 0.5), std::invalid_argument);
  CHECK(exceedance_count(r, -1.0) >= exceedance_count(r, 0.0));
  CHECK(exceedance_count(r, 0.0) >= exceedance_count(r, 1.0));

  const auto rate = rate_estimate(r, OpenInterval(-kInf, -0.1));
  REQUIRE(rate.has_value());
  CHECK(*rate >= 0.0);
  // No energy reaches 50 N, so the estimate is empty.
  ReplicaSpec far = spec;
  far.intervals = {OpenInterval(50.0, 60.0)};
  const ReplicaResult rf = run_replica(far);
  CHECK_FALSE(rate_estimate(rf, OpenInterval(50.0, 60.0)).has_value());
  CHECK_THROWS_AS(rate_estimate(rf, OpenInterval(1.0, 2.0)), std::invalid_argument);
}

TEST_CASE("exceedance positions") {
  ReplicaSpec spec = laplace_spec(12);
  const ReplicaResult r = run_replica(spec);
  for (double b : spec.b_levels) {
    const std::vector<double> pos = exceedance_positions(spec, b);
    CHECK(pos.size() == exceedance_count(r, b));
    CHECK(std::is_sorted(pos.rbegin(), pos.rend()));
    for (double x : pos) {
      CHECK(x >= b);
    }
  }
  const std::vector<double> at_min = exceedance_positions(spec, -1.0);
  CHECK(at_min == r.exceedance_values);
  CHECK(r.exceedance_values_complete);
  if (!at_min.empty()) {
    CHECK(at_min.front() == doctest::Approx(-(r.min_energy + 11 * std::log(2.0))));
  }
}

TEST_CASE("custom energy sources") {
  ReplicaSpec spec = laplace_spec(6);
  spec.k_marginal = 2;
  // Constant energies: uniform Gibbs measure for every beta.
  const ReplicaResult flat = run_replica(spec, [](std::uint64_t, std::span<double> out) {
    std::fill(out.begin(), out.end(), -1.0);
  });
  CHECK(flat.log_z_for(2.0) == doctest::Approx(6 * std::log(2.0) + 2.0));
  CHECK(flat.marginal_for(0.5)[3] == doctest::Approx(0.25));
  CHECK(flat.min_energy == -1.0);

  // A pinned table reproduces the generated run.
  const std::vector<double> table = testing::materialize(spec);
  const ReplicaResult pinned = run_replica(spec, [&](std::uint64_t first, std::span<double> out) {
    std::copy_n(table.begin() + static_cast<std::ptrdiff_t>(first), out.size(), out.begin());
  });
  CHECK(testing::compare_results(run_replica(spec), pinned, 1e-13).empty());
}
