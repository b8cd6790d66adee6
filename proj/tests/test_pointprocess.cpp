#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doctest.h"
#include "remlab/pointprocess.hpp"
#include "remlab/stats.hpp"

using namespace remlab;

namespace {

double sum_sq(const WeightSequence& w) {
  return std::inner_product(w.entries.begin(), w.entries.end(), w.entries.begin(), 0.0);
}

// Mean and standard error.
std::pair<double, double> mean_se(const std::vector<double>& v) {
  const ReplicaSummary s = summarize(v);
  return {s.mean, s.std_error};
}

}  // namespace

TEST_CASE("poisson points above a cutoff") {
  PDParams params;
  params.truncation_b = -3.0;
  CounterStream stream(seed_derivation(11, 0, StreamLabel::point_process));
  std::vector<double> counts;
  std::vector<double> offsets;
  for (int d = 0; d < 2000; ++d) {
    const std::vector<double> pts = sample_poisson_points(params, stream);
    REQUIRE(std::is_sorted(pts.rbegin(), pts.rend()));
    counts.push_back(static_cast<double>(pts.size()));
    for (double x : pts) {
      REQUIRE(x >= -3.0);
      offsets.push_back(x + 3.0);
    }
  }
  // Count ~ Poisson(e^3); offsets above the cutoff ~ Exp(1).
  const auto [mean, se] = mean_se(counts);
  CHECK(std::abs(mean - std::exp(3.0)) < 4.0 * se);
  CHECK(ks_one_sample(offsets, [](double x) { return -std::expm1(-x); }).passed());
}

TEST_CASE("poisson construction produces a point of the sequence space") {
  PDParams params;
  params.m = 0.5;
  params.epsilon_mass = 1e-4;
  CounterStream stream(seed_derivation(12, 0, StreamLabel::point_process));
  for (int d = 0; d < 200; ++d) {
    const WeightSequence w = sample_pd_poisson(2.0, params, stream);
    REQUIRE(in_sequence_space(w));
    CHECK(w.sum() + w.deficit == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.deficit == 0.0);
    CHECK_FALSE(w.entries.empty());
  }
}

TEST_CASE("a high cutoff with no points is lowered") {
  PDParams params;
  params.m = 0.5;
  params.truncation_b = 8.0;
  CounterStream stream(seed_derivation(13, 0, StreamLabel::point_process));
  const WeightSequence w = sample_pd_poisson(2.0, params, stream);
  CHECK_FALSE(w.entries.empty());
  CHECK(w.sum() == doctest::Approx(1.0));
}

TEST_CASE("point budget leaves an explicit deficit") {
  PDParams params;
  params.m = 0.8;
  params.epsilon_mass = 1e-9;
  params.max_points = std::size_t{1} << 14;
  CounterStream stream(seed_derivation(14, 0, StreamLabel::point_process));
  const WeightSequence w = sample_pd_poisson(1.25, params, stream);
  CHECK(w.deficit > 0.0);
  CHECK(w.entries.size() <= params.max_points);
  CHECK(w.sum() + w.deficit == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(in_sequence_space(w));
}

TEST_CASE("sampler argument checks") {
  CounterStream stream(seed_derivation(1, 0, 0));
  PDParams params;
  CHECK_THROWS_AS(sample_pd_poisson(1.0, params, stream), std::invalid_argument);
  CHECK_THROWS_AS(sample_pd_poisson(3.0, params, stream), std::invalid_argument);
  params.m = 1.0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = {};
  params.epsilon_mass = 0.0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = {};
  params.truncation_b = std::nan("");
  CHECK_THROWS_AS(sample_poisson_points(params, stream), std::invalid_argument);
  params = {};
  params.max_points = 0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  CHECK_THROWS_AS(sample_pd_stick(0.0, 10, stream), std::invalid_argument);
  CHECK_THROWS_AS(sample_pd_stick(0.5, 0, stream), std::invalid_argument);
}

TEST_CASE("expected sum of squares is 1 - m") {
  for (double m : {0.3, 0.5, 0.7}) {
    PDParams params;
    params.m = m;
    // Near m = 1 the tail resolves slowly; the budget caps the work and the
    // unresolved mass is spread over points too small to move sum w^2.
    params.epsilon_mass = 1e-3;
    params.max_points = std::size_t{1} << 14;
    CounterStream poisson(seed_derivation(21, 0, StreamLabel::point_process));
    CounterStream stick(seed_derivation(21, 0, StreamLabel::stick_breaking));
    std::vector<double> a;
    std::vector<double> b;
    for (int d = 0; d < 1500; ++d) {
      a.push_back(sum_sq(sample_pd_poisson(1.0 / m, params, poisson)));
      b.push_back(sum_sq(sample_pd_stick(m, 400, stick)));
    }
    CAPTURE(m);
    const auto [ma, sa] = mean_se(a);
    const auto [mb, sb] = mean_se(b);
    CHECK(std::abs(ma - (1.0 - m)) < 4.0 * sa);
    CHECK(std::abs(mb - (1.0 - m)) < 4.0 * sb);
  }
}

TEST_CASE("stick deficit matches its expectation") {
  // E prod (1 - V_i) = prod i m / (1 - m + i m); 1 / (L + 1) at m = 1/2.
  const std::size_t length = 200;
  for (double m : {0.5, 0.7}) {
    double expected = 1.0;
    for (std::size_t i = 1; i <= length; ++i) {
      expected *= i * m / (1.0 - m + i * m);
    }
    if (m == 0.5) {
      CHECK(expected == doctest::Approx(1.0 / 201.0));
    }
    CounterStream stream(seed_derivation(31, 0, StreamLabel::stick_breaking));
    std::vector<double> deficits;
    for (int d = 0; d < 3000; ++d) {
      const WeightSequence w = sample_pd_stick(m, length, stream);
      REQUIRE(in_sequence_space(w));
      REQUIRE(w.entries.size() == length);
      REQUIRE(w.sum() + w.deficit == doctest::Approx(1.0).epsilon(1e-12));
      deficits.push_back(w.deficit);
    }
    const auto [mean, se] = mean_se(deficits);
    CAPTURE(m);
    CHECK(std::abs(mean - expected) < 4.0 * se);
  }
}

TEST_CASE("stick breaking and the poisson construction agree in law") {
  PDParams params;
  params.m = 0.5;
  params.epsilon_mass = 1e-4;
  CounterStream poisson(seed_derivation(41, 0, StreamLabel::point_process));
  CounterStream stick(seed_derivation(41, 0, StreamLabel::stick_breaking));
  std::vector<double> w1_poisson;
  std::vector<double> w1_stick;
  std::vector<double> w2_poisson;
  std::vector<double> w2_stick;
  for (int d = 0; d < 1500; ++d) {
    const WeightSequence p = sample_pd_poisson(2.0, params, poisson);
    const WeightSequence s = sample_pd_stick(0.5, 500, stick);
    w1_poisson.push_back(p.entries[0]);
    w1_stick.push_back(s.entries[0]);
    w2_poisson.push_back(p.entries.size() > 1 ? p.entries[1] : 0.0);
    w2_stick.push_back(s.entries[1]);
  }
  CHECK(ks_two_sample(w1_poisson, w1_stick).passed());
  CHECK(ks_two_sample(w2_poisson, w2_stick).passed());
}

TEST_CASE("l1 distance") {
  WeightSequence a{{0.5, 0.3, 0.2}, 0.0};
  WeightSequence b{{0.6, 0.4}, 0.0};
  CHECK(l1_distance(a, b) == doctest::Approx(0.1 + 0.1 + 0.2));
  CHECK(l1_distance(b, a) == l1_distance(a, b));
  CHECK(l1_distance(a, a) == 0.0);
  CHECK(l1_distance(a, WeightSequence{}) == doctest::Approx(1.0));
}

TEST_CASE("sequence space membership") {
  CHECK(in_sequence_space(WeightSequence{}));
  CHECK(in_sequence_space(WeightSequence{{0.5, 0.5}, 0.0}));
  CHECK_FALSE(in_sequence_space(WeightSequence{{0.2, 0.5}, 0.0}));
  CHECK_FALSE(in_sequence_space(WeightSequence{{0.6, 0.6}, 0.0}));
  CHECK_FALSE(in_sequence_space(WeightSequence{{0.5, -0.1}, 0.0}));
  CHECK_FALSE(in_sequence_space(WeightSequence{{std::nan("")}, 0.0}));
}
