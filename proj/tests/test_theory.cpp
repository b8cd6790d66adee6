#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "remlab/bounds.hpp"
#include "remlab/environment.hpp"
#include "remlab/theory.hpp"

using namespace remlab;

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Variational form: sup over |x| <= edge of log 2 - I(x) + beta x, by grid
// search refined with golden section.
double variational_free_energy(double alpha, double beta) {
  const double edge = std::pow(alpha * kLn2, 1.0 / alpha);
  auto g = [&](double x) { return kLn2 - rate_function(alpha, x).value() + beta * x; };
  double best = -std::numeric_limits<double>::infinity();
  double arg = 0.0;
  const int steps = 20000;
  for (int i = 0; i <= steps; ++i) {
    const double x = edge * i / steps;
    if (g(x) > best) {
      best = g(x);
      arg = x;
    }
  }
  double lo = std::max(0.0, arg - edge / steps);
  double hi = std::min(edge, arg + edge / steps);
  for (int i = 0; i < 100; ++i) {
    const double m1 = lo + (hi - lo) * 0.381966;
    const double m2 = hi - (hi - lo) * 0.381966;
    (g(m1) < g(m2) ? lo : hi) = (g(m1) < g(m2) ? m1 : m2);
  }
  return std::max(best, g(0.5 * (lo + hi)));
}

// E[e^{gamma H} 1{H <= cut}] by quadrature of the density.
double moment_by_quadrature(int alpha, double beta, double delta, int n, int order) {
  const Environment env(alpha, n);
  const double gamma = order * beta;
  auto f = [&](double x) { return std::exp(gamma * x) * density(env, x); };
  using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double cut = delta * n;
  // Split at 0 and at the peak of the integrand, where it is sharpest.
  const double peak = alpha == 2 ? std::min(gamma * n, cut) : 0.0;
  double total = Q::integrate(f, -std::numeric_limits<double>::infinity(), std::min(0.0, cut), 15, 1e-13);
  if (cut > 0.0) {
    total += Q::integrate(f, 0.0, std::max(0.0, peak), 15, 1e-13);
    if (std::isinf(cut)) {
      total += Q::integrate(f, std::max(0.0, peak), cut, 15, 1e-13);
    } else if (cut > peak) {
      total += Q::integrate(f, std::max(0.0, peak), cut, 15, 1e-13);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("critical beta") {
  CHECK(critical_beta(1.0) == 1.0);
  CHECK(critical_beta(2.0) == doctest::Approx(std::sqrt(2.0 * kLn2)).epsilon(1e-15));
  CHECK(critical_beta(3.0) == doctest::Approx(std::pow(3.0 * kLn2, 2.0 / 3.0)));
  CHECK_THROWS_AS(critical_beta(0.9), std::invalid_argument);
}

TEST_CASE("free energy limit values") {
  CHECK(free_energy_limit(1.0, 0.5) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(free_energy_limit(1.0, 1.0) == doctest::Approx(kLn2));
  CHECK(free_energy_limit(1.0, 2.0) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(free_energy_limit(2.0, 0.5) == doctest::Approx(0.818147).epsilon(1e-6));
  CHECK(free_energy_limit(2.0, 2.0) == doctest::Approx(2.354820).epsilon(1e-6));
  CHECK_THROWS_AS(free_energy_limit(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(free_energy_limit(1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(free_energy_limit(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("free energy limit equals the variational formula") {
  for (double alpha : {1.0, 1.5, 2.0, 3.0, 5.0}) {
    for (double beta : {0.1, 0.5, 0.9, 1.0, 1.2, 2.0, 4.0}) {
      CAPTURE(alpha);
      CAPTURE(beta);
      CHECK(free_energy_limit(alpha, beta) == doctest::Approx(variational_free_energy(alpha, beta)).epsilon(1e-9));
    }
  }
}

TEST_CASE("free energy limit is continuous, convex and nondecreasing") {
  for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
    const double bc = critical_beta(alpha);
    CHECK(free_energy_limit(alpha, bc * (1 + 1e-12)) == doctest::Approx(free_energy_limit(alpha, bc)).epsilon(1e-10));
    double prev_value = free_energy_limit(alpha, 0.01);
    double prev_slope = 0.0;
    for (double beta = 0.02; beta < 4.0; beta += 0.01) {
      const double value = free_energy_limit(alpha, beta);
      const double slope = (value - prev_value) / 0.01;
      CHECK(value >= prev_value);
      CHECK(slope >= prev_slope - 1e-9);
      prev_value = value;
      prev_slope = slope;
    }
  }
}

TEST_CASE("phase diagnosis") {
  CHECK(diagnose_phase(1.0, 0.5).regime == Regime::high_temperature);
  CHECK(diagnose_phase(1.0, 1.0).regime == Regime::critical);
  CHECK(diagnose_phase(1.0, 1.5).regime == Regime::low_temperature);
  const auto d = diagnose_phase(2.0, 1.0);
  CHECK(d.regime == Regime::high_temperature);
  CHECK(d.beta_critical == doctest::Approx(1.17741));
  CHECK(to_string(Regime::low_temperature) == "low_temperature");
  CHECK_THROWS_AS(diagnose_phase(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("rate function") {
  CHECK(rate_function(1.0, 0.0).value() == 0.0);
  CHECK(rate_function(1.0, -0.3).value() == doctest::Approx(0.3));
  CHECK(rate_function(1.0, kLn2).value() == doctest::Approx(kLn2));
  CHECK(rate_function(1.0, 0.8).is_infinite());
  CHECK(rate_function(2.0, 1.0).value() == doctest::Approx(0.5));
  CHECK(rate_function(2.0, 1.2).is_infinite());
  CHECK(rate_function(3.0, -1.0).value() == doctest::Approx(1.0 / 3.0));
  CHECK(std::isinf(rate_function(1.0, 5.0).to_double()));
  CHECK_THROWS_AS(rate_function(1.0, 5.0).value(), std::logic_error);
  CHECK_THROWS_AS(rate_function(1.0, std::nan("")), std::invalid_argument);
  // At the edge the rate equals log 2: the domain is where 2^N e^{-N I} >= 1.
  for (double alpha : {1.0, 2.0, 3.5}) {
    const double edge = std::pow(alpha * kLn2, 1.0 / alpha);
    CHECK(rate_function(alpha, edge).value() == doctest::Approx(kLn2));
  }
}

TEST_CASE("poisson count law") {
  CHECK(poisson_count_pmf(0.0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(poisson_count_pmf(0.0, 2) == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-15));
  for (double b : {-2.0, 0.0, 1.5}) {
    double total = 0.0;
    double mean = 0.0;
    for (unsigned k = 0; k < 200; ++k) {
      total += poisson_count_pmf(b, k);
      mean += k * poisson_count_pmf(b, k);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(std::exp(-b)).epsilon(1e-12));
  }
  CHECK(shift_constant(1) == 0.0);
  CHECK(shift_constant(20) == doctest::Approx(19 * kLn2));
  CHECK_THROWS_AS(shift_constant(0), std::invalid_argument);
}

TEST_CASE("truncated moments agree with quadrature") {
  for (int alpha : {1, 2}) {
    for (double beta : {0.1, 0.3, 0.5, 0.75, 0.9}) {
      for (double delta : {0.5, 0.8, 1.5}) {
        for (int n : {1, 5, 10}) {
          for (int order : {1, 2}) {
            CAPTURE(alpha);
            CAPTURE(beta);
            CAPTURE(delta);
            CAPTURE(n);
            CAPTURE(order);
            CHECK(truncated_exp_moment(alpha, beta, delta, n, order) ==
                  doctest::Approx(moment_by_quadrature(alpha, beta, delta, n, order)).epsilon(1e-8));
          }
        }
      }
    }
  }
}

TEST_CASE("untruncated moments") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(truncated_exp_moment(1, 0.5, inf, 3, 1) == doctest::Approx(1.0 / (1.0 - 0.25)));
  CHECK(truncated_exp_moment(2, 0.7, inf, 6, 1) == doctest::Approx(std::exp(0.49 * 6 / 2.0)));
  CHECK(truncated_exp_moment(2, 0.7, inf, 6, 2) == doctest::Approx(std::exp(4 * 0.49 * 6 / 2.0)));
}

TEST_CASE("truncated moment at gamma = 1 is linear in the cut") {
  // beta = 1/2, order 2: 1/4 + delta N / 2.
  CHECK(truncated_exp_moment(1, 0.5, 0.8, 10, 2) == doctest::Approx(0.25 + 4.0));
  CHECK(truncated_exp_moment(1, 0.5, 0.8, 10, 2) <= (1.0 + 0.8 * 10) / 2.0);
}

TEST_CASE("truncated moment validation") {
  CHECK_THROWS_AS(truncated_exp_moment(3, 0.5, 1.0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(truncated_exp_moment(1, 0.0, 1.0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(truncated_exp_moment(1, 0.5, 0.0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(truncated_exp_moment(1, 0.5, 1.0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(truncated_exp_moment(1, 0.5, 1.0, 4, 3), std::invalid_argument);
}

TEST_CASE("every bound in the documented grids holds") {
  std::size_t checked = 0;
  for (const auto& grid : {interval_bound_grid(), moment_bound_grid()}) {
    for (const auto& b : grid) {
      CAPTURE(b.name);
      CAPTURE(b.alpha);
      CAPTURE(b.beta);
      CAPTURE(b.delta);
      CAPTURE(b.n);
      CAPTURE(b.lo);
      CAPTURE(b.hi);
      CAPTURE(b.exact);
      CAPTURE(b.bound);
      CHECK(b.holds());
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("bound grids cover every case") {
  std::set<std::string> names;
  bool half = false;
  bool straddles = false;
  bool wide_delta = false;
  for (const auto& b : interval_bound_grid()) {
    names.insert(b.name);
    straddles = straddles || (b.lo < 0.0 && b.hi > 0.0);
  }
  for (const auto& b : moment_bound_grid()) {
    names.insert(b.name);
    half = half || (b.alpha == 1.0 && b.beta == 0.5 && b.name == "laplace_second_moment");
    wide_delta = wide_delta || (b.alpha == 2.0 && b.beta > b.delta / 2.0);
  }
  CHECK(names.size() == 8);
  CHECK(half);
  CHECK(straddles);
  CHECK(wide_delta);
}

TEST_CASE("bound relations") {
  BoundCheck c;
  c.exact = 1.0;
  c.bound = 1.0;
  c.relation = Relation::less_equal;
  CHECK(c.holds());
  c.relation = Relation::less;
  CHECK_FALSE(c.holds());
  c.relation = Relation::greater_equal;
  CHECK(c.holds());
  c.relation = Relation::greater;
  CHECK_FALSE(c.holds());
  CHECK(to_string(Relation::less_equal) == "<=");
}
