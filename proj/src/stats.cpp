#include "remlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace remlab {

namespace {

TestReport make_report(double statistic, double p_value, std::size_t n1, std::size_t n2, double level) {
  TestReport r;
  r.statistic = statistic;
  r.p_value = std::clamp(p_value, 0.0, 1.0);
  r.sample_sizes = {n1, n2};
  r.level = level;
  r.verdict = r.p_value < level ? Verdict::fail : Verdict::pass;
  return r;
}

}  // namespace

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) {
    return 1.0;
  }
  if (lambda < 1.0) {
    // Jacobi theta form of the CDF converges fast for small lambda.
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 9; k += 2) {
      sum += std::pow(y, k * k);
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) {
      break;
    }
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestReport ks_two_sample(std::span<const double> xs, std::span<const double> ys, double level) {
  if (xs.empty() || ys.empty()) {
    throw std::invalid_argument("ks_two_sample requires two nonempty samples");
  }
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) {
      ++i;
    }
    while (j < b.size() && b[j] == x) {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double effective = n * m / (n + m);
  return make_report(d, kolmogorov_survival(std::sqrt(effective) * d), a.size(), b.size(), level);
}

TestReport ks_one_sample(std::span<const double> xs, const std::function<double(double)>& cdf, double level) {
  if (xs.empty()) {
    throw std::invalid_argument("ks_one_sample requires a nonempty sample");
  }
  std::vector<double> a(xs.begin(), xs.end());
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return make_report(d, kolmogorov_survival(std::sqrt(n) * d), a.size(), 0, level);
}

TestReport chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_probs,
                          double level) {
  if (observed.size() != expected_probs.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof needs matching, nonempty observed and expected vectors");
  }
  const double prob_total = std::accumulate(expected_probs.begin(), expected_probs.end(), 0.0);
  if (std::abs(prob_total - 1.0) > 1e-9) {
    throw std::invalid_argument("expected probabilities must sum to 1");
  }
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));

  std::vector<double> pooled_observed;
  std::vector<double> pooled_expected;
  double run_observed = 0.0;
  double run_expected = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    run_observed += static_cast<double>(observed[k]);
    run_expected += expected_probs[k] * total;
    if (run_expected >= 5.0) {
      pooled_observed.push_back(run_observed);
      pooled_expected.push_back(run_expected);
      run_observed = 0.0;
      run_expected = 0.0;
    }
  }
  if (run_expected > 0.0 || run_observed > 0.0) {
    if (pooled_expected.empty()) {
      throw std::invalid_argument("chi_square_gof: expected count below 5 after pooling");
    }
    pooled_observed.back() += run_observed;
    pooled_expected.back() += run_expected;
  }
  if (pooled_expected.size() < 2) {
    throw std::invalid_argument("chi_square_gof: fewer than two bins with expected count >= 5");
  }

  double statistic = 0.0;
  for (std::size_t k = 0; k < pooled_expected.size(); ++k) {
    const double diff = pooled_observed[k] - pooled_expected[k];
    statistic += diff * diff / pooled_expected[k];
  }
  const double df = static_cast<double>(pooled_expected.size() - 1);
  const double p = statistic > 0.0 ? boost::math::gamma_q(df / 2.0, statistic / 2.0) : 1.0;
  return make_report(statistic, p, static_cast<std::size_t>(total), pooled_expected.size(), level);
}

ReplicaSummary summarize(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("summarize requires at least two values");
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return {mean, se, values.size(), {mean - 1.96 * se, mean + 1.96 * se}};
}

}  // namespace remlab
