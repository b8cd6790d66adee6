#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>

namespace remlab {

enum class Verdict { pass, fail };

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::pair<std::size_t, std::size_t> sample_sizes{0, 0};
  double level = 0.001;
  Verdict verdict = Verdict::pass;

  bool passed() const noexcept { return verdict == Verdict::pass; }
};

struct ReplicaSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
  std::pair<double, double> ci95{0.0, 0.0};
};

/// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test, asymptotic p-value with effective
/// size n m / (n + m). Rejects when p < level.
TestReport ks_two_sample(std::span<const double> xs, std::span<const double> ys, double level = 0.001);

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestReport ks_one_sample(std::span<const double> xs, const std::function<double(double)>& cdf,
                         double level = 0.001);

/// Pearson chi-square goodness of fit. Adjacent categories are pooled left to
/// right until each expected count is at least 5 (a short remainder joins
/// the last pooled bin); df = bins - 1.
TestReport chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_probs,
                          double level = 0.001);

/// Mean, standard error and a normal 95% interval. Needs at least 2 values.
ReplicaSummary summarize(std::span<const double> values);

}  // namespace remlab
