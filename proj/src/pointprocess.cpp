#include "remlab/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace remlab {

namespace {

// Appends the points of the e^{-x} dx process in [lo, hi) (hi may be +inf),
// sorted descending, and returns how many were added.
std::size_t append_points(double lo, double hi, std::uint64_t count, CounterStream& stream,
                          std::vector<double>& points) {
  const double top = std::isinf(hi) ? 0.0 : std::exp(-hi);
  const double width = std::exp(-lo) - top;
  const std::size_t before = points.size();
  for (std::uint64_t i = 0; i < count; ++i) {
    points.push_back(-std::log(top + stream.uniform() * width));
  }
  std::sort(points.begin() + static_cast<std::ptrdiff_t>(before), points.end(), std::greater<>());
  return points.size() - before;
}

std::uint64_t poisson_count(double mean, CounterStream& stream) {
  std::poisson_distribution<std::uint64_t> poisson(mean);
  return poisson(stream);
}

double region_mean(double lo, double hi) {
  return std::isinf(hi) ? std::exp(-lo) : std::exp(-lo) - std::exp(-hi);
}

}  // namespace

double WeightSequence::sum() const noexcept { return std::accumulate(entries.begin(), entries.end(), 0.0); }

bool in_sequence_space(const WeightSequence& w, double tolerance) {
  for (std::size_t i = 0; i < w.entries.size(); ++i) {
    if (!(w.entries[i] >= 0.0)) {
      return false;
    }
    if (i > 0 && w.entries[i] > w.entries[i - 1]) {
      return false;
    }
  }
  return w.sum() <= 1.0 + tolerance;
}

void validate(const PDParams& params) {
  if (!(params.m > 0.0 && params.m < 1.0)) {
    throw std::invalid_argument("PD parameter m must lie in (0, 1)");
  }
  if (!(params.epsilon_mass > 0.0 && params.epsilon_mass < 1.0)) {
    throw std::invalid_argument("epsilon_mass must lie in (0, 1)");
  }
  if (!std::isfinite(params.truncation_b)) {
    throw std::invalid_argument("truncation_b must be finite");
  }
  if (params.max_points < 1) {
    throw std::invalid_argument("max_points must be >= 1");
  }
}

std::vector<double> sample_poisson_points(const PDParams& params, CounterStream& stream) {
  validate(params);
  const double b = params.truncation_b;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> points;
  append_points(b, inf, poisson_count(region_mean(b, inf), stream), stream, points);
  return points;
}

WeightSequence sample_pd_poisson(double beta, const PDParams& params, CounterStream& stream) {
  if (!(beta > 1.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("sample_pd_poisson requires a finite beta > 1");
  }
  validate(params);
  if (std::abs(params.m * beta - 1.0) > 1e-12) {
    throw std::invalid_argument("PD parameter m must equal 1/beta");
  }

  double b = params.truncation_b;
  std::vector<double> points = sample_poisson_points(params, stream);
  // No point above the cutoff: lower it and draw only the new strip.
  while (points.empty()) {
    const double upper = b;
    b -= 1.0;
    append_points(b, upper, poisson_count(region_mean(b, upper), stream), stream, points);
  }

  const double top = points.front();
  // Mass is tracked relative to the largest point: e^{beta (c - top)}.
  double collected = 0.0;
  for (double c : points) {
    collected += std::exp(beta * (c - top));
  }
  // Expected sum of e^{beta (c - top)} over points below the cutoff.
  auto unresolved = [&](double cutoff) { return std::exp((beta - 1.0) * cutoff - beta * top) / (beta - 1.0); };

  bool resolved = true;
  while (unresolved(b) >= params.epsilon_mass * collected) {
    const double upper = b;
    const double lower = b - 1.0;
    const std::uint64_t count = poisson_count(region_mean(lower, upper), stream);
    if (points.size() + count > params.max_points) {
      resolved = false;
      break;
    }
    const std::size_t first = points.size();
    append_points(lower, upper, count, stream, points);
    for (std::size_t i = first; i < points.size(); ++i) {
      collected += std::exp(beta * (points[i] - top));
    }
    b = lower;
  }

  WeightSequence out;
  const double tail = resolved ? 0.0 : unresolved(b);
  const double total = collected + tail;
  out.entries.reserve(points.size());
  for (double c : points) {
    out.entries.push_back(std::exp(beta * (c - top)) / total);
  }
  out.deficit = tail / total;
  return out;
}

WeightSequence sample_pd_stick(double m, std::size_t length, CounterStream& stream) {
  if (!(m > 0.0 && m < 1.0)) {
    throw std::invalid_argument("stick breaking requires 0 < m < 1");
  }
  if (length < 1) {
    throw std::invalid_argument("stick breaking requires length >= 1");
  }
  WeightSequence out;
  out.entries.reserve(length);
  std::gamma_distribution<double> first_shape(1.0 - m, 1.0);
  double rest = 1.0;
  for (std::size_t i = 1; i <= length; ++i) {
    std::gamma_distribution<double> second_shape(static_cast<double>(i) * m, 1.0);
    const double x = first_shape(stream);
    const double y = second_shape(stream);
    const double v = x / (x + y);
    out.entries.push_back(rest * v);
    rest *= y / (x + y);
  }
  std::sort(out.entries.begin(), out.entries.end(), std::greater<>());
  out.deficit = rest;
  return out;
}

double l1_distance(const WeightSequence& x, const WeightSequence& y) {
  const auto& a = x.entries.size() >= y.entries.size() ? x.entries : y.entries;
  const auto& b = x.entries.size() >= y.entries.size() ? y.entries : x.entries;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += std::abs(a[i] - (i < b.size() ? b[i] : 0.0));
  }
  return d;
}

}  // namespace remlab
