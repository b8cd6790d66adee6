#include "remlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "remlab/environment.hpp"
#include "remlab/theory.hpp"

namespace remlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of e^{-x} over [a, b], b may be infinite.
double exp_integral(double a, double b) {
  return std::isinf(b) ? std::exp(-a) : -std::exp(-a) * std::expm1(-(b - a));
}

BoundCheck make(std::string name, double alpha, double beta, double delta, int n, double exact, double bound,
                Relation relation) {
  BoundCheck c;
  c.name = std::move(name);
  c.alpha = alpha;
  c.beta = beta;
  c.delta = delta;
  c.n = n;
  c.exact = exact;
  c.bound = bound;
  c.relation = relation;
  return c;
}

}  // namespace

bool BoundCheck::holds() const noexcept {
  switch (relation) {
    case Relation::less:
      return exact < bound;
    case Relation::less_equal:
      return exact <= bound;
    case Relation::greater:
      return exact > bound;
    case Relation::greater_equal:
      return exact >= bound;
  }
  return false;
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::less:
      return "<";
    case Relation::less_equal:
      return "<=";
    case Relation::greater:
      return ">";
    case Relation::greater_equal:
      return ">=";
  }
  return "?";
}

std::vector<BoundCheck> interval_bound_grid() {
  const std::vector<double> ends{-kInf, -2.0, -1.0, -0.5, -0.1, 0.0, 0.1, 0.3, 0.5, 1.0, 2.0, kInf};
  std::vector<BoundCheck> out;
  for (int n : {1, 5, 10, 20}) {
    const Environment env(1.0, n);
    for (std::size_t i = 0; i < ends.size(); ++i) {
      for (std::size_t j = i + 1; j < ends.size(); ++j) {
        const OpenInterval iv(ends[i], ends[j]);
        const double q = interval_probability(env, iv);
        const double lo = n * iv.inf_abs();
        const double hi = n * iv.sup_abs();
        const double integral = exp_integral(lo, hi);

        std::vector<BoundCheck> row{
            make("q_below_integral", 1.0, 0.0, 0.0, n, q, integral, Relation::less_equal),
            make("q_below_exp", 1.0, 0.0, 0.0, n, q, std::exp(-lo), Relation::less_equal),
            make("q_above_half_integral", 1.0, 0.0, 0.0, n, q, 0.5 * integral, Relation::greater_equal),
        };
        const double spread = iv.sup_abs() - iv.inf_abs();
        const std::vector<double> deltas =
            std::isinf(spread) ? std::vector<double>{0.5, 1.0, 5.0}
                               : std::vector<double>{0.1 * spread, 0.5 * spread, 0.9 * spread};
        for (double delta : deltas) {
          row.push_back(make("q_above_delta", 1.0, 0.0, delta, n, q, 0.5 * delta * std::exp(-(lo + delta)),
                             Relation::greater));
        }
        for (auto& c : row) {
          c.lo = iv.lo();
          c.hi = iv.hi();
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

std::vector<BoundCheck> moment_bound_grid() {
  const double ln2 = std::numbers::ln2;
  std::vector<BoundCheck> out;
  for (int n : {10, 20, 40}) {
    for (int step = 1; step <= 19; ++step) {
      const double beta = 0.05 * step;
      std::vector<double> deltas;
      if (beta <= 0.5) {
        deltas = {0.7, 1.0, 2.0};
      } else {
        const double top = ln2 / (2.0 * beta - 1.0);
        for (double f : {0.25, 0.5, 0.75}) {
          deltas.push_back(ln2 + f * (top - ln2));
        }
      }
      for (double delta : deltas) {
        const double first = truncated_exp_moment(1, beta, delta, n, 1);
        out.push_back(make("laplace_first_moment", 1.0, beta, delta, n, first, 1.0 / (1.0 + beta),
                           Relation::greater));
        const double second = truncated_exp_moment(1, beta, delta, n, 2);
        if (step < 10) {
          out.push_back(make("laplace_second_moment", 1.0, beta, delta, n, second, 1.0 / (1.0 - 4.0 * beta * beta),
                             Relation::less_equal));
        } else if (step == 10) {
          out.push_back(make("laplace_second_moment", 1.0, beta, delta, n, second, (1.0 + delta * n) / 2.0,
                             Relation::less_equal));
        } else {
          const double g = 2.0 * beta - 1.0;
          out.push_back(make("laplace_second_moment", 1.0, beta, delta, n, second,
                             std::exp(g * delta * n) / (2.0 * g), Relation::less_equal));
        }
      }
    }

    const double sqrt_ln2 = std::sqrt(ln2);
    const double edge = std::sqrt(2.0 * ln2);
    std::vector<double> betas;
    for (int step = 1; step <= 11; ++step) {
      betas.push_back(0.1 * step);
    }
    betas.push_back(sqrt_ln2);
    betas.push_back(0.5 * (sqrt_ln2 + edge));
    betas.push_back(edge - 1e-3);
    for (double beta : betas) {
      std::vector<double> deltas;
      if (beta < sqrt_ln2) {
        deltas = {2.0 * sqrt_ln2};
      } else {
        const double top = 2.0 * beta - std::sqrt(std::max(0.0, 2.0 * (beta * beta - ln2)));
        for (double f : {0.25, 0.5, 0.75}) {
          deltas.push_back(edge + f * (top - edge));
        }
      }
      const double nn = n;
      for (double delta : deltas) {
        const double first = truncated_exp_moment(2, beta, delta, n, 1);
        out.push_back(make("gaussian_first_moment", 2.0, beta, delta, n, first, 0.5 * std::exp(beta * beta * nn / 2.0),
                           Relation::greater));
        const double second = truncated_exp_moment(2, beta, delta, n, 2);
        const double bound =
            beta <= delta / 2.0
                ? std::exp(2.0 * beta * beta * nn)
                : std::exp((2.0 * delta * beta - delta * delta / 2.0) * nn) /
                      ((2.0 * beta - delta) * std::sqrt(2.0 * std::numbers::pi * nn));
        out.push_back(make("gaussian_second_moment", 2.0, beta, delta, n, second, bound, Relation::less_equal));
      }
    }
  }
  return out;
}

}  // namespace remlab
