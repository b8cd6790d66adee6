#include "remlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "remlab/bounds.hpp"
#include "remlab/engine.hpp"
#include "remlab/pointprocess.hpp"
#include "remlab/random.hpp"
#include "remlab/stats.hpp"
#include "remlab/theory.hpp"

#ifndef REMLAB_VERSION
#define REMLAB_VERSION "0.0.0"
#endif

namespace remlab {

using nlohmann::json;

namespace {

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      text_ += first ? "" : ",";
      text_ += h;
      first = false;
    }
    text_ += '\n';
  }

  Csv& cell(double v) { return raw(format_number(v)); }
  Csv& cell(std::uint64_t v) { return raw(std::to_string(v)); }
  Csv& cell(int v) { return raw(std::to_string(v)); }
  Csv& cell(std::string_view v) { return raw(v); }
  Csv& cell(const char* v) { return raw(v); }
  void end() {
    text_ += '\n';
    fresh_ = true;
  }

  const std::string& text() const { return text_; }

 private:
  Csv& raw(std::string_view v) {
    if (!fresh_) {
      text_ += ',';
    }
    text_ += v;
    fresh_ = false;
    return *this;
  }

  std::string text_;
  bool fresh_ = true;
};

json number_json(double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); }

struct Artifacts {
  std::string results;
  std::string overlay;
  std::optional<std::string> positions;
  std::vector<CheckResult> checks;
  json aggregates = json::object();
};

ReplicaSpec replica_spec(const ExperimentManifest& m, std::uint64_t replica) {
  ReplicaSpec spec;
  spec.env = Environment(m.alpha, m.n);
  spec.betas = m.betas;
  spec.k_marginal = m.k_marginal;
  spec.intervals = m.intervals;
  spec.b_levels = m.b_levels;
  spec.top_m = m.top_m;
  spec.master_seed = m.master_seed;
  spec.replica_id = replica;
  return spec;
}

// Replicas are independent tasks; results land in their own slot, so the
// output order is the replica order whatever the schedule.
std::vector<ReplicaResult> run_replicas(const ExperimentManifest& m) {
  const unsigned workers = m.workers.value_or(1);
  std::vector<ReplicaResult> results(m.replicas);
  const unsigned outer = static_cast<unsigned>(std::min<std::uint64_t>(workers, m.replicas));
  const unsigned inner = std::max(1u, workers / outer);
  std::atomic<std::uint64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&] {
    while (true) {
      const std::uint64_t r = next.fetch_add(1);
      if (r >= m.replicas) {
        return;
      }
      try {
        results[r] = run_replica(replica_spec(m, r), RunOptions{inner});
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        next.store(m.replicas);
      }
    }
  };
  if (outer == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < outer; ++i) {
      pool.emplace_back(work);
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
  return results;
}

double param(const CheckSpec& c, const char* name) { return c.params.at(name).get<double>(); }

OpenInterval interval_param(const json& v) {
  auto end = [](const json& x) {
    if (x.is_string()) {
      return x.get<std::string>() == "-inf" ? -std::numeric_limits<double>::infinity()
                                            : std::numeric_limits<double>::infinity();
    }
    return x.get<double>();
  };
  return OpenInterval(end(v.at(0)), end(v.at(1)));
}

std::size_t index_of(const std::vector<double>& values, double v) {
  return static_cast<std::size_t>(std::find(values.begin(), values.end(), v) - values.begin());
}

std::size_t interval_index(const ExperimentManifest& m, const OpenInterval& iv) {
  return static_cast<std::size_t>(std::find(m.intervals.begin(), m.intervals.end(), iv) - m.intervals.begin());
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

json summary_of(const std::vector<double>& v) {
  if (v.size() < 2) {
    return {{"mean", number_json(mean_of(v))}, {"count", v.size()}};
  }
  const ReplicaSummary s = summarize(v);
  return {{"mean", number_json(s.mean)},
          {"std_error", number_json(s.std_error)},
          {"count", s.count},
          {"ci95", {number_json(s.ci95.first), number_json(s.ci95.second)}}};
}

// ---- free energy -----------------------------------------------------------

Artifacts free_energy_experiment(const ExperimentManifest& m) {
  const auto replicas = run_replicas(m);
  Artifacts a;
  Csv results({"beta", "replica", "log_z", "free_energy"});
  Csv overlay({"beta", "limit"});
  std::vector<double> means;
  for (double beta : m.betas) {
    std::vector<double> values;
    for (std::uint64_t r = 0; r < replicas.size(); ++r) {
      const double f = free_energy(replicas[r], beta);
      values.push_back(f);
      results.cell(beta).cell(r).cell(replicas[r].log_z_for(beta)).cell(f).end();
    }
    overlay.cell(beta).cell(free_energy_limit(m.alpha, beta)).end();
    means.push_back(mean_of(values));
    json entry = summary_of(values);
    entry["beta"] = beta;
    entry["limit"] = free_energy_limit(m.alpha, beta);
    a.aggregates["free_energy"].push_back(entry);
  }

  std::vector<std::size_t> order(m.betas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return m.betas[i] < m.betas[j]; });

  for (const auto& c : m.checks) {
    CheckResult res;
    res.kind = c.kind;
    if (c.kind == "mean_within") {
      const double beta = param(c, "beta");
      const double limit = free_energy_limit(m.alpha, beta);
      const double mean = means[index_of(m.betas, beta)];
      res.value = std::abs(mean - limit);
      res.threshold = param(c, "tolerance");
      res.passed = res.value <= res.threshold;
      res.detail = "beta=" + format_number(beta) + " mean=" + format_number(mean) + " limit=" + format_number(limit);
    } else if (c.kind == "convex_nondecreasing") {
      const double tol = c.params.value("tolerance", 0.0);
      double worst_step = std::numeric_limits<double>::infinity();
      double worst_curvature = std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < order.size(); ++k) {
        worst_step = std::min(worst_step, means[order[k]] - means[order[k - 1]]);
      }
      for (std::size_t k = 2; k < order.size(); ++k) {
        const double s1 = (means[order[k - 1]] - means[order[k - 2]]) / (m.betas[order[k - 1]] - m.betas[order[k - 2]]);
        const double s2 = (means[order[k]] - means[order[k - 1]]) / (m.betas[order[k]] - m.betas[order[k - 1]]);
        worst_curvature = std::min(worst_curvature, s2 - s1);
      }
      res.value = std::min(worst_step, worst_curvature);
      res.threshold = 0.0 - tol;
      res.passed = order.size() >= 3 && worst_step >= -tol && worst_curvature >= -tol;
      res.detail = order.size() < 3 ? "needs at least three betas"
                                     : "min step=" + format_number(worst_step) +
                                           " min slope increase=" + format_number(worst_curvature);
    } else if (c.kind == "max_deviation_near") {
      std::size_t arg = 0;
      double worst = -1.0;
      for (std::size_t i = 0; i < m.betas.size(); ++i) {
        const double d = std::abs(means[i] - free_energy_limit(m.alpha, m.betas[i]));
        if (d > worst) {
          worst = d;
          arg = i;
        }
      }
      res.value = std::abs(m.betas[arg] - param(c, "center"));
      res.threshold = param(c, "window");
      res.passed = res.value <= res.threshold;
      res.detail = "largest deviation " + format_number(worst) + " at beta=" + format_number(m.betas[arg]);
    }
    a.checks.push_back(res);
  }
  a.results = results.text();
  a.overlay = overlay.text();
  return a;
}

// ---- rate function ---------------------------------------------------------

double rate_from(double hits, double total, int n) {
  return hits > 0.0 ? -std::log(hits / total) / n : std::numeric_limits<double>::infinity();
}

Artifacts rate_function_experiment(const ExperimentManifest& m) {
  const auto replicas = run_replicas(m);
  const Environment env(m.alpha, m.n);
  const double configurations = std::ldexp(1.0, m.n);
  Artifacts a;
  Csv results({"replica", "lo", "hi", "hits", "rate"});
  Csv overlay({"lo", "hi", "limit_rate", "finite_n_rate"});
  for (std::size_t i = 0; i < m.intervals.size(); ++i) {
    const auto& iv = m.intervals[i];
    std::uint64_t pooled = 0;
    for (std::uint64_t r = 0; r < replicas.size(); ++r) {
      const std::uint64_t hits = replicas[r].interval_hits[i];
      pooled += hits;
      results.cell(r).cell(iv.lo()).cell(iv.hi()).cell(hits).cell(rate_from(hits, configurations, m.n)).end();
    }
    const double q = interval_probability(env, iv);
    overlay.cell(iv.lo())
        .cell(iv.hi())
        .cell(rate_function(m.alpha, iv.inf_abs()).to_double())
        .cell(q > 0.0 ? -std::log(q) / m.n : std::numeric_limits<double>::infinity())
        .end();
    a.aggregates["intervals"].push_back(
        {{"lo", number_json(iv.lo())},
         {"hi", number_json(iv.hi())},
         {"pooled_hits", pooled},
         {"pooled_rate", number_json(rate_from(static_cast<double>(pooled), configurations * replicas.size(), m.n))}});
  }

  for (const auto& c : m.checks) {
    CheckResult res;
    res.kind = c.kind;
    if (c.kind == "rate_in_range") {
      const OpenInterval iv = interval_param(c.params.at("interval"));
      const std::size_t i = interval_index(m, iv);
      std::uint64_t pooled = 0;
      for (const auto& rr : replicas) {
        pooled += rr.interval_hits[i];
      }
      res.value = rate_from(static_cast<double>(pooled), configurations * replicas.size(), m.n);
      res.threshold = param(c, "max");
      res.passed = res.value >= param(c, "min") && res.value <= param(c, "max");
      res.detail = to_string(iv) + " pooled hits=" + std::to_string(pooled) + ", range [" +
                   format_number(param(c, "min")) + ", " + format_number(param(c, "max")) + "]";
    } else if (c.kind == "no_hits") {
      const OpenInterval iv = interval_param(c.params.at("interval"));
      const std::size_t i = interval_index(m, iv);
      std::uint64_t pooled = 0;
      for (const auto& rr : replicas) {
        pooled += rr.interval_hits[i];
      }
      res.value = static_cast<double>(pooled);
      res.threshold = 0.0;
      res.passed = pooled == 0;
      res.detail = to_string(iv) + " hits over all replicas";
    } else if (c.kind == "fraction_below") {
      const double bound = param(c, "bound");
      std::uint64_t below = 0;
      double largest = 0.0;
      for (const auto& rr : replicas) {
        double fraction = 0.0;
        for (const auto& v : c.params.at("intervals")) {
          fraction += static_cast<double>(rr.interval_hits[interval_index(m, interval_param(v))]) / configurations;
        }
        largest = std::max(largest, fraction);
        below += fraction < bound ? 1 : 0;
      }
      res.value = static_cast<double>(below);
      res.threshold = static_cast<double>(c.params.at("min_replicas").get<std::uint64_t>());
      res.passed = res.value >= res.threshold;
      res.detail = "replicas with mass fraction below " + format_number(bound) + ": " + std::to_string(below) + "/" +
                   std::to_string(replicas.size()) + ", largest fraction " + format_number(largest);
    }
    a.checks.push_back(res);
  }
  a.results = results.text();
  a.overlay = overlay.text();
  return a;
}

// ---- marginals -------------------------------------------------------------

Artifacts marginals_experiment(const ExperimentManifest& m) {
  const auto replicas = run_replicas(m);
  const std::size_t cells = std::size_t{1} << m.k_marginal;
  const double uniform = 1.0 / static_cast<double>(cells);
  Artifacts a;
  Csv results({"beta", "replica", "sigma", "spins", "rho"});
  Csv overlay({"beta", "regime", "limit"});
  for (double beta : m.betas) {
    double worst = 0.0;
    for (std::uint64_t r = 0; r < replicas.size(); ++r) {
      const auto& table = replicas[r].marginal_for(beta);
      for (std::size_t s = 0; s < cells; ++s) {
        std::string spins;
        for (int j = 0; j < m.k_marginal; ++j) {
          spins.push_back((s >> j) & 1 ? '+' : '-');
        }
        results.cell(beta).cell(r).cell(static_cast<std::uint64_t>(s)).cell(spins).cell(table[s]).end();
        worst = std::max(worst, std::abs(table[s] - uniform));
      }
    }
    overlay.cell(beta).cell(to_string(diagnose_phase(m.alpha, beta).regime)).cell(uniform).end();
    a.aggregates["max_deviation"].push_back({{"beta", beta}, {"value", worst}});
  }
  for (const auto& c : m.checks) {
    CheckResult res;
    res.kind = c.kind;
    if (c.kind == "max_marginal_deviation") {
      const double beta = param(c, "beta");
      double worst = 0.0;
      for (const auto& rr : replicas) {
        for (double rho : rr.marginal_for(beta)) {
          worst = std::max(worst, std::abs(rho - uniform));
        }
      }
      res.value = worst;
      res.threshold = param(c, "tolerance");
      res.passed = worst < res.threshold;
      res.detail = "beta=" + format_number(beta) + " K=" + std::to_string(m.k_marginal);
    }
    a.checks.push_back(res);
  }
  a.results = results.text();
  a.overlay = overlay.text();
  return a;
}

// ---- exceedance ------------------------------------------------------------

Artifacts exceedance_experiment(const ExperimentManifest& m) {
  const auto replicas = run_replicas(m);
  Artifacts a;
  Csv results({"replica", "b", "count"});
  Csv positions({"replica", "value"});
  Csv overlay({"b", "k", "probability"});
  bool complete = true;
  for (std::uint64_t r = 0; r < replicas.size(); ++r) {
    for (std::size_t i = 0; i < m.b_levels.size(); ++i) {
      results.cell(r).cell(m.b_levels[i]).cell(replicas[r].exceedance[i]).end();
    }
    for (double v : replicas[r].exceedance_values) {
      positions.cell(r).cell(v).end();
    }
    complete = complete && replicas[r].exceedance_values_complete;
  }
  for (double b : m.b_levels) {
    for (unsigned k = 0; k <= 10; ++k) {
      overlay.cell(b).cell(static_cast<std::uint64_t>(k)).cell(poisson_count_pmf(b, k)).end();
    }
  }
  a.aggregates["positions_complete"] = complete;

  auto counts_at = [&](double b) {
    std::vector<std::uint64_t> counts;
    const std::size_t i = index_of(m.b_levels, b);
    for (const auto& rr : replicas) {
      counts.push_back(rr.exceedance[i]);
    }
    return counts;
  };

  for (const auto& c : m.checks) {
    CheckResult res;
    res.kind = c.kind;
    const double b = param(c, "b");
    if (c.kind == "zero_fraction") {
      const auto counts = counts_at(b);
      const double zeros = static_cast<double>(std::count(counts.begin(), counts.end(), 0));
      const double fraction = zeros / static_cast<double>(counts.size());
      const double expected = poisson_count_pmf(b, 0);
      res.value = std::abs(fraction - expected);
      res.threshold = param(c, "tolerance");
      res.passed = res.value <= res.threshold;
      res.detail = "P(count=0) empirical " + format_number(fraction) + " vs " + format_number(expected);
    } else if (c.kind == "count_chi_square") {
      const auto k_max = c.params.at("k_max").get<unsigned>();
      std::vector<std::uint64_t> observed(k_max + 1, 0);
      for (auto count : counts_at(b)) {
        ++observed[std::min<std::uint64_t>(count, k_max)];
      }
      std::vector<double> probs(k_max + 1);
      double head = 0.0;
      for (unsigned k = 0; k < k_max; ++k) {
        probs[k] = poisson_count_pmf(b, k);
        head += probs[k];
      }
      probs[k_max] = 1.0 - head;
      const TestReport report = chi_square_gof(observed, probs, param(c, "level"));
      res.value = report.p_value;
      res.threshold = report.level;
      res.passed = report.passed();
      res.detail = "chi2=" + format_number(report.statistic) + " bins=" + std::to_string(report.sample_sizes.second);
    } else if (c.kind == "positions_ks") {
      std::vector<double> pooled;
      for (const auto& rr : replicas) {
        for (double v : rr.exceedance_values) {
          if (v >= b) {
            pooled.push_back(v);
          }
        }
      }
      if (!complete || pooled.empty()) {
        res.passed = false;
        res.detail = complete ? "no exceedances recorded" : "exceedance values were truncated";
      } else {
        const TestReport report =
            ks_one_sample(pooled, [b](double t) { return t <= b ? 0.0 : -std::expm1(-(t - b)); }, param(c, "level"));
        res.value = report.p_value;
        res.threshold = report.level;
        res.passed = report.passed();
        res.detail = "D=" + format_number(report.statistic) + " n=" + std::to_string(pooled.size());
      }
    }
    a.checks.push_back(res);
  }
  a.results = results.text();
  a.overlay = overlay.text();
  a.positions = positions.text();
  return a;
}

// ---- Poisson-Dirichlet comparison -----------------------------------------

struct SequenceStats {
  double w1 = 0.0;
  double w1_plus_w2 = 0.0;
  double sum_sq = 0.0;
  double deficit = 0.0;
};

SequenceStats stats_of(const std::vector<double>& w, double deficit) {
  SequenceStats s;
  s.w1 = w.empty() ? 0.0 : w[0];
  s.w1_plus_w2 = s.w1 + (w.size() > 1 ? w[1] : 0.0);
  for (double x : w) {
    s.sum_sq += x * x;
  }
  s.deficit = deficit;
  return s;
}

double pick(const SequenceStats& s, const std::string& name) {
  if (name == "w1") {
    return s.w1;
  }
  if (name == "w1_plus_w2") {
    return s.w1_plus_w2;
  }
  return s.sum_sq;
}

Artifacts pd_compare_experiment(const ExperimentManifest& m) {
  const double beta = m.betas.front();
  const PDBlock& pd = *m.pd;
  const auto replicas = run_replicas(m);

  std::vector<SequenceStats> gibbs;
  for (const auto& rr : replicas) {
    const auto& spectrum = rr.spectrum_for(beta);
    gibbs.push_back(stats_of(spectrum.weights, spectrum.tail_mass));
  }
  PDParams params;
  params.m = pd.m;
  params.epsilon_mass = pd.epsilon_mass;
  params.max_points = pd.max_points;
  params.truncation_b = pd.truncation_b;
  std::vector<SequenceStats> poisson;
  std::vector<SequenceStats> stick;
  for (std::uint64_t d = 0; d < pd.draws; ++d) {
    CounterStream ps(seed_derivation(m.master_seed, d, StreamLabel::point_process));
    const WeightSequence w = sample_pd_poisson(beta, params, ps);
    poisson.push_back(stats_of(w.entries, w.deficit));
    CounterStream ss(seed_derivation(m.master_seed, d, StreamLabel::stick_breaking));
    const WeightSequence v = sample_pd_stick(pd.m, pd.stick_length, ss);
    stick.push_back(stats_of(v.entries, v.deficit));
  }

  Artifacts a;
  Csv results({"source", "draw", "w1", "w1_plus_w2", "sum_sq", "deficit"});
  auto emit = [&](const char* source, const std::vector<SequenceStats>& rows) {
    std::vector<double> sq;
    for (std::uint64_t i = 0; i < rows.size(); ++i) {
      results.cell(source).cell(i).cell(rows[i].w1).cell(rows[i].w1_plus_w2).cell(rows[i].sum_sq).cell(rows[i].deficit).end();
      sq.push_back(rows[i].sum_sq);
    }
    json entry = summary_of(sq);
    entry["source"] = source;
    a.aggregates["sum_sq"].push_back(entry);
  };
  emit("gibbs", gibbs);
  emit("pd_poisson", poisson);
  emit("pd_stick", stick);
  Csv overlay({"beta", "m", "expected_sum_sq"});
  overlay.cell(beta).cell(pd.m).cell(1.0 - pd.m).end();

  auto column = [](const std::vector<SequenceStats>& rows, const std::string& name) {
    std::vector<double> out;
    for (const auto& r : rows) {
      out.push_back(pick(r, name));
    }
    return out;
  };
  for (const auto& c : m.checks) {
    CheckResult res;
    res.kind = c.kind;
    const std::string statistic = c.params.at("statistic").get<std::string>();
    const auto& lhs = c.kind == "gibbs_vs_pd_ks" ? gibbs : poisson;
    const auto& rhs = c.kind == "gibbs_vs_pd_ks" ? poisson : stick;
    const TestReport report = ks_two_sample(column(lhs, statistic), column(rhs, statistic));
    res.value = report.statistic;
    res.threshold = param(c, "max_statistic");
    res.passed = report.statistic < res.threshold;
    res.detail = statistic + " D=" + format_number(report.statistic) + " p=" + format_number(report.p_value);
    a.checks.push_back(res);
  }
  a.results = results.text();
  a.overlay = overlay.text();
  return a;
}

// ---- theory diagnostics ----------------------------------------------------

Artifacts diagnostics_experiment(const ExperimentManifest& m) {
  Artifacts a;
  Csv results({"bound", "alpha", "beta", "delta", "n", "lo", "hi", "exact", "bound_value", "relation", "holds"});
  std::uint64_t total = 0;
  std::uint64_t violated = 0;
  for (const auto& grid : {interval_bound_grid(), moment_bound_grid()}) {
    for (const auto& b : grid) {
      ++total;
      violated += b.holds() ? 0 : 1;
      results.cell(b.name)
          .cell(b.alpha)
          .cell(b.beta)
          .cell(b.delta)
          .cell(b.n)
          .cell(b.lo)
          .cell(b.hi)
          .cell(b.exact)
          .cell(b.bound)
          .cell(to_string(b.relation))
          .cell(b.holds() ? "true" : "false")
          .end();
    }
  }
  Csv overlay({"alpha", "beta", "free_energy_limit", "critical_beta", "regime"});
  for (double beta : m.betas) {
    const PhaseDiagnosis d = diagnose_phase(m.alpha, beta);
    overlay.cell(m.alpha).cell(beta).cell(free_energy_limit(m.alpha, beta)).cell(d.beta_critical).cell(to_string(d.regime)).end();
  }
  a.aggregates["bounds_evaluated"] = total;
  a.aggregates["bounds_violated"] = violated;
  for (const auto& c : m.checks) {
    CheckResult res;
    res.kind = c.kind;
    res.value = static_cast<double>(violated);
    res.threshold = 0.0;
    res.passed = violated == 0;
    res.detail = std::to_string(violated) + " of " + std::to_string(total) + " inequalities violated";
    a.checks.push_back(res);
  }
  a.results = results.text();
  a.overlay = overlay.text();
  return a;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

bool ExperimentOutcome::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string format_number(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

std::uint64_t retry_seed(std::uint64_t master_seed) {
  // The stream word alone depends only on (replica, label); draw from the
  // retry stream so the result depends on the master seed too.
  const PhiloxBlock b = philox_block(seed_derivation(master_seed, 0, StreamLabel::retry), 0);
  return (std::uint64_t{b[0]} << 32) | b[1];
}

unsigned resolve_workers(const ExperimentManifest& manifest, std::optional<unsigned> override_workers) {
  if (override_workers) {
    return std::max(1u, *override_workers);
  }
  if (manifest.workers) {
    return *manifest.workers;
  }
  if (const char* env = std::getenv("REMLAB_WORKERS"); env != nullptr && *env != '\0') {
    unsigned value = 0;
    const auto [end, ec] = std::from_chars(env, env + std::strlen(env), value);
    if (ec == std::errc() && *end == '\0' && value >= 1) {
      return value;
    }
    throw ManifestError(0, "REMLAB_WORKERS must be a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentManifest resolve(ExperimentManifest manifest, const RunOverrides& overrides) {
  manifest.workers = resolve_workers(manifest, overrides.workers);
  if (overrides.output_dir) {
    manifest.output_dir = *overrides.output_dir;
  }
  if (overrides.master_seed) {
    manifest.master_seed = *overrides.master_seed;
  }
  return manifest;
}

ExperimentOutcome run_experiment(const ExperimentManifest& input) {
  ExperimentManifest m = input.workers ? input : resolve(input);
  const std::filesystem::path dir(m.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }

  const std::string started = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  Artifacts a;
  switch (m.experiment) {
    case ExperimentKind::free_energy:
      a = free_energy_experiment(m);
      break;
    case ExperimentKind::rate_function:
      a = rate_function_experiment(m);
      break;
    case ExperimentKind::marginals:
      a = marginals_experiment(m);
      break;
    case ExperimentKind::exceedance:
      a = exceedance_experiment(m);
      break;
    case ExperimentKind::pd_compare:
      a = pd_compare_experiment(m);
      break;
    case ExperimentKind::diagnostics:
      a = diagnostics_experiment(m);
      break;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ExperimentOutcome outcome{m, dir, a.checks, elapsed};
  std::vector<std::string> files{"results.csv", "overlay.csv", "manifest.json", "summary.json"};
  write_file(dir / "results.csv", a.results);
  write_file(dir / "overlay.csv", a.overlay);
  if (a.positions) {
    write_file(dir / "positions.csv", *a.positions);
    files.insert(files.begin() + 2, "positions.csv");
  }
  write_file(dir / "manifest.json", serialize(m));

  json summary;
  summary["experiment"] = std::string(to_string(m.experiment));
  summary["passed"] = outcome.passed();
  summary["checks"] = json::array();
  for (const auto& c : a.checks) {
    summary["checks"].push_back({{"kind", c.kind},
                                 {"passed", c.passed},
                                 {"value", number_json(c.value)},
                                 {"threshold", number_json(c.threshold)},
                                 {"detail", c.detail}});
  }
  summary["seeds"] = {{"master_seed", m.master_seed},
                      {"replicas", m.replicas},
                      {"generator", "philox4x32-10"},
                      {"derivation", "key = mix64(master_seed), stream = mix64(replica_id << 16 | label)"}};
  summary["workers"] = *m.workers;
  summary["versions"] = {{"remlab", REMLAB_VERSION},
                         {"compiler", __VERSION__},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  summary["started_at"] = started;
  summary["elapsed_seconds"] = elapsed;
  summary["files"] = files;
  summary["aggregates"] = a.aggregates;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  return outcome;
}

}  // namespace remlab
