#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "remlab/engine.hpp"
#include "remlab/experiment.hpp"
#include "remlab/manifest.hpp"
#include "remlab/pointprocess.hpp"
#include "remlab/stats.hpp"
#include "remlab/theory.hpp"

namespace py = pybind11;
using namespace remlab;

namespace {

using Pair = std::pair<double, double>;

std::vector<OpenInterval> to_intervals(const std::vector<Pair>& pairs) {
  std::vector<OpenInterval> out;
  out.reserve(pairs.size());
  for (const auto& [lo, hi] : pairs) {
    out.emplace_back(lo, hi);
  }
  return out;
}

py::dict check_dict(const CheckResult& c) {
  py::dict d;
  d["kind"] = c.kind;
  d["passed"] = c.passed;
  d["value"] = c.value;
  d["threshold"] = c.threshold;
  d["detail"] = c.detail;
  return d;
}

py::dict outcome_dict(const ExperimentOutcome& o) {
  py::dict d;
  d["passed"] = o.passed();
  d["output_dir"] = o.output_dir.string();
  d["elapsed_seconds"] = o.elapsed_seconds;
  d["workers"] = o.manifest.workers.value_or(0);
  d["master_seed"] = o.manifest.master_seed;
  py::list checks;
  for (const auto& c : o.checks) {
    checks.append(check_dict(c));
  }
  d["checks"] = checks;
  return d;
}

py::dict sequence_dict(const WeightSequence& w) {
  py::dict d;
  d["weights"] = w.entries;
  d["deficit"] = w.deficit;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random energy model simulator";

  py::register_exception<ManifestError>(m, "ManifestError", PyExc_ValueError);

  m.def("critical_beta", &critical_beta, py::arg("alpha"));
  m.def("free_energy_limit", &free_energy_limit, py::arg("alpha"), py::arg("beta"));
  m.def(
      "diagnose_phase",
      [](double alpha, double beta) {
        const PhaseDiagnosis p = diagnose_phase(alpha, beta);
        return py::dict(py::arg("beta") = p.beta, py::arg("beta_critical") = p.beta_critical,
                        py::arg("regime") = std::string(to_string(p.regime)));
      },
      py::arg("alpha"), py::arg("beta"));
  m.def(
      "rate_function", [](double alpha, double x) { return rate_function(alpha, x).to_double(); },
      py::arg("alpha"), py::arg("x"), "Rate I(x); inf outside the effective domain.");
  m.def("poisson_count_pmf", &poisson_count_pmf, py::arg("b"), py::arg("k"));
  m.def("shift_constant", &shift_constant, py::arg("n"));

  py::class_<ReplicaResult>(m, "ReplicaResult")
      .def_readonly("n", &ReplicaResult::n)
      .def_readonly("betas", &ReplicaResult::betas)
      .def_readonly("log_z", &ReplicaResult::log_z)
      .def_readonly("marginal", &ReplicaResult::marginal)
      .def_readonly("interval_hits", &ReplicaResult::interval_hits)
      .def_readonly("b_levels", &ReplicaResult::b_levels)
      .def_readonly("exceedance", &ReplicaResult::exceedance)
      .def_readonly("exceedance_values", &ReplicaResult::exceedance_values)
      .def_readonly("min_energy", &ReplicaResult::min_energy)
      .def("free_energy", [](const ReplicaResult& r, double beta) { return free_energy(r, beta); })
      .def("weights", [](const ReplicaResult& r, double beta) { return r.spectrum_for(beta).weights; })
      .def("tail_mass", [](const ReplicaResult& r, double beta) { return r.spectrum_for(beta).tail_mass; })
      .def("marginal_for", &ReplicaResult::marginal_for)
      .def("rate", [](const ReplicaResult& r, double lo, double hi) {
        const auto v = rate_estimate(r, OpenInterval(lo, hi));
        return v ? *v : std::numeric_limits<double>::infinity();
      });

  m.def(
      "run_replica",
      [](double alpha, int n, std::vector<double> betas, int k_marginal, const std::vector<Pair>& intervals,
         std::vector<double> b_levels, std::size_t top_m, std::uint64_t master_seed, std::uint64_t replica_id,
         unsigned workers) {
        ReplicaSpec spec;
        spec.env = Environment(alpha, n);
        spec.betas = std::move(betas);
        spec.k_marginal = k_marginal;
        spec.intervals = to_intervals(intervals);
        spec.b_levels = std::move(b_levels);
        spec.top_m = top_m;
        spec.master_seed = master_seed;
        spec.replica_id = replica_id;
        py::gil_scoped_release release;
        return run_replica(spec, {.workers = workers});
      },
      py::arg("alpha"), py::arg("n"), py::arg("betas"), py::arg("k_marginal") = 0,
      py::arg("intervals") = std::vector<Pair>{}, py::arg("b_levels") = std::vector<double>{},
      py::arg("top_m") = 1024, py::arg("master_seed") = 0, py::arg("replica_id") = 0, py::arg("workers") = 1);

  m.def(
      "energies",
      [](double alpha, int n, std::uint64_t master_seed, std::uint64_t replica_id, std::uint64_t first,
         std::size_t count) {
        ReplicaSpec spec;
        spec.env = Environment(alpha, n);
        spec.master_seed = master_seed;
        spec.replica_id = replica_id;
        std::vector<double> out(count);
        fill_energies(spec, first, out);
        return out;
      },
      py::arg("alpha"), py::arg("n"), py::arg("master_seed"), py::arg("replica_id") = 0, py::arg("first") = 0,
      py::arg("count") = 1);

  m.def(
      "sample_pd_poisson",
      [](double beta, double epsilon_mass, std::size_t max_points, std::uint64_t seed, std::uint64_t draw) {
        PDParams p;
        p.m = 1.0 / beta;
        p.epsilon_mass = epsilon_mass;
        p.max_points = max_points;
        CounterStream stream(seed_derivation(seed, draw, StreamLabel::point_process));
        return sequence_dict(sample_pd_poisson(beta, p, stream));
      },
      py::arg("beta"), py::arg("epsilon_mass") = 1e-4, py::arg("max_points") = std::size_t{1} << 22,
      py::arg("seed") = 0, py::arg("draw") = 0);
  m.def(
      "sample_pd_stick",
      [](double m_param, std::size_t length, std::uint64_t seed, std::uint64_t draw) {
        CounterStream stream(seed_derivation(seed, draw, StreamLabel::stick_breaking));
        return sequence_dict(sample_pd_stick(m_param, length, stream));
      },
      py::arg("m"), py::arg("length") = 1000, py::arg("seed") = 0, py::arg("draw") = 0);

  m.def(
      "ks_two_sample",
      [](const std::vector<double>& x, const std::vector<double>& y, double level) {
        const TestReport r = ks_two_sample(x, y, level);
        return py::dict(py::arg("statistic") = r.statistic, py::arg("p_value") = r.p_value,
                        py::arg("passed") = r.passed());
      },
      py::arg("x"), py::arg("y"), py::arg("level") = 0.001);

  m.def(
      "normalize_manifest", [](const std::string& text) { return serialize(parse_manifest(text)); },
      py::arg("text"), "Validate a manifest and return its canonical JSON.");
  m.def(
      "run_manifest",
      [](const std::string& text, std::optional<unsigned> workers, std::optional<std::string> output_dir,
         std::optional<std::uint64_t> seed) {
        RunOverrides o{workers, std::move(output_dir), seed};
        const ExperimentManifest manifest = resolve(parse_manifest(text), o);
        ExperimentOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = run_experiment(manifest);
        }
        return outcome_dict(outcome);
      },
      py::arg("text"), py::arg("workers") = py::none(), py::arg("output_dir") = py::none(),
      py::arg("seed") = py::none());

  m.def("builtin_manifests", [] {
    py::dict d;
    for (const auto& b : builtin_manifests()) {
      d[py::str(b.name)] = std::string(b.json);
    }
    return d;
  });

  m.attr("__version__") = REMLAB_VERSION;
}
