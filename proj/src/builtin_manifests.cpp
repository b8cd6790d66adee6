#include "remlab/experiment.hpp"

namespace remlab {

namespace {

constexpr std::string_view kFreeEnergyLaplace = R"({
  "experiment": "free_energy",
  "env": {"alpha": 1, "n": 24},
  "betas": [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0],
  "replicas": 16,
  "master_seed": 1001,
  "top_m": 1,
  "checks": [
    {"kind": "mean_within", "beta": 0.5, "tolerance": 0.02},
    {"kind": "mean_within", "beta": 2.0, "tolerance": 0.10},
    {"kind": "convex_nondecreasing"},
    {"kind": "max_deviation_near", "center": 1.0, "window": 0.25}
  ],
  "output_dir": "remlab_verify/free_energy_laplace"
}
)";

constexpr std::string_view kFreeEnergyGaussian = R"({
  "experiment": "free_energy",
  "env": {"alpha": 2, "n": 24},
  "betas": [0.5, 2.0],
  "replicas": 16,
  "master_seed": 1002,
  "top_m": 1,
  "checks": [
    {"kind": "mean_within", "beta": 0.5, "tolerance": 0.02},
    {"kind": "mean_within", "beta": 2.0, "tolerance": 0.12}
  ],
  "output_dir": "remlab_verify/free_energy_gaussian"
}
)";

constexpr std::string_view kRateLaplace = R"({
  "experiment": "rate_function",
  "env": {"alpha": 1, "n": 25},
  "betas": [1.0],
  "replicas": 8,
  "master_seed": 1003,
  "intervals": [[0.2, 0.3], [0.8, 0.9]],
  "top_m": 1,
  "checks": [
    {"kind": "rate_in_range", "interval": [0.2, 0.3], "min": 0.18, "max": 0.27},
    {"kind": "no_hits", "interval": [0.8, 0.9]}
  ],
  "output_dir": "remlab_verify/rate_laplace"
}
)";

constexpr std::string_view kConcentrationLaplace = R"({
  "experiment": "rate_function",
  "env": {"alpha": 1, "n": 24},
  "betas": [1.0],
  "replicas": 8,
  "master_seed": 1004,
  "intervals": [["-inf", -0.1], [0.1, "inf"]],
  "top_m": 1,
  "checks": [
    {"kind": "fraction_below", "intervals": [["-inf", -0.1], [0.1, "inf"]], "bound": 0.136, "min_replicas": 8},
    {"kind": "fraction_below", "intervals": [["-inf", -0.1], [0.1, "inf"]], "bound": 0.1, "min_replicas": 7}
  ],
  "output_dir": "remlab_verify/concentration_laplace"
}
)";

constexpr std::string_view kMarginalsLaplace = R"({
  "experiment": "marginals",
  "env": {"alpha": 1, "n": 22},
  "betas": [0.5],
  "replicas": 1,
  "master_seed": 1005,
  "k_marginal": 2,
  "top_m": 1,
  "checks": [
    {"kind": "max_marginal_deviation", "beta": 0.5, "tolerance": 0.01}
  ],
  "output_dir": "remlab_verify/marginals_laplace"
}
)";

constexpr std::string_view kMarginalsGaussian = R"({
  "experiment": "marginals",
  "env": {"alpha": 2, "n": 22},
  "betas": [0.8],
  "replicas": 1,
  "master_seed": 1006,
  "k_marginal": 2,
  "top_m": 1,
  "checks": [
    {"kind": "max_marginal_deviation", "beta": 0.8, "tolerance": 0.02}
  ],
  "output_dir": "remlab_verify/marginals_gaussian"
}
)";

constexpr std::string_view kExceedanceLaplace = R"({
  "experiment": "exceedance",
  "env": {"alpha": 1, "n": 20},
  "betas": [1.0],
  "replicas": 2000,
  "master_seed": 1007,
  "b_levels": [0.0],
  "top_m": 1,
  "checks": [
    {"kind": "zero_fraction", "b": 0.0, "tolerance": 0.03},
    {"kind": "count_chi_square", "b": 0.0, "k_max": 5, "level": 0.001},
    {"kind": "positions_ks", "b": 0.0, "level": 0.001}
  ],
  "output_dir": "remlab_verify/exceedance_laplace"
}
)";

constexpr std::string_view kGibbsVsPd = R"({
  "experiment": "pd_compare",
  "env": {"alpha": 1, "n": 20},
  "betas": [2.0],
  "replicas": 400,
  "master_seed": 1008,
  "top_m": 1024,
  "pd": {"m": 0.5, "epsilon_mass": 1e-4, "draws": 400, "stick_length": 1000},
  "checks": [
    {"kind": "gibbs_vs_pd_ks", "statistic": "w1", "max_statistic": 0.115},
    {"kind": "gibbs_vs_pd_ks", "statistic": "sum_sq", "max_statistic": 0.115}
  ],
  "output_dir": "remlab_verify/gibbs_vs_pd"
}
)";

constexpr std::string_view kPdConstructions = R"({
  "experiment": "pd_compare",
  "env": {"alpha": 1, "n": 8},
  "betas": [2.0],
  "replicas": 1,
  "master_seed": 1009,
  "top_m": 16,
  "pd": {"m": 0.5, "epsilon_mass": 1e-4, "draws": 1000, "stick_length": 1000},
  "checks": [
    {"kind": "pd_vs_stick_ks", "statistic": "w1", "max_statistic": 0.10}
  ],
  "output_dir": "remlab_verify/pd_constructions"
}
)";

constexpr std::string_view kBounds = R"({
  "experiment": "diagnostics",
  "env": {"alpha": 1, "n": 10},
  "betas": [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0],
  "replicas": 1,
  "master_seed": 1010,
  "checks": [
    {"kind": "bounds_hold"}
  ],
  "output_dir": "remlab_verify/bounds"
}
)";

}  // namespace

const std::vector<BuiltinManifest>& builtin_manifests() {
  static const std::vector<BuiltinManifest> manifests{
      {"free_energy_laplace", {1, 2, 4, 4}, false, kFreeEnergyLaplace},
      {"free_energy_gaussian", {3, 3}, false, kFreeEnergyGaussian},
      {"rate_laplace", {5, 5}, true, kRateLaplace},
      {"concentration_laplace", {6, 6}, false, kConcentrationLaplace},
      {"marginals_laplace", {7}, false, kMarginalsLaplace},
      {"marginals_gaussian", {8}, false, kMarginalsGaussian},
      {"exceedance_laplace", {9, 9, 9}, true, kExceedanceLaplace},
      {"gibbs_vs_pd", {10, 10}, true, kGibbsVsPd},
      {"pd_constructions", {11}, true, kPdConstructions},
      {"bounds", {12}, false, kBounds},
  };
  return manifests;
}

namespace {

bool tagged_checks_pass(const BuiltinManifest& builtin, const ExperimentOutcome& run, int criterion) {
  bool any = false;
  for (std::size_t i = 0; i < builtin.check_criteria.size() && i < run.checks.size(); ++i) {
    if (builtin.check_criteria[i] == criterion) {
      any = true;
      if (!run.checks[i].passed) {
        return false;
      }
    }
  }
  return any;
}

}  // namespace

bool BuiltinOutcome::criterion_passed(const BuiltinManifest& builtin, int criterion) const {
  if (tagged_checks_pass(builtin, first, criterion)) {
    return true;
  }
  return builtin.retry_on_failure && retry && tagged_checks_pass(builtin, *retry, criterion);
}

bool BuiltinOutcome::passed(const BuiltinManifest& builtin) const {
  for (int c : builtin.check_criteria) {
    if (!criterion_passed(builtin, c)) {
      return false;
    }
  }
  return true;
}

BuiltinOutcome run_builtin(const BuiltinManifest& builtin, const RunOverrides& overrides) {
  ExperimentManifest manifest = parse_manifest(builtin.json);
  RunOverrides local = overrides;
  if (overrides.output_dir) {
    local.output_dir = (std::filesystem::path(*overrides.output_dir) / builtin.name).string();
  }
  manifest = resolve(manifest, local);
  BuiltinOutcome outcome{run_experiment(manifest), std::nullopt};
  if (!outcome.first.passed() && builtin.retry_on_failure) {
    manifest.master_seed = retry_seed(manifest.master_seed);
    manifest.output_dir += "_retry";
    outcome.retry = run_experiment(manifest);
  }
  return outcome;
}

}  // namespace remlab
