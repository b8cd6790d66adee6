#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "remlab/manifest.hpp"

namespace remlab {

enum class ExitCode : int { success = 0, checks_failed = 1, invalid_input = 2, runtime_failure = 3 };

struct CheckResult {
  std::string kind;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Command-line overrides; each one beats the manifest field.
struct RunOverrides {
  std::optional<unsigned> workers;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> master_seed;
};

/// Worker count precedence: override, manifest, REMLAB_WORKERS, then the
/// hardware thread count.
unsigned resolve_workers(const ExperimentManifest& manifest, std::optional<unsigned> override_workers = {});

/// Applies overrides and pins `workers` to a concrete count.
ExperimentManifest resolve(ExperimentManifest manifest, const RunOverrides& overrides = {});

struct ExperimentOutcome {
  ExperimentManifest manifest;  // as resolved and run
  std::filesystem::path output_dir;
  std::vector<CheckResult> checks;
  double elapsed_seconds = 0.0;

  bool passed() const noexcept;
};

/// Runs every replica, writes results.csv, overlay.csv (plus positions.csv
/// for exceedance runs), manifest.json and summary.json into output_dir, and
/// evaluates the attached checks. CSV bytes depend only on the manifest, not
/// on the worker count. Throws std::runtime_error when output_dir cannot be
/// written.
ExperimentOutcome run_experiment(const ExperimentManifest& manifest);

/// Shortest decimal that parses back to the same double; "inf", "-inf",
/// "nan" for non-finite values.
std::string format_number(double value);

/// Master seed for a rerun of a statistical check, derived from the original.
std::uint64_t retry_seed(std::uint64_t master_seed);

/// Built-in manifests behind `remlab verify` and the acceptance test.
struct BuiltinManifest {
  std::string name;
  /// Acceptance criterion each check belongs to, parallel to the checks.
  std::vector<int> check_criteria;
  /// Statistical checks get one rerun under retry_seed on failure.
  bool retry_on_failure = false;
  std::string_view json;
};

const std::vector<BuiltinManifest>& builtin_manifests();

struct BuiltinOutcome {
  ExperimentOutcome first;
  std::optional<ExperimentOutcome> retry;

  /// True when every check tagged `criterion` passed in the first run, or
  /// in the rerun when the manifest allows one.
  bool criterion_passed(const BuiltinManifest& builtin, int criterion) const;
  bool passed(const BuiltinManifest& builtin) const;
};

/// Runs a built-in manifest, rerunning once under retry_seed when a check
/// fails and the manifest allows it. `overrides.output_dir` is a parent
/// directory here; each manifest writes to <parent>/<name>.
BuiltinOutcome run_builtin(const BuiltinManifest& builtin, const RunOverrides& overrides = {});

}  // namespace remlab
