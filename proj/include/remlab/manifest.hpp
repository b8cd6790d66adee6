#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "remlab/environment.hpp"

namespace remlab {

enum class ExperimentKind { free_energy, rate_function, marginals, exceedance, pd_compare, diagnostics };

std::string_view to_string(ExperimentKind kind);

/// Invalid manifest input. `line` is 1-based, 0 when unknown.
class ManifestError : public std::runtime_error {
 public:
  ManifestError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// One statistical or numerical check attached to an experiment. `params`
/// holds the remaining fields of the check object.
struct CheckSpec {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();

  friend bool operator==(const CheckSpec&, const CheckSpec&) = default;
};

struct PDBlock {
  double m = 0.5;
  double epsilon_mass = 1e-6;
  std::uint64_t draws = 1000;
  std::uint64_t max_points = std::uint64_t{1} << 22;
  double truncation_b = 0.0;
  std::uint64_t stick_length = 1000;

  friend bool operator==(const PDBlock&, const PDBlock&) = default;
};

/// Declarative description of one run. The schema is documented in README.md.
struct ExperimentManifest {
  ExperimentKind experiment = ExperimentKind::free_energy;
  double alpha = 1.0;
  int n = 10;
  std::vector<double> betas;
  std::uint64_t replicas = 1;
  std::uint64_t master_seed = 0;
  std::vector<OpenInterval> intervals;
  int k_marginal = 0;
  std::vector<double> b_levels;
  std::uint64_t top_m = 1024;
  std::optional<PDBlock> pd;
  std::vector<CheckSpec> checks;
  std::string output_dir = "remlab_output";
  /// nullopt means "auto".
  std::optional<unsigned> workers;

  friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

/// Parses and validates a manifest document. Throws ManifestError with the
/// line of the offending field.
ExperimentManifest parse_manifest(std::string_view text);

nlohmann::json to_json(const ExperimentManifest& manifest);

/// Pretty-printed JSON; parse_manifest(serialize(m)) == m.
std::string serialize(const ExperimentManifest& manifest);

}  // namespace remlab
