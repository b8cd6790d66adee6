// remlab command line: run a manifest, run the built-in verification suite,
// or print the limiting free energy for (alpha, beta).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "remlab/experiment.hpp"
#include "remlab/manifest.hpp"
#include "remlab/theory.hpp"

namespace {

using remlab::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

void print_checks(const remlab::ExperimentOutcome& outcome) {
  for (const auto& c : outcome.checks) {
    std::printf("  %-4s %-24s value=%s threshold=%s  %s\n", c.passed ? "ok" : "FAIL", c.kind.c_str(),
                remlab::format_number(c.value).c_str(), remlab::format_number(c.threshold).c_str(), c.detail.c_str());
  }
}

int run_command(const std::string& path, const remlab::RunOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "remlab: cannot read manifest " << path << "\n";
    return code(ExitCode::invalid_input);
  }
  std::stringstream text;
  text << in.rdbuf();

  remlab::ExperimentManifest manifest;
  try {
    manifest = remlab::resolve(remlab::parse_manifest(text.str()), overrides);
  } catch (const remlab::ManifestError& e) {
    std::cerr << path << ":" << e.what() << "\n";
    return code(ExitCode::invalid_input);
  }

  remlab::ExperimentOutcome outcome;
  try {
    outcome = remlab::run_experiment(manifest);
  } catch (const std::invalid_argument& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return code(ExitCode::invalid_input);
  } catch (const std::exception& e) {
    std::cerr << "remlab: " << e.what() << "\n";
    return code(ExitCode::runtime_failure);
  }
  std::printf("%s: %s in %.2fs, workers=%u, output %s\n", std::string(remlab::to_string(manifest.experiment)).c_str(),
              outcome.passed() ? "passed" : "FAILED", outcome.elapsed_seconds, *outcome.manifest.workers,
              outcome.output_dir.string().c_str());
  print_checks(outcome);
  return code(outcome.passed() ? ExitCode::success : ExitCode::checks_failed);
}

int verify_command(const remlab::RunOverrides& overrides) {
  bool all = true;
  for (const auto& builtin : remlab::builtin_manifests()) {
    remlab::BuiltinOutcome outcome;
    try {
      outcome = remlab::run_builtin(builtin, overrides);
    } catch (const remlab::ManifestError& e) {
      std::cerr << "remlab: " << builtin.name << ": " << e.what() << "\n";
      return code(ExitCode::invalid_input);
    } catch (const std::exception& e) {
      std::cerr << "remlab: " << builtin.name << ": " << e.what() << "\n";
      return code(ExitCode::runtime_failure);
    }
    const bool ok = outcome.passed(builtin);
    all = all && ok;
    std::printf("%-4s %s (%.2fs)\n", ok ? "PASS" : "FAIL", builtin.name.c_str(), outcome.first.elapsed_seconds);
    print_checks(outcome.first);
    if (outcome.retry) {
      std::printf("  rerun with seed %llu:\n", static_cast<unsigned long long>(outcome.retry->manifest.master_seed));
      print_checks(*outcome.retry);
    }
  }
  return code(all ? ExitCode::success : ExitCode::checks_failed);
}

int theory_command(double alpha, double beta) {
  try {
    const auto phase = remlab::diagnose_phase(alpha, beta);
    std::printf("free_energy_limit %s\ncritical_beta %s\nregime %s\n",
                remlab::format_number(remlab::free_energy_limit(alpha, beta)).c_str(),
                remlab::format_number(phase.beta_critical).c_str(), std::string(remlab::to_string(phase.regime)).c_str());
  } catch (const std::invalid_argument& e) {
    std::cerr << "remlab: " << e.what() << "\n";
    return code(ExitCode::invalid_input);
  }
  return code(ExitCode::success);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random energy model simulator and verification suite", "remlab"};
  app.require_subcommand(1);

  std::string manifest_path;
  unsigned workers = 0;
  std::string output_dir;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run one experiment manifest");
  run->add_option("manifest", manifest_path, "Manifest JSON file")->required();
  run->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1u, 4096u));
  run->add_option("--output-dir", output_dir, "Directory for the CSV and JSON artifacts");
  run->add_option("--seed", seed, "Master seed");

  auto* verify = app.add_subcommand("verify", "Run the built-in acceptance manifests");
  verify->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1u, 4096u));
  std::string verify_dir = "remlab_verify";
  verify->add_option("--output-dir", verify_dir, "Parent directory for the artifacts");

  double alpha = 1.0;
  double beta = 1.0;
  auto* theory = app.add_subcommand("theory", "Print the limiting free energy, critical beta and regime");
  theory->add_option("alpha", alpha, "Environment exponent, >= 1")->required();
  theory->add_option("beta", beta, "Inverse temperature, > 0")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : code(ExitCode::invalid_input);
  }

  remlab::RunOverrides overrides;
  if (workers > 0) {
    overrides.workers = workers;
  }
  if (!output_dir.empty()) {
    overrides.output_dir = output_dir;
  }

  try {
    if (*run) {
      if (run->count("--seed") > 0) {
        overrides.master_seed = seed;
      }
      return run_command(manifest_path, overrides);
    }
    if (*verify) {
      overrides.output_dir = verify_dir;
      return verify_command(overrides);
    }
    return theory_command(alpha, beta);
  } catch (const remlab::ManifestError& e) {
    std::cerr << "remlab: " << e.what() << "\n";
    return code(ExitCode::invalid_input);
  }
}
