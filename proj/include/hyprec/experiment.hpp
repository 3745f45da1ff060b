#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hyprec/bcd.hpp"

namespace hyprec::cli {

enum class ExperimentKind { Convergence, RateVsPower, PsdStudy, EmissionTradeoff, Robustness, RcgVsCd };

ExperimentKind kind_from_string(const std::string& s);
std::string to_string(ExperimentKind k);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Convergence;
  SystemConfig config;
  std::string sweep_axis;  // empty: single point
  std::vector<double> sweep_values;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  bcd::BcdOptions bcd;
  int eval_draws = 100;                 // robustness: phase-error draws per evaluation
  std::vector<std::string> methods{"proposed", "mmse_identity_weights", "random_ps"};  // rate_vs_power
  double robust_sigma_deg = 30;         // robustness: sigma used for robust training when not swept
};

/// Parses and validates an experiment document. Throws ParameterError.
ExperimentSpec spec_from_json(const std::string& text);
/// N_t = 64 and S = 32, everything else unchanged.
void apply_paper_scale(ExperimentSpec& spec);

/// Config and options for one sweep point.
std::pair<SystemConfig, bcd::BcdOptions> apply_sweep(const ExperimentSpec& spec, size_t index);

struct RunRecord {
  size_t sweep_index = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, std::string>> files;  // relative path, contents
  std::vector<std::string> warnings;
};

struct ExperimentOutput {
  std::vector<RunRecord> runs;  // ordered by (sweep index, seed position)
  std::string summary_csv;
  std::string manifest_json;
};

/// Runs every (sweep point, seed) pair on a pool of `threads` workers.
ExperimentOutput run_experiment(const ExperimentSpec& spec, int threads = 1);
/// Writes per-run files, summary.csv and manifest.json below spec.output_dir.
void write_outputs(const ExperimentSpec& spec, const ExperimentOutput& out);

std::string format_number(double v);

}  // namespace hyprec::cli
