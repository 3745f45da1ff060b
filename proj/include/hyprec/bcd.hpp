#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hyprec/admm.hpp"
#include "hyprec/analog.hpp"
#include "hyprec/manifold.hpp"
#include "hyprec/model.hpp"
#include "hyprec/ofdm.hpp"

namespace hyprec::bcd {

enum class AnalogMethod { CoordinateDescent, Rcg };
enum class Baseline { None, MmseIdentityWeights, RandomPs };

struct BcdOptions {
  int max_outer_iters = 30;
  double outer_tol = 1e-5;  // relative objective change
  AnalogMethod analog_method = AnalogMethod::CoordinateDescent;
  bool robust = false;
  double sigma_e = 0;  // radians, used when robust
  Baseline baseline = Baseline::None;
  admm::AdmmOptions admm;
  analog::CdOptions cd;
  manifold::RcgOptions rcg;
};

/// Everything that stays fixed during one run.
struct Problem {
  SystemConfig cfg;
  model::ChannelSet channels;
  ofdm::SpectralPlan plan;
};

Problem make_problem(const SystemConfig& cfg, std::uint64_t seed);

struct TraceRow {
  int iter = 0;
  double objective = 0;
  double sum_rate = 0;          // sum over users and subcarriers, bits/s/Hz
  double avg_rate_per_subcarrier = 0;
  int admm_iterations = 0;
  double power_slack = 0;       // min over subcarriers of P - power (W)
  double spectral_slack = 0;    // min over chains of rhs - lhs, +inf when disabled
  double clip_slack = 0;        // min over chains of chi - lhs, +inf when disabled
  double inband_power_dbm = 0;
  double oob_power_dbm = 0;
  /// Objective after the combiner, weight, digital, transmit-phase and receive-phase blocks.
  std::array<double, 5> block_objectives{};
};

struct Trace {
  std::vector<TraceRow> rows;
  bool converged = false;
  std::vector<std::string> warnings;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Random phases, truncated-SVD digital precoders meeting the power budget with
/// equality (then scaled per chain into the spectral and clipping sets), identity weights.
HybridState initialize(const Problem& pb, std::uint64_t seed);

/// Constraint slacks and emission metrics of the current state.
TraceRow measure(const HybridState& st, const Problem& pb);

/// One cycle: combiners, weights, digital precoders, transmit phases, receive phases.
TraceRow bcd_iterate(HybridState& st, const Problem& pb, const BcdOptions& opts, int iter,
                     std::vector<std::string>* warnings = nullptr);

struct RunResult {
  HybridState state;
  Trace trace;
};

/// Runs BCD on a prepared problem; the trace starts with the initial state as row 0.
RunResult run(const Problem& pb, std::uint64_t seed, const BcdOptions& opts);
/// Generates the channel and plan, then runs.
RunResult run(const SystemConfig& cfg, std::uint64_t seed, const BcdOptions& opts);

/// Average sum-rate when every transmit and receive phase shifter gets an i.i.d.
/// Gaussian phase error per draw; digital blocks are held fixed.
double evaluate_under_ps_noise(const HybridState& st, const model::ChannelSet& ch, double sigma_e, int num_draws,
                               std::uint64_t seed);

}  // namespace hyprec::bcd
