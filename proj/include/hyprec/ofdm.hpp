#pragma once

#include <random>
#include <utility>
#include <vector>

#include "hyprec/state.hpp"

namespace hyprec::ofdm {

/// Pulse timing, notch weights and the oversampled synthesis matrix.
struct SpectralPlan {
  int num_subcarriers = 0;
  int oversampling = 1;
  double t_sym = 0, t_guard = 0, t_total = 0;
  double notch_step_hz = 0;  // quadrature weight for OOB energy, 0 for explicit lists
  Eigen::VectorXd l_diag;    // diagonal of A^H A, per subcarrier position
  Eigen::MatrixXcd synthesis;  // lS x S, entry exp(j 2 pi s n / (lS))
};

/// Timing and synthesis only; l_diag is zero.
SpectralPlan make_base_plan(const SystemConfig& cfg);
/// Full plan with l_diag streamed over the configured notch bands.
SpectralPlan make_plan(const SystemConfig& cfg);

Eigen::MatrixXcd synthesis_matrix(int num_subcarriers, int oversampling);

/// Fourier transform of the rectangular subcarrier pulse on [-T_g, T_sym).
cd pulse_spectrum(double f, int s_value, const SpectralPlan& plan);

/// sum_j |o^s(f_j)|^2 over an explicit frequency list.
Eigen::VectorXd notch_diag(const std::vector<double>& freqs, const SpectralPlan& plan);
/// Same sum over uniform grids lo, lo+step, ..., <= hi for every band; no list is stored.
Eigen::VectorXd notch_diag_bands(const std::vector<std::pair<double, double>>& bands, double step,
                                 const SpectralPlan& plan);

/// Per-user per-subcarrier symbol vectors, [k][s].
using SymbolGrid = std::vector<std::vector<Eigen::VectorXcd>>;

/// Unit-variance circular Gaussian symbols shaped like the digital precoders.
SymbolGrid draw_symbols(const HybridState& st, std::mt19937_64& rng);

/// Frequency-domain samples w^a[s] = sum_k V_RF[a,:] V_k^s symbols_k^s.
Eigen::VectorXcd antenna_weights(const HybridState& st, const SymbolGrid& symbols, int a);

/// Oversampled time samples x^a = F^-1 w^a, length lS.
Eigen::VectorXcd time_signal(const HybridState& st, const SymbolGrid& symbols, int a, const SpectralPlan& plan);

struct Papr {
  double paper = 0;         // peak / total energy
  double conventional = 0;  // peak / per-sample mean
};

/// Empirical denominator ||x||^2.
Papr papr(const Eigen::VectorXcd& x);
/// Denominator replaced by the supplied expected energy E||x||^2.
Papr papr(const Eigen::VectorXcd& x, double expected_energy);

Eigen::VectorXcd clip(const Eigen::VectorXcd& x, double level);

/// sum_k sum_s ||V_k^s[m,:]||^2.
double chain_energy(const MatrixGrid& v, int m);
/// sum_k sum_s l_s ||V_k^s[m,:]||^2.
double weighted_chain_energy(const MatrixGrid& v, const Eigen::VectorXd& l_diag, int m);

/// Expected PSD summed over antennas: sum_s |o^s(f)|^2 (N_t/N_RF) sum_k ||V_k^s||^2.
Eigen::VectorXd psd_analytic(const HybridState& st, const std::vector<double>& freqs, const SpectralPlan& plan);

/// Default PSD grid: 2048 points over +-1.5 bandwidth.
std::vector<double> default_psd_grid(const SystemConfig& cfg, int points = 2048);

/// Energy per symbol (J) to average power in dBm over one symbol duration, floored at -300 dBm.
double energy_to_dbm(double energy_j, const SpectralPlan& plan);

/// Expected OOB energy: step * sum_s l_s (N_t/N_RF) sum_k ||V_k^s||^2.
double oob_energy(const HybridState& st, const SpectralPlan& plan);
/// Expected energy inside [-bandwidth/2, bandwidth/2] by trapezoidal integration of the PSD.
double inband_energy(const HybridState& st, const SpectralPlan& plan, double bandwidth_hz, int points = 4001);

/// Violation-probability bound exp(-l S papr_max / 2).
double papr_prob_bound(int oversampling, int num_subcarriers, double papr_max);
/// sqrt(-2 ln eps * chain_energy).
double clipping_bound_lhs(const MatrixGrid& v, double eps, int m);
/// sqrt(weighted_chain_energy).
double spectral_bound_lhs(const MatrixGrid& v, const Eigen::VectorXd& l_diag, int m);

}  // namespace hyprec::ofdm
