#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hyprec {

using cd = std::complex<double>;

/// Per-user, per-subcarrier matrix storage indexed as grid[k][s], with s the
/// position (0..S-1) in the ordered subcarrier set {-S/2..-1, 1..S/2}.
using MatrixGrid = std::vector<std::vector<Eigen::MatrixXcd>>;

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Scalar problem parameters. Units follow the field names; per-user fields
/// hold either one value (broadcast to every user) or exactly num_users values.
struct SystemConfig {
  int num_tx_antennas = 16;
  std::vector<int> num_rx_antennas{4};
  int num_users = 2;
  int num_subcarriers = 8;
  int num_tx_rf_chains = 4;
  std::vector<int> num_rx_rf_chains{2};
  std::vector<int> num_streams{2};
  int oversampling = 4;

  double carrier_freq_ghz = 28.0;
  double bandwidth_hz = 20e6;
  double symbol_time_s = 0.0;  // 0: derived as S / bandwidth
  double guard_time_s = -1.0;  // < 0: derived as symbol_time / 4

  double power_budget_w = 3.1622776601683795e-3;  // 5 dBm per subcarrier
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 8.0;

  double papr_max = 0.25;
  double clip_level = 8.2;  // +inf disables the clipping constraint
  double clip_prob = 0.3;
  double spectral_rhs = kInf;  // sqrt(eps'); +inf disables the spectral constraint
  std::vector<std::pair<double, double>> notch_bands{{-29e6, -10.1e6}, {10.1e6, 29e6}};
  double notch_step_hz = 50.0;

  double rho0 = 1.0;
  double rho_growth = 2.0;
  double phase_error_std = 0.0;  // radians

  int num_taps = 4;
  double rician_kappa = 10.0;  // linear (10 dB)
  double angular_spread = 10.0 * kPi / 180.0;
  double element_spacing_tx = 0.0;  // 0: half wavelength
  double element_spacing_rx = 0.0;
  double shadowing_los_db = 5.8;
  double shadowing_nlos_db = 8.7;
  double user_distance_m = 373.0;
  double user_disc_radius_m = 4.0;
  /// true: NLOS tap gain is 10^(-PL/20) (amplitude convention, as published);
  /// false: 10^(-PL/10), the power convention used for the LOS term.
  bool nlos_gain_amplitude = true;
  bool rx_fully_connected = true;

  /// Checks invariants and broadcasts per-user fields. Throws ParameterError.
  void validate();

  int rx_antennas(int k) const { return num_rx_antennas.at(static_cast<size_t>(k)); }
  int rx_rf_chains(int k) const { return num_rx_rf_chains.at(static_cast<size_t>(k)); }
  int streams(int k) const { return num_streams.at(static_cast<size_t>(k)); }

  double wavelength_m() const { return kSpeedOfLight / (carrier_freq_ghz * 1e9); }
  double spacing_tx_m() const { return element_spacing_tx > 0 ? element_spacing_tx : wavelength_m() / 2; }
  double spacing_rx_m() const { return element_spacing_rx > 0 ? element_spacing_rx : wavelength_m() / 2; }
  double t_sym() const { return symbol_time_s > 0 ? symbol_time_s : num_subcarriers / bandwidth_hz; }
  double t_guard() const { return guard_time_s >= 0 ? guard_time_s : t_sym() / 4; }
  double t_total() const { return t_sym() + t_guard(); }
  /// Antennas per transmit subarray, N_t / N_RF.
  int subarray_size() const { return num_tx_antennas / num_tx_rf_chains; }
  /// RF chain feeding transmit antenna a (contiguous equal subarrays).
  int tx_chain_of(int a) const { return a / subarray_size(); }
};

/// Signed subcarrier value for position idx in {-S/2..-1, 1..S/2}.
inline int subcarrier_value(int idx, int num_subcarriers) {
  const int half = num_subcarriers / 2;
  return idx < half ? idx - half : idx - half + 1;
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

SystemConfig config_from_json(const std::string& text);
std::string config_to_json(const SystemConfig& cfg);

}  // namespace hyprec
