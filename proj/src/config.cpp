#include "hyprec/config.hpp"

#include <json.hpp>

namespace hyprec {

namespace {

using nlohmann::json;

void broadcast(std::vector<int>& field, int users, const char* name) {
  if (field.size() == 1 && users > 1) field.assign(static_cast<size_t>(users), field.front());
  if (static_cast<int>(field.size()) != users)
    throw ParameterError(std::string(name) + ": expected 1 or num_users entries");
  for (int v : field)
    if (v <= 0) throw ParameterError(std::string(name) + ": entries must be positive");
}

// JSON has no infinity; null stands for "disabled" on threshold fields.
double read_threshold(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return kInf;
  return j.at(key).get<double>();
}

json write_threshold(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<int> read_per_user(const json& j, const char* key, const std::vector<int>& fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_array()) return j.at(key).get<std::vector<int>>();
  return {j.at(key).get<int>()};
}

}  // namespace

void SystemConfig::validate() {
  if (num_tx_antennas <= 0) throw ParameterError("num_tx_antennas must be positive");
  if (num_users <= 0) throw ParameterError("num_users must be positive");
  if (num_subcarriers <= 0 || num_subcarriers % 2 != 0)
    throw ParameterError("num_subcarriers must be a positive even integer");
  if (num_tx_rf_chains <= 0 || num_tx_antennas % num_tx_rf_chains != 0)
    throw ParameterError("num_tx_rf_chains must divide num_tx_antennas");
  if (oversampling <= 0) throw ParameterError("oversampling must be positive");
  broadcast(num_rx_antennas, num_users, "num_rx_antennas");
  broadcast(num_rx_rf_chains, num_users, "num_rx_rf_chains");
  broadcast(num_streams, num_users, "num_streams");
  for (int k = 0; k < num_users; ++k) {
    if (streams(k) > rx_rf_chains(k)) throw ParameterError("num_streams exceeds num_rx_rf_chains");
    if (!rx_fully_connected && rx_antennas(k) % rx_rf_chains(k) != 0)
      throw ParameterError("partially connected receiver needs num_rx_rf_chains dividing num_rx_antennas");
  }
  if (carrier_freq_ghz <= 0) throw ParameterError("carrier_freq_ghz must be positive");
  if (bandwidth_hz <= 0) throw ParameterError("bandwidth_hz must be positive");
  if (symbol_time_s < 0) throw ParameterError("symbol_time_s must be nonnegative");
  if (!(t_total() > 0)) throw ParameterError("symbol plus guard time must be positive");
  if (!(power_budget_w >= 0)) throw ParameterError("power_budget_w must be nonnegative");
  if (!(clip_prob > 0 && clip_prob < 1)) throw ParameterError("clip_prob must lie in (0,1)");
  if (!(clip_level > 0)) throw ParameterError("clip_level must be positive");
  if (!(spectral_rhs >= 0)) throw ParameterError("spectral_rhs must be nonnegative");
  if (!(papr_max > 0)) throw ParameterError("papr_max must be positive");
  if (!(rho0 > 0)) throw ParameterError("rho0 must be positive");
  if (!(rho_growth >= 1)) throw ParameterError("rho_growth must be at least 1");
  if (!(phase_error_std >= 0)) throw ParameterError("phase_error_std must be nonnegative");
  if (num_taps <= 0) throw ParameterError("num_taps must be positive");
  if (!(rician_kappa >= 0)) throw ParameterError("rician_kappa must be nonnegative");
  if (!(angular_spread >= 0)) throw ParameterError("angular_spread must be nonnegative");
  if (!(shadowing_los_db >= 0 && shadowing_nlos_db >= 0)) throw ParameterError("shadowing stds must be nonnegative");
  if (!(user_distance_m > user_disc_radius_m && user_disc_radius_m >= 0))
    throw ParameterError("user disc must not contain the transmitter");
  if (!(notch_step_hz > 0)) throw ParameterError("notch_step_hz must be positive");
  for (const auto& [lo, hi] : notch_bands)
    if (!(lo <= hi)) throw ParameterError("notch band with lower edge above upper edge");
}

SystemConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  SystemConfig c;
  try {
    c.num_tx_antennas = j.value("num_tx_antennas", c.num_tx_antennas);
    c.num_users = j.value("num_users", c.num_users);
    c.num_rx_antennas = read_per_user(j, "num_rx_antennas", c.num_rx_antennas);
    c.num_rx_rf_chains = read_per_user(j, "num_rx_rf_chains", c.num_rx_rf_chains);
    c.num_streams = read_per_user(j, "num_streams", c.num_streams);
    c.num_subcarriers = j.value("num_subcarriers", c.num_subcarriers);
    c.num_tx_rf_chains = j.value("num_tx_rf_chains", c.num_tx_rf_chains);
    c.oversampling = j.value("oversampling", c.oversampling);
    c.carrier_freq_ghz = j.value("carrier_freq_ghz", c.carrier_freq_ghz);
    c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
    c.symbol_time_s = j.value("symbol_time_s", c.symbol_time_s);
    c.guard_time_s = j.value("guard_time_s", c.guard_time_s);
    if (j.contains("power_budget_dbm")) c.power_budget_w = dbm_to_watts(j.at("power_budget_dbm").get<double>());
    c.power_budget_w = j.value("power_budget_w", c.power_budget_w);
    c.noise_psd_dbm_hz = j.value("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
    c.noise_figure_db = j.value("noise_figure_db", c.noise_figure_db);
    c.papr_max = j.value("papr_max", c.papr_max);
    c.clip_level = read_threshold(j, "clip_level", c.clip_level);
    c.clip_prob = j.value("clip_prob", c.clip_prob);
    c.spectral_rhs = read_threshold(j, "spectral_rhs", c.spectral_rhs);
    if (j.contains("notch_bands")) c.notch_bands = j.at("notch_bands").get<std::vector<std::pair<double, double>>>();
    c.notch_step_hz = j.value("notch_step_hz", c.notch_step_hz);
    c.rho0 = j.value("rho0", c.rho0);
    c.rho_growth = j.value("rho_growth", c.rho_growth);
    c.phase_error_std = j.value("phase_error_std", c.phase_error_std);
    c.num_taps = j.value("num_taps", c.num_taps);
    c.rician_kappa = j.value("rician_kappa", c.rician_kappa);
    c.angular_spread = j.value("angular_spread", c.angular_spread);
    c.element_spacing_tx = j.value("element_spacing_tx", c.element_spacing_tx);
    c.element_spacing_rx = j.value("element_spacing_rx", c.element_spacing_rx);
    c.shadowing_los_db = j.value("shadowing_los_db", c.shadowing_los_db);
    c.shadowing_nlos_db = j.value("shadowing_nlos_db", c.shadowing_nlos_db);
    c.user_distance_m = j.value("user_distance_m", c.user_distance_m);
    c.user_disc_radius_m = j.value("user_disc_radius_m", c.user_disc_radius_m);
    c.nlos_gain_amplitude = j.value("nlos_gain_amplitude", c.nlos_gain_amplitude);
    c.rx_fully_connected = j.value("rx_fully_connected", c.rx_fully_connected);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const SystemConfig& c) {
  json j;
  j["num_tx_antennas"] = c.num_tx_antennas;
  j["num_users"] = c.num_users;
  j["num_rx_antennas"] = c.num_rx_antennas;
  j["num_rx_rf_chains"] = c.num_rx_rf_chains;
  j["num_streams"] = c.num_streams;
  j["num_subcarriers"] = c.num_subcarriers;
  j["num_tx_rf_chains"] = c.num_tx_rf_chains;
  j["oversampling"] = c.oversampling;
  j["carrier_freq_ghz"] = c.carrier_freq_ghz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["symbol_time_s"] = c.symbol_time_s;
  j["guard_time_s"] = c.guard_time_s;
  j["power_budget_w"] = c.power_budget_w;
  j["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  j["noise_figure_db"] = c.noise_figure_db;
  j["papr_max"] = c.papr_max;
  j["clip_level"] = write_threshold(c.clip_level);
  j["clip_prob"] = c.clip_prob;
  j["spectral_rhs"] = write_threshold(c.spectral_rhs);
  j["notch_bands"] = c.notch_bands;
  j["notch_step_hz"] = c.notch_step_hz;
  j["rho0"] = c.rho0;
  j["rho_growth"] = c.rho_growth;
  j["phase_error_std"] = c.phase_error_std;
  j["num_taps"] = c.num_taps;
  j["rician_kappa"] = c.rician_kappa;
  j["angular_spread"] = c.angular_spread;
  j["element_spacing_tx"] = c.element_spacing_tx;
  j["element_spacing_rx"] = c.element_spacing_rx;
  j["shadowing_los_db"] = c.shadowing_los_db;
  j["shadowing_nlos_db"] = c.shadowing_nlos_db;
  j["user_distance_m"] = c.user_distance_m;
  j["user_disc_radius_m"] = c.user_disc_radius_m;
  j["nlos_gain_amplitude"] = c.nlos_gain_amplitude;
  j["rx_fully_connected"] = c.rx_fully_connected;
  return j.dump(2);
}

}  // namespace hyprec
