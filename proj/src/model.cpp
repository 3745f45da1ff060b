#include "hyprec/model.hpp"

#include <cmath>

namespace hyprec::model {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(purpose >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

Eigen::VectorXcd ula_steering(int n, double theta, double spacing, double wavelength) {
  if (!(wavelength > 0)) throw ParameterError("ula_steering: wavelength must be positive");
  if (n < 1) throw ParameterError("ula_steering: need at least one element");
  const double psi = 2 * kPi * spacing * std::sin(theta) / wavelength;
  Eigen::VectorXcd a(n);
  for (int i = 0; i < n; ++i) a[i] = std::polar(1.0, i * psi);
  return a;
}

double path_loss_db(double distance_m, double carrier_ghz, double shadowing_db) {
  if (!(distance_m > 0) || !(carrier_ghz > 0)) throw ParameterError("path_loss_db: distance and carrier must be positive");
  return 22 * std::log10(distance_m) + 28 + 20 * std::log10(carrier_ghz) + shadowing_db;
}

double noise_variance_dbm(const SystemConfig& cfg) {
  return cfg.noise_psd_dbm_hz + 10 * std::log10(cfg.bandwidth_hz / cfg.num_subcarriers) + cfg.noise_figure_db;
}

double noise_variance(const SystemConfig& cfg) { return dbm_to_watts(noise_variance_dbm(cfg)); }

MatrixGrid assemble_channel(const SystemConfig& cfg, const std::vector<UserGeometry>& geometry) {
  const int K = cfg.num_users, S = cfg.num_subcarriers, Nt = cfg.num_tx_antennas;
  const double kappa = cfg.rician_kappa;
  const double w_los = std::isinf(kappa) ? 1.0 : std::sqrt(kappa / (kappa + 1));
  const double w_nlos = std::isinf(kappa) ? 0.0 : std::sqrt(1 / (kappa + 1));
  const double lambda = cfg.wavelength_m();
  MatrixGrid h(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto& g = geometry[static_cast<size_t>(k)];
    const int Nr = cfg.rx_antennas(k);
    const Eigen::MatrixXcd los = ula_steering(Nr, g.aoa, cfg.spacing_rx_m(), lambda) *
                                 ula_steering(Nt, g.aod, cfg.spacing_tx_m(), lambda).adjoint();
    std::vector<Eigen::MatrixXcd> paths;
    for (size_t l = 0; l < g.taps.size(); ++l)
      paths.push_back(ula_steering(Nr, g.nlos_aoa[l], cfg.spacing_rx_m(), lambda) *
                      ula_steering(Nt, g.nlos_aod[l], cfg.spacing_tx_m(), lambda).adjoint() *
                      (w_nlos * std::sqrt(g.nlos_gain[l]) * g.taps[l]));
    auto& hk = h[static_cast<size_t>(k)];
    hk.resize(static_cast<size_t>(S));
    for (int si = 0; si < S; ++si) {
      const int s = subcarrier_value(si, S);
      Eigen::MatrixXcd m = (w_los * std::sqrt(g.los_gain)) * los;
      for (size_t l = 0; l < paths.size(); ++l) {
        const double tap = static_cast<double>(l + 1);
        m += paths[l] * std::polar(1.0, -2 * kPi * tap * s / S);
      }
      hk[static_cast<size_t>(si)] = std::move(m);
    }
  }
  return h;
}

ChannelSet gen_channel(const SystemConfig& cfg_in, std::uint64_t seed) {
  SystemConfig cfg = cfg_in;
  cfg.validate();
  auto rng = make_rng(seed, 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  ChannelSet out;
  out.num_users = cfg.num_users;
  out.num_subcarriers = cfg.num_subcarriers;
  out.noise_var = noise_variance(cfg);
  for (int k = 0; k < cfg.num_users; ++k) {
    UserGeometry g;
    // Uniform position in the disc around (user_distance, 0).
    const double r = cfg.user_disc_radius_m * std::sqrt(unif(rng));
    const double phi = 2 * kPi * unif(rng);
    const double x = cfg.user_distance_m + r * std::cos(phi);
    const double y = r * std::sin(phi);
    g.distance_m = std::hypot(x, y);
    g.aod = std::atan2(y, x);
    g.aoa = g.aod;
    const double pl_los = path_loss_db(g.distance_m, cfg.carrier_freq_ghz, cfg.shadowing_los_db * normal(rng));
    const double pl_nlos = path_loss_db(g.distance_m, cfg.carrier_freq_ghz, cfg.shadowing_nlos_db * normal(rng));
    g.los_gain = std::pow(10.0, -pl_los / 10);
    const double nlos = std::pow(10.0, -pl_nlos / (cfg.nlos_gain_amplitude ? 20 : 10));
    for (int l = 1; l < cfg.num_taps; ++l) {
      g.nlos_gain.push_back(nlos);
      g.nlos_aod.push_back(g.aod + cfg.angular_spread * normal(rng));
      g.nlos_aoa.push_back(g.aoa + cfg.angular_spread * normal(rng));
      const double re = normal(rng), im = normal(rng);
      g.taps.emplace_back(re / std::sqrt(2.0), im / std::sqrt(2.0));
    }
    out.geometry.push_back(std::move(g));
  }
  out.h = assemble_channel(cfg, out.geometry);
  return out;
}

}  // namespace hyprec::model
