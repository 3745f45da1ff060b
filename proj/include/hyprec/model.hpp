#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hyprec/config.hpp"

namespace hyprec::model {

/// Seeded generator for an independent stream. Different purposes with the
/// same seed give unrelated sequences.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t purpose);

/// ULA response, entry i = exp(j i psi), psi = 2 pi spacing sin(theta) / wavelength.
Eigen::VectorXcd ula_steering(int n, double theta, double spacing, double wavelength);

/// 22 log10(d) + 28 + 20 log10(fc) + shadowing.
double path_loss_db(double distance_m, double carrier_ghz, double shadowing_db);

double noise_variance_dbm(const SystemConfig& cfg);
/// Per-subcarrier, per-receive-antenna noise power in watts.
double noise_variance(const SystemConfig& cfg);

struct UserGeometry {
  double distance_m = 0;
  double aod = 0;  // LOS angle of departure, radians
  double aoa = 0;
  double los_gain = 0;                // g_k, power ratio
  std::vector<double> nlos_gain;      // per delayed tap
  std::vector<double> nlos_aod, nlos_aoa;
  std::vector<cd> taps;               // unit-variance complex Gaussian coefficients
};

struct ChannelSet {
  int num_users = 0;
  int num_subcarriers = 0;
  MatrixGrid h;  // h[k][s], N_r x N_t
  std::vector<UserGeometry> geometry;
  double noise_var = 0;
};

/// Rician multi-tap channel for every user and subcarrier. Deterministic in (cfg, seed).
ChannelSet gen_channel(const SystemConfig& cfg, std::uint64_t seed);

/// Builds the per-subcarrier matrices from fixed geometry and taps.
MatrixGrid assemble_channel(const SystemConfig& cfg, const std::vector<UserGeometry>& geometry);

}  // namespace hyprec::model
