#pragma once

#include <vector>

#include "hyprec/config.hpp"

namespace hyprec {

/// All optimization variables of the hybrid transceiver.
struct HybridState {
  MatrixGrid v_digital;            // [k][s], N_RF x n_k
  Eigen::VectorXcd v_ps;           // N_t unit-modulus phases
  std::vector<int> tx_chain;       // antenna -> RF chain
  int num_tx_rf_chains = 0;
  std::vector<Eigen::MatrixXcd> u_rf;    // [k], N_r x N_RF,k
  std::vector<Eigen::MatrixXd> u_mask;   // [k], 1 where a phase shifter exists
  MatrixGrid u_digital;            // [k][s], N_RF,k x n_k
  MatrixGrid weights;              // [k][s], n_k x n_k

  int num_users() const { return static_cast<int>(v_digital.size()); }
  int num_subcarriers() const { return v_digital.empty() ? 0 : static_cast<int>(v_digital.front().size()); }
  int num_tx_antennas() const { return static_cast<int>(v_ps.size()); }
  /// N_t / N_RF, the Gram scale of the partially connected precoder.
  double subarray_gain() const { return static_cast<double>(num_tx_antennas()) / num_tx_rf_chains; }

  /// Dense N_t x N_RF analog precoder with one nonzero per row.
  Eigen::MatrixXcd v_rf() const;
  /// H * V_RF without forming V_RF.
  Eigen::MatrixXcd apply_v_rf(const Eigen::MatrixXcd& h) const;
};

/// Shape-only state: zero digital blocks, unit phases, identity weights,
/// receive masks per the configured connectivity.
HybridState make_state(const SystemConfig& cfg);

/// Throws DimensionError when a block disagrees with cfg.
void check_state(const HybridState& st, const SystemConfig& cfg);

}  // namespace hyprec
