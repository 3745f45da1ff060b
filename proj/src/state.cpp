#include "hyprec/state.hpp"

#include <string>

namespace hyprec {

Eigen::MatrixXcd HybridState::v_rf() const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(num_tx_antennas(), num_tx_rf_chains);
  for (int a = 0; a < num_tx_antennas(); ++a) out(a, tx_chain[static_cast<size_t>(a)]) = v_ps[a];
  return out;
}

Eigen::MatrixXcd HybridState::apply_v_rf(const Eigen::MatrixXcd& h) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(h.rows(), num_tx_rf_chains);
  for (int a = 0; a < num_tx_antennas(); ++a) out.col(tx_chain[static_cast<size_t>(a)]) += h.col(a) * v_ps[a];
  return out;
}

HybridState make_state(const SystemConfig& cfg_in) {
  SystemConfig cfg = cfg_in;
  cfg.validate();
  const int K = cfg.num_users, S = cfg.num_subcarriers;
  HybridState st;
  st.num_tx_rf_chains = cfg.num_tx_rf_chains;
  st.v_ps = Eigen::VectorXcd::Ones(cfg.num_tx_antennas);
  for (int a = 0; a < cfg.num_tx_antennas; ++a) st.tx_chain.push_back(cfg.tx_chain_of(a));
  st.v_digital.resize(static_cast<size_t>(K));
  st.u_digital.resize(static_cast<size_t>(K));
  st.weights.resize(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    const int nr = cfg.rx_antennas(k), nrf = cfg.rx_rf_chains(k), nk = cfg.streams(k);
    Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(nr, nrf);
    if (!cfg.rx_fully_connected) {
      mask.setZero();
      const int per = nr / nrf;
      for (int a = 0; a < nr; ++a) mask(a, a / per) = 1;
    }
    st.u_rf.push_back(mask.cast<cd>());
    st.u_mask.push_back(mask);
    const auto ks = static_cast<size_t>(k);
    st.v_digital[ks].assign(static_cast<size_t>(S), Eigen::MatrixXcd::Zero(cfg.num_tx_rf_chains, nk));
    st.u_digital[ks].assign(static_cast<size_t>(S), Eigen::MatrixXcd::Zero(nrf, nk));
    st.weights[ks].assign(static_cast<size_t>(S), Eigen::MatrixXcd::Identity(nk, nk));
  }
  return st;
}

void check_state(const HybridState& st, const SystemConfig& cfg) {
  auto fail = [](const std::string& what) { throw DimensionError("state: " + what); };
  if (st.num_users() != cfg.num_users) fail("user count");
  if (st.num_subcarriers() != cfg.num_subcarriers) fail("subcarrier count");
  if (st.num_tx_antennas() != cfg.num_tx_antennas) fail("v_ps length");
  if (st.num_tx_rf_chains != cfg.num_tx_rf_chains) fail("tx RF chain count");
  if (static_cast<int>(st.tx_chain.size()) != cfg.num_tx_antennas) fail("antenna map length");
  for (int k = 0; k < cfg.num_users; ++k) {
    const auto ks = static_cast<size_t>(k);
    if (st.u_rf[ks].rows() != cfg.rx_antennas(k) || st.u_rf[ks].cols() != cfg.rx_rf_chains(k)) fail("u_rf shape");
    for (int s = 0; s < cfg.num_subcarriers; ++s) {
      const auto ss = static_cast<size_t>(s);
      const auto& v = st.v_digital[ks][ss];
      if (v.rows() != cfg.num_tx_rf_chains || v.cols() != cfg.streams(k)) fail("v_digital shape");
      const auto& u = st.u_digital[ks][ss];
      if (u.rows() != cfg.rx_rf_chains(k) || u.cols() != cfg.streams(k)) fail("u_digital shape");
      if (st.weights[ks][ss].rows() != cfg.streams(k) || st.weights[ks][ss].cols() != cfg.streams(k)) fail("weight shape");
    }
  }
}

}  // namespace hyprec
