#include "hyprec/wmmse.hpp"

#include <cmath>

namespace hyprec::wmmse {

namespace {

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

const Eigen::MatrixXcd& channel(const model::ChannelSet& ch, int k, int s) {
  return ch.h.at(static_cast<size_t>(k)).at(static_cast<size_t>(s));
}

const Eigen::MatrixXcd& at(const MatrixGrid& g, int k, int s) { return g[static_cast<size_t>(k)][static_cast<size_t>(s)]; }

// Sum_j V_j V_j^H on subcarrier s.
Eigen::MatrixXcd precoder_covariance(const HybridState& st, int s) {
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(st.num_tx_rf_chains, st.num_tx_rf_chains);
  for (const auto& vk : st.v_digital) x += vk[static_cast<size_t>(s)] * vk[static_cast<size_t>(s)].adjoint();
  return x;
}

}  // namespace

Eigen::MatrixXcd hpd_solve(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& b) {
  const Eigen::MatrixXcd h = hermitian_part(m);
  Eigen::LLT<Eigen::MatrixXcd> llt(h);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  const double scale = std::max(h.diagonal().real().cwiseAbs().maxCoeff(), 1e-300);
  llt.compute(h + 1e-12 * scale * Eigen::MatrixXcd::Identity(h.rows(), h.cols()));
  if (llt.info() != Eigen::Success) throw NumericalError("hpd_solve: matrix is not positive definite");
  return llt.solve(b);
}

double log_det_hpd(const Eigen::MatrixXcd& m) {
  Eigen::LLT<Eigen::MatrixXcd> llt(hermitian_part(m));
  if (llt.info() != Eigen::Success) throw NumericalError("log_det_hpd: matrix is not positive definite");
  double ld = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) ld += 2 * std::log(std::real(llt.matrixL()(i, i)));
  return ld;
}

Eigen::MatrixXcd effective_channel(const HybridState& st, const model::ChannelSet& ch, int k, int s) {
  return st.u_rf[static_cast<size_t>(k)].adjoint() * st.apply_v_rf(channel(ch, k, s));
}

Eigen::MatrixXcd interference_covariance(const HybridState& st, const model::ChannelSet& ch, int k, int s) {
  const Eigen::MatrixXcd g = effective_channel(st, ch, k, s);
  const auto& urf = st.u_rf[static_cast<size_t>(k)];
  Eigen::MatrixXcd j = ch.noise_var * (urf.adjoint() * urf);
  for (int i = 0; i < st.num_users(); ++i) {
    if (i == k) continue;
    const Eigen::MatrixXcd gv = g * at(st.v_digital, i, s);
    j += gv * gv.adjoint();
  }
  return j;
}

Eigen::MatrixXcd mse_matrix(const HybridState& st, const model::ChannelSet& ch, int k, int s) {
  const Eigen::MatrixXcd g = effective_channel(st, ch, k, s);
  const auto& u = at(st.u_digital, k, s);
  const auto& urf = st.u_rf[static_cast<size_t>(k)];
  const Eigen::Index nk = u.cols();
  const Eigen::MatrixXcd err = Eigen::MatrixXcd::Identity(nk, nk) - u.adjoint() * g * at(st.v_digital, k, s);
  Eigen::MatrixXcd e = err * err.adjoint();
  for (int i = 0; i < st.num_users(); ++i) {
    if (i == k) continue;
    const Eigen::MatrixXcd t = u.adjoint() * g * at(st.v_digital, i, s);
    e += t * t.adjoint();
  }
  const Eigen::MatrixXcd nu = urf * u;
  e += ch.noise_var * (nu.adjoint() * nu);
  return hermitian_part(e);
}

double rate(const HybridState& st, const model::ChannelSet& ch, int k, int s) {
  // The rate only depends on the column space of the full combiner U_RF U, so an
  // orthonormal basis of it is used in the antenna domain. This covers
  // rank-deficient combiners and collinear RF chains.
  const auto& urf = st.u_rf[static_cast<size_t>(k)];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(urf * at(st.u_digital, k, s));
  const Eigen::Index r = qr.rank();
  if (r == 0) return 0.0;
  const Eigen::MatrixXcd basis = Eigen::MatrixXcd(qr.householderQ()).leftCols(r);
  const Eigen::MatrixXcd hb = st.apply_v_rf(channel(ch, k, s)).adjoint() * basis;  // (Q^H H V_RF)^H
  Eigen::MatrixXcd j = ch.noise_var * Eigen::MatrixXcd::Identity(r, r);
  for (int i = 0; i < st.num_users(); ++i) {
    if (i == k) continue;
    const Eigen::MatrixXcd t = hb.adjoint() * at(st.v_digital, i, s);
    j += t * t.adjoint();
  }
  const Eigen::MatrixXcd sig = hb.adjoint() * at(st.v_digital, k, s);
  // det(I + S S^H J^-1) = det(J + S S^H) / det(J).
  const double ld_j = log_det_hpd(j);
  const double ld_t = log_det_hpd(j + sig * sig.adjoint());
  return std::max(0.0, (ld_t - ld_j) / std::log(2.0));
}

double sum_rate(const HybridState& st, const model::ChannelSet& ch) {
  double r = 0;
  for (int k = 0; k < st.num_users(); ++k)
    for (int s = 0; s < st.num_subcarriers(); ++s) r += rate(st, ch, k, s);
  return r;
}

Eigen::MatrixXcd update_digital_combiner(const HybridState& st, const model::ChannelSet& ch, int k, int s) {
  const auto& urf = st.u_rf[static_cast<size_t>(k)];
  const Eigen::MatrixXcd hv = st.apply_v_rf(channel(ch, k, s));
  const Eigen::MatrixXcd o = hv * precoder_covariance(st, s) * hv.adjoint() +
                             ch.noise_var * Eigen::MatrixXcd::Identity(hv.rows(), hv.rows());
  return hpd_solve(urf.adjoint() * o * urf, urf.adjoint() * hv * at(st.v_digital, k, s));
}

Eigen::MatrixXcd update_weight(const HybridState& st, const model::ChannelSet& ch, int k, int s) {
  const Eigen::MatrixXcd e = mse_matrix(st, ch, k, s);
  return hermitian_part(hpd_solve(e, Eigen::MatrixXcd::Identity(e.rows(), e.cols())));
}

void update_all_combiners(HybridState& st, const model::ChannelSet& ch) {
  for (int k = 0; k < st.num_users(); ++k)
    for (int s = 0; s < st.num_subcarriers(); ++s)
      st.u_digital[static_cast<size_t>(k)][static_cast<size_t>(s)] = update_digital_combiner(st, ch, k, s);
}

void update_all_weights(HybridState& st, const model::ChannelSet& ch) {
  MatrixGrid w = st.weights;
  for (int k = 0; k < st.num_users(); ++k)
    for (int s = 0; s < st.num_subcarriers(); ++s)
      w[static_cast<size_t>(k)][static_cast<size_t>(s)] = update_weight(st, ch, k, s);
  st.weights = std::move(w);
}

double wmmse_objective(const HybridState& st, const model::ChannelSet& ch) {
  double f = 0;
  for (int k = 0; k < st.num_users(); ++k)
    for (int s = 0; s < st.num_subcarriers(); ++s) {
      const auto& w = at(st.weights, k, s);
      f += std::real((w * mse_matrix(st, ch, k, s)).trace()) - log_det_hpd(w);
    }
  return f;
}

}  // namespace hyprec::wmmse
