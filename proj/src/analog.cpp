#include "hyprec/analog.hpp"

#include <algorithm>
#include <cmath>

#include "hyprec/wmmse.hpp"

namespace hyprec::analog {

namespace {

const Eigen::MatrixXcd& at(const MatrixGrid& g, int k, int s) { return g[static_cast<size_t>(k)][static_cast<size_t>(s)]; }

Eigen::MatrixXcd precoder_covariance(const HybridState& st, int s) {
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(st.num_tx_rf_chains, st.num_tx_rf_chains);
  for (const auto& vk : st.v_digital) x += vk[static_cast<size_t>(s)] * vk[static_cast<size_t>(s)].adjoint();
  return x;
}

// Unit-modulus minimizer of 2 Re(conj(x) c); keeps the incumbent when c vanishes.
cd align_opposite(cd c, cd incumbent, double scale) {
  const double mag = std::abs(c);
  if (!(mag > 1e-15 * scale) || !std::isfinite(mag)) return incumbent;
  return -c / mag;
}

bool sweep_converged(double before, double after, double tol) {
  return std::abs(before - after) <= tol * std::max({std::abs(before), std::abs(after), 1e-300});
}

}  // namespace

PhaseErrorMoments gaussian_moments(double sigma) {
  PhaseErrorMoments mo;
  mo.first = std::exp(-sigma * sigma / 2);
  mo.cross = std::exp(-sigma * sigma);
  return mo;
}

TxWorkspace build_tx_workspace(const HybridState& st, const model::ChannelSet& ch) {
  const int nt = st.num_tx_antennas();
  TxWorkspace ws;
  ws.q = Eigen::MatrixXcd::Zero(nt, nt);
  ws.u = Eigen::VectorXcd::Zero(nt);
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(st.num_tx_rf_chains, nt);
  for (int s = 0; s < st.num_subcarriers(); ++s) {
    const Eigen::MatrixXcd x = precoder_covariance(st, s);
    Eigen::MatrixXcd gamma_t(nt, nt);  // Gamma^T, Gamma[i,j] = X[m_i, m_j]
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < nt; ++j) gamma_t(j, i) = x(st.tx_chain[static_cast<size_t>(i)], st.tx_chain[static_cast<size_t>(j)]);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nt, nt);
    for (int k = 0; k < st.num_users(); ++k) {
      const auto& h = ch.h[static_cast<size_t>(k)][static_cast<size_t>(s)];
      const auto& u = at(st.u_digital, k, s);
      const auto& w = at(st.weights, k, s);
      const Eigen::MatrixXcd uh = (st.u_rf[static_cast<size_t>(k)] * u).adjoint() * h;  // n_k x N_t
      m += uh.adjoint() * w * uh;
      c += at(st.v_digital, k, s) * w * uh;
      const Eigen::MatrixXcd nu = st.u_rf[static_cast<size_t>(k)] * u;
      ws.constant += std::real(w.trace()) + ch.noise_var * std::real((w * nu.adjoint() * nu).trace()) -
                     wmmse::log_det_hpd(w);
    }
    ws.q += m.cwiseProduct(gamma_t);
  }
  ws.q = 0.5 * (ws.q + ws.q.adjoint());
  for (int a = 0; a < nt; ++a) ws.u[a] = std::conj(c(st.tx_chain[static_cast<size_t>(a)], a));
  return ws;
}

double tx_objective(const TxWorkspace& ws, const Eigen::VectorXcd& v) {
  return std::real(v.dot(ws.q * v)) - 2 * std::real(ws.u.dot(v));
}

TxWorkspace robust_tx_workspace(const TxWorkspace& ws, const PhaseErrorMoments& mo) {
  TxWorkspace r = ws;
  r.q *= mo.cross;
  r.q.diagonal() = ws.q.diagonal();
  r.u = std::conj(mo.first) * ws.u;
  return r;
}

cd cd_update_tx_ps(const TxWorkspace& ws, const Eigen::VectorXcd& v, int a) {
  const cd coupling = (ws.q.row(a) * v).value() - ws.q(a, a) * v[a];
  const double scale = ws.q.row(a).cwiseAbs().sum() + std::abs(ws.u[a]);
  return align_opposite(coupling - ws.u[a], v[a], scale);
}

cd robust_tx_ps_update(const TxWorkspace& ws, const Eigen::VectorXcd& v, int a, const PhaseErrorMoments& mo) {
  const cd coupling = (ws.q.row(a) * v).value() - ws.q(a, a) * v[a];
  const cd lin = std::conj(mo.first) * ws.u[a];
  const double scale = ws.q.row(a).cwiseAbs().sum() + std::abs(ws.u[a]);
  return align_opposite(mo.cross * coupling - lin, v[a], scale);
}

CdResult optimize_tx_cd(const TxWorkspace& ws, Eigen::VectorXcd& v, const CdOptions& opts) {
  CdResult res;
  const Eigen::Index n = v.size();
  double f = tx_objective(ws, v);
  res.f_trace.push_back(f);
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    Eigen::VectorXcd y = ws.q * v;  // full recompute once per sweep
    for (Eigen::Index a = 0; a < n; ++a) {
      const cd coupling = y[a] - ws.q(a, a) * v[a];
      const double scale = ws.q.row(a).cwiseAbs().sum() + std::abs(ws.u[a]);
      const cd next = align_opposite(coupling - ws.u[a], v[a], scale);
      const cd delta = next - v[a];
      if (delta != cd(0)) {
        y += ws.q.col(a) * delta;
        v[a] = next;
      }
    }
    const double f_new = tx_objective(ws, v);
    res.f_trace.push_back(f_new);
    res.sweeps = sweep;
    const bool done = sweep_converged(f, f_new, opts.tol);
    f = f_new;
    if (done) {
      res.converged = true;
      break;
    }
  }
  return res;
}

RxWorkspace build_rx_workspace(const HybridState& st, const model::ChannelSet& ch, int k) {
  RxWorkspace ws;
  const auto& urf = st.u_rf[static_cast<size_t>(k)];
  ws.mask = st.u_mask[static_cast<size_t>(k)];
  ws.d = Eigen::MatrixXcd::Zero(urf.rows(), urf.cols());
  for (int s = 0; s < st.num_subcarriers(); ++s) {
    const Eigen::MatrixXcd hv = st.apply_v_rf(ch.h[static_cast<size_t>(k)][static_cast<size_t>(s)]);
    const auto& u = at(st.u_digital, k, s);
    const auto& w = at(st.weights, k, s);
    ws.o.push_back(hv * precoder_covariance(st, s) * hv.adjoint() +
                   ch.noise_var * Eigen::MatrixXcd::Identity(hv.rows(), hv.rows()));
    ws.p.push_back(u * w * u.adjoint());
    ws.d += hv * at(st.v_digital, k, s) * w * u.adjoint();
    ws.constant += std::real(w.trace()) - wmmse::log_det_hpd(w);
  }
  for (int j = 0; j < st.num_users(); ++j) {
    if (j == k) continue;
    for (int s = 0; s < st.num_subcarriers(); ++s) {
      const auto& w = at(st.weights, j, s);
      ws.constant += std::real((w * wmmse::mse_matrix(st, ch, j, s)).trace()) - wmmse::log_det_hpd(w);
    }
  }
  return ws;
}

double rx_objective(const RxWorkspace& ws, const Eigen::MatrixXcd& u_rf) {
  double f = -2 * std::real((u_rf.adjoint() * ws.d).trace());
  for (size_t s = 0; s < ws.o.size(); ++s) f += std::real((u_rf * ws.p[s] * u_rf.adjoint() * ws.o[s]).trace());
  return f;
}

double rx_expected_objective(const RxWorkspace& ws, const Eigen::MatrixXcd& u_rf, const PhaseErrorMoments& mo) {
  double f = -2 * std::real(std::conj(mo.first) * (u_rf.adjoint() * ws.d).trace());
  for (size_t s = 0; s < ws.o.size(); ++s) {
    double self = 0;
    for (Eigen::Index a = 0; a < u_rf.rows(); ++a)
      for (Eigen::Index m = 0; m < u_rf.cols(); ++m)
        self += std::real(ws.o[s](a, a)) * std::real(ws.p[s](m, m)) * std::norm(u_rf(a, m));
    f += mo.cross * std::real((u_rf * ws.p[s] * u_rf.adjoint() * ws.o[s]).trace()) + (1 - mo.cross) * self;
  }
  return f;
}

RxWorkspace robust_rx_workspace(const RxWorkspace& ws, const PhaseErrorMoments& mo) {
  RxWorkspace r = ws;
  r.d = std::conj(mo.first) * ws.d;
  for (size_t s = 0; s < ws.o.size(); ++s) {
    r.p[s] = mo.cross * ws.p[s];
    for (Eigen::Index a = 0; a < ws.mask.rows(); ++a)
      for (Eigen::Index m = 0; m < ws.mask.cols(); ++m)
        if (ws.mask(a, m) != 0) r.constant += (1 - mo.cross) * std::real(ws.o[s](a, a)) * std::real(ws.p[s](m, m));
  }
  return r;
}

RxDeltas build_rx_deltas(const RxWorkspace& ws, const Eigen::MatrixXcd& u_rf, int a, int m) {
  RxDeltas d{ws.d(a, m), cd(0)};
  for (size_t s = 0; s < ws.o.size(); ++s)
    d.delta2 += (ws.o[s].row(a) * u_rf * ws.p[s].col(m)).value() - ws.o[s](a, a) * u_rf(a, m) * ws.p[s](m, m);
  return d;
}

cd cd_update_rx_ps(const RxDeltas& d, cd incumbent) {
  return align_opposite(d.delta2 - d.delta1, incumbent, std::abs(d.delta1) + std::abs(d.delta2));
}

cd robust_rx_ps_update(const RxDeltas& d, cd incumbent, const PhaseErrorMoments& mo) {
  const cd c = mo.cross * d.delta2 - std::conj(mo.first) * d.delta1;
  return align_opposite(c, incumbent, std::abs(d.delta1) + std::abs(d.delta2));
}

CdResult optimize_rx_cd(const RxWorkspace& ws, Eigen::MatrixXcd& u_rf, const CdOptions& opts,
                        const PhaseErrorMoments* robust) {
  CdResult res;
  auto objective = [&] { return robust ? rx_expected_objective(ws, u_rf, *robust) : rx_objective(ws, u_rf); };
  double f = objective();
  res.f_trace.push_back(f);
  const size_t S = ws.o.size();
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    std::vector<Eigen::MatrixXcd> m_s(S);  // O_s U P_s, kept current within the sweep
    for (size_t s = 0; s < S; ++s) m_s[s] = ws.o[s] * u_rf * ws.p[s];
    for (Eigen::Index m = 0; m < u_rf.cols(); ++m)
      for (Eigen::Index a = 0; a < u_rf.rows(); ++a) {
        if (ws.mask(a, m) == 0) continue;
        RxDeltas d{ws.d(a, m), cd(0)};
        for (size_t s = 0; s < S; ++s) d.delta2 += m_s[s](a, m) - ws.o[s](a, a) * u_rf(a, m) * ws.p[s](m, m);
        const cd next = robust ? robust_rx_ps_update(d, u_rf(a, m), *robust) : cd_update_rx_ps(d, u_rf(a, m));
        const cd delta = next - u_rf(a, m);
        if (delta == cd(0)) continue;
        u_rf(a, m) = next;
        for (size_t s = 0; s < S; ++s) m_s[s] += ws.o[s].col(a) * (delta * ws.p[s].row(m));
      }
    const double f_new = objective();
    res.f_trace.push_back(f_new);
    res.sweeps = sweep;
    const bool done = sweep_converged(f, f_new, opts.tol);
    f = f_new;
    if (done) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace hyprec::analog
