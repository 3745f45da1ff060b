#pragma once

#include <vector>

#include "hyprec/model.hpp"
#include "hyprec/state.hpp"

namespace hyprec::analog {

/// Moments of the multiplicative phase error e^{j dtheta}: first = E[e^{j dtheta}],
/// cross = E[e^{j (dtheta_j - dtheta_i)}] for i != j.
struct PhaseErrorMoments {
  cd first{1.0, 0.0};
  double cross = 1.0;
};

/// Zero-mean Gaussian phase errors with standard deviation sigma (radians).
PhaseErrorMoments gaussian_moments(double sigma);

/// Quadratic model of the transmit phases: f(v) = v^H Q v - 2 Re(u^H v),
/// with f(v) + constant equal to the WMMSE objective.
struct TxWorkspace {
  Eigen::MatrixXcd q;
  Eigen::VectorXcd u;
  double constant = 0;
};

TxWorkspace build_tx_workspace(const HybridState& st, const model::ChannelSet& ch);
double tx_objective(const TxWorkspace& ws, const Eigen::VectorXcd& v);

/// Expected quadratic model under phase errors: diagonal kept, off-diagonal scaled by cross,
/// linear term by conj(first).
TxWorkspace robust_tx_workspace(const TxWorkspace& ws, const PhaseErrorMoments& mo);

/// Closed-form minimizer of f over v[a] with the other phases fixed.
/// Returns the incumbent when the coupling term vanishes.
cd cd_update_tx_ps(const TxWorkspace& ws, const Eigen::VectorXcd& v, int a);
/// Same update on the expected model.
cd robust_tx_ps_update(const TxWorkspace& ws, const Eigen::VectorXcd& v, int a, const PhaseErrorMoments& mo);

struct CdOptions {
  int max_sweeps = 200;
  double tol = 1e-9;  // relative change of f per sweep
};

struct CdResult {
  int sweeps = 0;
  bool converged = false;
  std::vector<double> f_trace;  // after each sweep, first entry is the start value
};

/// Ascending-index Gauss-Seidel sweeps until the change in f is below tol.
CdResult optimize_tx_cd(const TxWorkspace& ws, Eigen::VectorXcd& v, const CdOptions& opts = {});

/// Per-user quadratic model of the combiner: f(U) = sum_s tr(U P_s U^H O_s) - 2 Re tr(U^H D),
/// with O_s including the receiver noise, and f + constant the WMMSE objective.
struct RxWorkspace {
  std::vector<Eigen::MatrixXcd> o;  // [s], N_r x N_r
  std::vector<Eigen::MatrixXcd> p;  // [s], N_RF,k x N_RF,k
  Eigen::MatrixXcd d;               // first-order coefficients
  Eigen::MatrixXd mask;
  double constant = 0;
};

RxWorkspace build_rx_workspace(const HybridState& st, const model::ChannelSet& ch, int k);
double rx_objective(const RxWorkspace& ws, const Eigen::MatrixXcd& u_rf);
/// Expected objective when every active entry suffers an independent phase error.
double rx_expected_objective(const RxWorkspace& ws, const Eigen::MatrixXcd& u_rf, const PhaseErrorMoments& mo);

/// Expected model under phase errors, restricted to unit-modulus entries: the
/// quadratic part scales by cross, the linear part by conj(first), and the
/// per-entry self terms become constant.
RxWorkspace robust_rx_workspace(const RxWorkspace& ws, const PhaseErrorMoments& mo);

struct RxDeltas {
  cd delta1;
  cd delta2;
};

/// Linear coefficient and coupling to every other active entry for entry (a, m).
RxDeltas build_rx_deltas(const RxWorkspace& ws, const Eigen::MatrixXcd& u_rf, int a, int m);

/// -(delta2 - delta1)/|delta2 - delta1|, or the incumbent when they coincide.
cd cd_update_rx_ps(const RxDeltas& d, cd incumbent);
cd robust_rx_ps_update(const RxDeltas& d, cd incumbent, const PhaseErrorMoments& mo);

/// Coordinate descent over the masked entries of U_RF,k. Coupling sums are kept
/// incrementally and recomputed in full at the start of each sweep.
CdResult optimize_rx_cd(const RxWorkspace& ws, Eigen::MatrixXcd& u_rf, const CdOptions& opts = {},
                        const PhaseErrorMoments* robust = nullptr);

}  // namespace hyprec::analog
