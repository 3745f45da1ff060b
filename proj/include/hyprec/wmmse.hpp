#pragma once

#include "hyprec/model.hpp"
#include "hyprec/state.hpp"

namespace hyprec::wmmse {

/// Solves M X = B for Hermitian positive definite M, with a small diagonal
/// jitter retry when the factorization fails. Throws NumericalError.
Eigen::MatrixXcd hpd_solve(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& b);

/// U_RF,k^H H_k^s V_RF.
Eigen::MatrixXcd effective_channel(const HybridState& st, const model::ChannelSet& ch, int k, int s);

/// Interference-plus-noise covariance at the RF output of user k, excluding user k's own stream.
Eigen::MatrixXcd interference_covariance(const HybridState& st, const model::ChannelSet& ch, int k, int s);

Eigen::MatrixXcd mse_matrix(const HybridState& st, const model::ChannelSet& ch, int k, int s);

/// Achievable rate of user k on subcarrier s in bits/s/Hz, combiner included.
double rate(const HybridState& st, const model::ChannelSet& ch, int k, int s);
double sum_rate(const HybridState& st, const model::ChannelSet& ch);

/// MMSE digital combiner for user k on subcarrier s.
Eigen::MatrixXcd update_digital_combiner(const HybridState& st, const model::ChannelSet& ch, int k, int s);
/// W = E^-1 evaluated at the current combiner.
Eigen::MatrixXcd update_weight(const HybridState& st, const model::ChannelSet& ch, int k, int s);

void update_all_combiners(HybridState& st, const model::ChannelSet& ch);
void update_all_weights(HybridState& st, const model::ChannelSet& ch);

/// sum tr(W E) - ln det W over all users and subcarriers (natural log).
double wmmse_objective(const HybridState& st, const model::ChannelSet& ch);

/// ln det of a Hermitian positive definite matrix.
double log_det_hpd(const Eigen::MatrixXcd& m);

}  // namespace hyprec::wmmse
