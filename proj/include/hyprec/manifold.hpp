#pragma once

#include <functional>
#include <vector>

#include "hyprec/analog.hpp"

namespace hyprec::manifold {

/// Objective on the complex torus with its Wirtinger gradient df/d(conj x).
/// For real-valued f, df = 2 Re(grad^H dx).
struct ObjectiveBundle {
  std::function<double(const Eigen::VectorXcd&)> f;
  std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> grad;
};

/// Q v - u.
Eigen::VectorXcd euclidean_grad_tx(const analog::TxWorkspace& ws, const Eigen::VectorXcd& v);
/// sum_s O_s U P_s - D, zero outside the connectivity mask.
Eigen::MatrixXcd euclidean_grad_rx(const analog::RxWorkspace& ws, const Eigen::MatrixXcd& u_rf);
Eigen::MatrixXcd euclidean_grad_rx(const HybridState& st, const model::ChannelSet& ch, int k);

/// Tangent projection g - Re(g .* conj(x)) .* x.
Eigen::VectorXcd riemannian_grad(const Eigen::VectorXcd& point, const Eigen::VectorXcd& euclid_grad);
/// Elementwise normalization of point + alpha * eta. Throws NumericalError on a zero entry.
Eigen::VectorXcd retract(const Eigen::VectorXcd& point, const Eigen::VectorXcd& eta, double alpha);
Eigen::VectorXcd transport(const Eigen::VectorXcd& eta, const Eigen::VectorXcd& new_point);

struct ArmijoResult {
  double alpha = 0;
  double f_new = 0;
  Eigen::VectorXcd point;
  bool stagnated = false;
};

/// Largest alpha = beta^i with f(x) - f(R(x, alpha eta)) >= -c alpha Re(zeta^H eta).
ArmijoResult armijo_step(const ObjectiveBundle& obj, const Eigen::VectorXcd& point, double f0,
                         const Eigen::VectorXcd& eta, const Eigen::VectorXcd& zeta, double beta = 0.5,
                         double c = 1e-4, int max_halvings = 60);

struct RcgOptions {
  double tol = 1e-6;  // on ||zeta||, relative to max(1, ||zeta_0||)
  int max_iter = 500;
  double beta = 0.5;
  double c = 1e-4;
  int max_halvings = 60;
};

struct RcgResult {
  Eigen::VectorXcd point;
  std::vector<double> f_trace;
  std::vector<double> grad_norm;
  int iterations = 0;
  bool converged = false;
  bool stagnated = false;
};

/// Riemannian conjugate gradient with Polak-Ribiere directions clipped at zero.
RcgResult rcg_optimize(const ObjectiveBundle& obj, const Eigen::VectorXcd& x0, const RcgOptions& opts = {});

ObjectiveBundle tx_bundle(const analog::TxWorkspace& ws);

/// Optimizes the masked entries of U_RF,k, packed column-major into a vector.
Eigen::VectorXcd pack_masked(const Eigen::MatrixXcd& m, const Eigen::MatrixXd& mask);
Eigen::MatrixXcd unpack_masked(const Eigen::VectorXcd& x, const Eigen::MatrixXd& mask);
ObjectiveBundle rx_bundle(const analog::RxWorkspace& ws);

}  // namespace hyprec::manifold
