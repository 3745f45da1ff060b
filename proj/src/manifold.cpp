#include "hyprec/manifold.hpp"

#include <algorithm>
#include <cmath>

namespace hyprec::manifold {

Eigen::VectorXcd euclidean_grad_tx(const analog::TxWorkspace& ws, const Eigen::VectorXcd& v) { return ws.q * v - ws.u; }

Eigen::MatrixXcd euclidean_grad_rx(const analog::RxWorkspace& ws, const Eigen::MatrixXcd& u_rf) {
  Eigen::MatrixXcd g = -ws.d;
  for (size_t s = 0; s < ws.o.size(); ++s) g += ws.o[s] * u_rf * ws.p[s];
  return g.cwiseProduct(ws.mask.cast<cd>());
}

Eigen::MatrixXcd euclidean_grad_rx(const HybridState& st, const model::ChannelSet& ch, int k) {
  return euclidean_grad_rx(analog::build_rx_workspace(st, ch, k), st.u_rf[static_cast<size_t>(k)]);
}

Eigen::VectorXcd riemannian_grad(const Eigen::VectorXcd& point, const Eigen::VectorXcd& g) {
  const Eigen::VectorXd radial = g.cwiseProduct(point.conjugate()).real();
  return g - radial.cast<cd>().cwiseProduct(point);
}

Eigen::VectorXcd retract(const Eigen::VectorXcd& point, const Eigen::VectorXcd& eta, double alpha) {
  Eigen::VectorXcd y = point + alpha * eta;
  for (auto& v : y) {
    const double mag = std::abs(v);
    if (!(mag > 0)) throw NumericalError("retract: step lands on the origin");
    v /= mag;
  }
  return y;
}

Eigen::VectorXcd transport(const Eigen::VectorXcd& eta, const Eigen::VectorXcd& new_point) {
  return riemannian_grad(new_point, eta);
}

namespace {

// Re(a^H b) with the real inner product induced by df = 2 Re(g^H dx).
double inner(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return std::real(a.dot(b)); }

}  // namespace

ArmijoResult armijo_step(const ObjectiveBundle& obj, const Eigen::VectorXcd& point, double f0,
                         const Eigen::VectorXcd& eta, const Eigen::VectorXcd& zeta, double beta, double c,
                         int max_halvings) {
  ArmijoResult r;
  const double slope = inner(zeta, eta);
  double alpha = 1.0;
  for (int i = 0; i <= max_halvings; ++i, alpha *= beta) {
    Eigen::VectorXcd x;
    try {
      x = retract(point, eta, alpha);
    } catch (const NumericalError&) {
      continue;
    }
    const double f = obj.f(x);
    if (f0 - f >= -c * alpha * slope) {
      r.alpha = alpha;
      r.f_new = f;
      r.point = std::move(x);
      return r;
    }
  }
  r.alpha = 0;
  r.f_new = f0;
  r.point = point;
  r.stagnated = true;
  return r;
}

RcgResult rcg_optimize(const ObjectiveBundle& obj, const Eigen::VectorXcd& x0, const RcgOptions& opts) {
  RcgResult res;
  Eigen::VectorXcd x = x0;
  double f = obj.f(x);
  Eigen::VectorXcd zeta = riemannian_grad(x, obj.grad(x));
  Eigen::VectorXcd eta = -zeta;
  const double threshold = opts.tol * std::max(1.0, zeta.norm());
  res.f_trace.push_back(f);
  res.grad_norm.push_back(zeta.norm());
  while (res.iterations < opts.max_iter) {
    if (zeta.norm() < threshold) {
      res.converged = true;
      break;
    }
    if (inner(zeta, eta) >= 0) eta = -zeta;  // not a descent direction: restart
    ArmijoResult step = armijo_step(obj, x, f, eta, zeta, opts.beta, opts.c, opts.max_halvings);
    if (step.stagnated) {
      res.stagnated = true;
      break;
    }
    ++res.iterations;
    const Eigen::VectorXcd x_new = std::move(step.point);
    const Eigen::VectorXcd zeta_new = riemannian_grad(x_new, obj.grad(x_new));
    const Eigen::VectorXcd zeta_moved = transport(zeta, x_new);
    const Eigen::VectorXcd eta_moved = transport(eta, x_new);
    const double denom = inner(zeta, zeta);
    double pr = denom > 0 ? inner(zeta_new, zeta_new - zeta_moved) / denom : 0.0;
    pr = std::max(pr, 0.0);
    eta = -zeta_new + pr * eta_moved;
    x = x_new;
    zeta = zeta_new;
    f = step.f_new;
    res.f_trace.push_back(f);
    res.grad_norm.push_back(zeta.norm());
  }
  if (!res.converged && zeta.norm() < threshold) res.converged = true;
  res.point = std::move(x);
  return res;
}

ObjectiveBundle tx_bundle(const analog::TxWorkspace& ws) {
  ObjectiveBundle b;
  b.f = [ws](const Eigen::VectorXcd& v) { return analog::tx_objective(ws, v); };
  b.grad = [ws](const Eigen::VectorXcd& v) { return euclidean_grad_tx(ws, v); };
  return b;
}

Eigen::VectorXcd pack_masked(const Eigen::MatrixXcd& m, const Eigen::MatrixXd& mask) {
  std::vector<cd> vals;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (mask(r, c) != 0) vals.push_back(m(r, c));
  return Eigen::Map<Eigen::VectorXcd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::MatrixXcd unpack_masked(const Eigen::VectorXcd& x, const Eigen::MatrixXd& mask) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(mask.rows(), mask.cols());
  Eigen::Index i = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (mask(r, c) != 0) m(r, c) = x[i++];
  if (i != x.size()) throw DimensionError("unpack_masked: vector length differs from mask support");
  return m;
}

ObjectiveBundle rx_bundle(const analog::RxWorkspace& ws) {
  ObjectiveBundle b;
  b.f = [ws](const Eigen::VectorXcd& x) { return analog::rx_objective(ws, unpack_masked(x, ws.mask)); };
  b.grad = [ws](const Eigen::VectorXcd& x) {
    return pack_masked(euclidean_grad_rx(ws, unpack_masked(x, ws.mask)), ws.mask);
  };
  return b;
}

}  // namespace hyprec::manifold
