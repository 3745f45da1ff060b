#include "hyprec/admm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hyprec/wmmse.hpp"

namespace hyprec::admm {

namespace {

Eigen::MatrixXcd& at(MatrixGrid& g, int k, int s) { return g[static_cast<size_t>(k)][static_cast<size_t>(s)]; }
const Eigen::MatrixXcd& at(const MatrixGrid& g, int k, int s) { return g[static_cast<size_t>(k)][static_cast<size_t>(s)]; }

double grid_diff_norm2(const MatrixGrid& x, const MatrixGrid& y) {
  double n = 0;
  for (size_t k = 0; k < x.size(); ++k)
    for (size_t s = 0; s < x[k].size(); ++s) n += (x[k][s] - y[k][s]).squaredNorm();
  return n;
}

// Row energies of chain m per subcarrier, summed over users.
Eigen::VectorXd chain_row_energy(const MatrixGrid& x, int m, int num_subcarriers) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(num_subcarriers);
  for (const auto& xk : x)
    for (int s = 0; s < num_subcarriers; ++s) e[s] += xk[static_cast<size_t>(s)].row(m).squaredNorm();
  return e;
}

int num_rows(const MatrixGrid& x) {
  return x.empty() || x.front().empty() ? 0 : static_cast<int>(x.front().front().rows());
}

// Bisection for the smallest root of a decreasing function crossing `target`,
// with the bracket [0, hi] grown by doubling. Returns the feasible (upper) end.
template <class F>
double bisect_decreasing(F&& fn, double target, double hi_guess) {
  double lo = 0, hi = std::max(hi_guess, 1e-300);
  int grow = 0;
  while (fn(hi) > target) {
    lo = hi;
    hi *= 2;
    if (++grow > 2000 || !std::isfinite(hi)) throw NumericalError("bisection: failed to bracket the root");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fn(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace

double grid_norm2(const MatrixGrid& g) {
  double n = 0;
  for (const auto& gk : g)
    for (const auto& m : gk) n += m.squaredNorm();
  return n;
}

MatrixGrid grid_axpy(double alpha, const MatrixGrid& x, const MatrixGrid& y) {
  MatrixGrid out = y;
  for (size_t k = 0; k < x.size(); ++k)
    for (size_t s = 0; s < x[k].size(); ++s) out[k][s] += alpha * x[k][s];
  return out;
}

MatrixGrid grid_zero_like(const MatrixGrid& g) {
  MatrixGrid out = g;
  for (auto& gk : out)
    for (auto& m : gk) m.setZero();
  return out;
}

void DigitalSubproblem::prepare() {
  eig_values.clear();
  eig_vectors.clear();
  for (const auto& as : a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (as + as.adjoint()));
    if (es.info() != Eigen::Success) throw NumericalError("admm: eigendecomposition failed");
    eig_values.push_back(es.eigenvalues().cwiseMax(0.0));
    eig_vectors.push_back(es.eigenvectors());
  }
}

double DigitalSubproblem::objective(const MatrixGrid& v) const {
  double f = constant;
  for (int k = 0; k < num_users; ++k)
    for (int s = 0; s < num_subcarriers; ++s) {
      const auto& vk = at(v, k, s);
      f += std::real((vk.adjoint() * a[static_cast<size_t>(s)] * vk).trace()) -
           2 * std::real((at(b, k, s).adjoint() * vk).trace());
    }
  return f;
}

double DigitalSubproblem::power(const MatrixGrid& v, int s) const {
  double p = 0;
  for (int k = 0; k < num_users; ++k) p += at(v, k, s).squaredNorm();
  return subarray_gain * p;
}

double DigitalSubproblem::power_excess(const MatrixGrid& v) const {
  double e = 0;
  for (int s = 0; s < num_subcarriers; ++s) e = std::max(e, power(v, s) - power_budget);
  return e;
}

double DigitalSubproblem::spectral_excess(const MatrixGrid& v) const {
  if (!std::isfinite(spectral_rhs)) return 0;
  double e = 0;
  for (int m = 0; m < num_rf_chains; ++m) e = std::max(e, ofdm::spectral_bound_lhs(v, l_diag, m) - spectral_rhs);
  return e;
}

double DigitalSubproblem::clip_excess(const MatrixGrid& v) const {
  if (!std::isfinite(clip_radius)) return 0;
  double e = 0;
  for (int m = 0; m < num_rf_chains; ++m) e = std::max(e, std::sqrt(ofdm::chain_energy(v, m)) - clip_radius);
  return e;
}

bool DigitalSubproblem::feasible(const MatrixGrid& v, double rel_tol) const {
  return power_excess(v) <= rel_tol * power_budget + 1e-300 &&
         spectral_excess(v) <= rel_tol * (std::isfinite(spectral_rhs) ? spectral_rhs : 0) + 1e-300 &&
         clip_excess(v) <= rel_tol * (std::isfinite(clip_radius) ? clip_radius : 0) + 1e-300;
}

DigitalSubproblem build_subproblem(const HybridState& st, const model::ChannelSet& ch, const SystemConfig& cfg,
                                   const ofdm::SpectralPlan& plan) {
  DigitalSubproblem p;
  p.num_users = st.num_users();
  p.num_subcarriers = st.num_subcarriers();
  p.num_rf_chains = st.num_tx_rf_chains;
  for (const auto& vk : st.v_digital) p.streams.push_back(static_cast<int>(vk.front().cols()));
  p.subarray_gain = st.subarray_gain();
  p.b.resize(static_cast<size_t>(p.num_users));
  for (auto& bk : p.b) bk.resize(static_cast<size_t>(p.num_subcarriers));
  for (int s = 0; s < p.num_subcarriers; ++s) {
    Eigen::MatrixXcd as = Eigen::MatrixXcd::Zero(p.num_rf_chains, p.num_rf_chains);
    for (int k = 0; k < p.num_users; ++k) {
      const Eigen::MatrixXcd g = wmmse::effective_channel(st, ch, k, s);
      const auto& u = at(st.u_digital, k, s);
      const auto& w = at(st.weights, k, s);
      const Eigen::MatrixXcd gu = g.adjoint() * u;
      as += gu * w * gu.adjoint();
      at(p.b, k, s) = gu * w;
      const Eigen::MatrixXcd nu = st.u_rf[static_cast<size_t>(k)] * u;
      p.constant += std::real(w.trace()) + ch.noise_var * std::real((w * nu.adjoint() * nu).trace()) -
                    wmmse::log_det_hpd(w);
    }
    p.a.push_back(0.5 * (as + as.adjoint()));
  }
  p.power_budget = cfg.power_budget_w;
  p.l_diag = plan.l_diag;
  p.spectral_rhs = cfg.spectral_rhs;
  p.clip_radius = std::isfinite(cfg.clip_level) ? cfg.clip_level / std::sqrt(-2 * std::log(cfg.clip_prob)) : kInf;
  p.prepare();
  return p;
}

double reference_rho(const DigitalSubproblem& p) {
  double tr = 0;
  for (const auto& as : p.a) tr += std::real(as.trace());
  const double mean = tr / std::max(1, p.num_subcarriers * p.num_rf_chains);
  return mean > 0 ? mean : 1.0;
}

AdmmState init_state(const DigitalSubproblem& p, const MatrixGrid& v, const AdmmOptions& opts) {
  AdmmState st;
  st.r = v;
  st.z = v;
  st.lambda1 = grid_zero_like(v);
  st.lambda2 = grid_zero_like(v);
  st.rho = opts.rho0 * reference_rho(p);
  st.power_duals = Eigen::VectorXd::Zero(p.num_subcarriers);
  return st;
}

MatrixGrid solve_power_constrained(const DigitalSubproblem& p, const MatrixGrid& rhs, double half_rho,
                                   Eigen::VectorXd* duals) {
  DigitalSubproblem local;
  const DigitalSubproblem* src = &p;
  if (p.eig_values.size() != p.a.size()) {
    local = p;
    local.prepare();
    src = &local;
  }
  const double c = p.subarray_gain;
  MatrixGrid out = rhs;
  if (duals) duals->setZero(p.num_subcarriers);
  for (int s = 0; s < p.num_subcarriers; ++s) {
    const auto& q = src->eig_vectors[static_cast<size_t>(s)];
    const auto& d = src->eig_values[static_cast<size_t>(s)];
    int total = 0;
    for (int k = 0; k < p.num_users; ++k) total += static_cast<int>(at(rhs, k, s).cols());
    Eigen::MatrixXcd stacked(p.num_rf_chains, total);
    for (int k = 0, col = 0; k < p.num_users; ++k) {
      const auto& r = at(rhs, k, s);
      stacked.middleCols(col, r.cols()) = r;
      col += static_cast<int>(r.cols());
    }
    const Eigen::MatrixXcd y = q.adjoint() * stacked;
    const Eigen::VectorXd e = y.rowwise().squaredNorm();
    const double dmax = d.size() ? d.maxCoeff() : 0;
    // Directions with no curvature and no regularization carry no energy (pseudo-inverse).
    const double null_tol = 1e-12 * std::max(dmax, 1e-300);
    auto coeff = [&](Eigen::Index i, double th) {
      const double den = d[i] + half_rho + c * th;
      return den > null_tol ? 1.0 / den : 0.0;
    };
    auto power = [&](double th) {
      double pw = 0;
      for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double f = coeff(i, th);
        pw += e[i] * f * f;
      }
      return c * pw;
    };
    double theta = 0;
    if (!(p.power_budget > 0)) {
      theta = kInf;
    } else if (power(0) > p.power_budget) {
      // power(th) <= sum(e) / (c th^2), so this guess is already an upper bracket; start below it.
      const double guess = std::sqrt(e.sum() / (c * p.power_budget)) / 1024;
      theta = bisect_decreasing(power, p.power_budget, guess);
    }
    Eigen::MatrixXcd sol = Eigen::MatrixXcd::Zero(p.num_rf_chains, total);
    if (std::isfinite(theta)) {
      Eigen::VectorXd f(e.size());
      for (Eigen::Index i = 0; i < e.size(); ++i) f[i] = coeff(i, theta);
      sol = q * (f.asDiagonal() * y);
    }
    for (int k = 0, col = 0; k < p.num_users; ++k) {
      auto& o = at(out, k, s);
      o = sol.middleCols(col, o.cols());
      col += static_cast<int>(o.cols());
    }
    if (duals) (*duals)[s] = theta;
  }
  return out;
}

MatrixGrid update_v(AdmmState& st, const DigitalSubproblem& p) {
  MatrixGrid rhs = p.b;
  for (int k = 0; k < p.num_users; ++k)
    for (int s = 0; s < p.num_subcarriers; ++s)
      at(rhs, k, s) += 0.5 * (st.rho * at(st.r, k, s) - at(st.lambda1, k, s));
  return solve_power_constrained(p, rhs, 0.5 * st.rho, &st.power_duals);
}

MatrixGrid project_spectral(const MatrixGrid& x, const Eigen::VectorXd& l_diag, double rhs, SpectralProjection mode) {
  if (!std::isfinite(rhs)) return x;
  MatrixGrid out = x;
  const int S = static_cast<int>(l_diag.size());
  const double target = rhs * rhs;
  for (int m = 0; m < num_rows(x); ++m) {
    const Eigen::VectorXd n = chain_row_energy(x, m, S);
    const double current = l_diag.dot(n);
    if (current <= target) continue;
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(S);
    if (mode == SpectralProjection::Radial) {
      scale.setConstant(std::sqrt(target / current));
    } else if (target <= 0) {
      for (int s = 0; s < S; ++s)
        if (l_diag[s] > 0) scale[s] = 0;
    } else {
      // Rows shrink by 1/(1 + mu l_s); mu solves sum_s l_s n_s / (1 + mu l_s)^2 = rhs^2.
      auto g = [&](double mu) {
        double v = 0;
        for (int s = 0; s < S; ++s) v += l_diag[s] * n[s] / ((1 + mu * l_diag[s]) * (1 + mu * l_diag[s]));
        return v;
      };
      const double mu = bisect_decreasing(g, target, 1.0 / std::max(l_diag.maxCoeff(), 1e-300));
      for (int s = 0; s < S; ++s) scale[s] = 1.0 / (1 + mu * l_diag[s]);
    }
    for (auto& xk : out)
      for (int s = 0; s < S; ++s) xk[static_cast<size_t>(s)].row(m) *= scale[s];
  }
  return out;
}

MatrixGrid project_clip(const MatrixGrid& x, double radius) {
  if (!std::isfinite(radius)) return x;
  MatrixGrid out = x;
  for (int m = 0; m < num_rows(x); ++m) {
    const double e = ofdm::chain_energy(x, m);
    if (e <= radius * radius) continue;
    const double scale = radius / std::sqrt(e);
    for (auto& xk : out)
      for (auto& xks : xk) xks.row(m) *= scale;
  }
  return out;
}

MatrixGrid update_r(AdmmState& st, const MatrixGrid& v, const DigitalSubproblem& p, SpectralProjection mode) {
  MatrixGrid tilde = v;
  for (int k = 0; k < p.num_users; ++k)
    for (int s = 0; s < p.num_subcarriers; ++s)
      at(tilde, k, s) = 0.5 * (at(v, k, s) + at(st.lambda1, k, s) / st.rho + at(st.z, k, s) -
                               at(st.lambda2, k, s) / st.rho);
  st.r = project_spectral(tilde, p.l_diag, p.spectral_rhs, mode);
  return st.r;
}

MatrixGrid update_z(AdmmState& st, const DigitalSubproblem& p) {
  MatrixGrid tilde = st.r;
  for (int k = 0; k < p.num_users; ++k)
    for (int s = 0; s < p.num_subcarriers; ++s) at(tilde, k, s) += at(st.lambda2, k, s) / st.rho;
  st.z = project_clip(tilde, p.clip_radius);
  return st.z;
}

void update_duals(AdmmState& st, const MatrixGrid& v) {
  for (size_t k = 0; k < v.size(); ++k)
    for (size_t s = 0; s < v[k].size(); ++s) {
      st.lambda1[k][s] += st.rho * (v[k][s] - st.r[k][s]);
      st.lambda2[k][s] += st.rho * (st.r[k][s] - st.z[k][s]);
    }
}

namespace {

// Scales chains (and subcarriers, for power) down so every constraint holds.
MatrixGrid polish(const DigitalSubproblem& p, MatrixGrid v) {
  for (int m = 0; m < p.num_rf_chains; ++m) {
    double f = 1;
    if (std::isfinite(p.spectral_rhs)) {
      const double lhs = ofdm::spectral_bound_lhs(v, p.l_diag, m);
      if (lhs > p.spectral_rhs) f = std::min(f, p.spectral_rhs / lhs);
    }
    if (std::isfinite(p.clip_radius)) {
      const double lhs = std::sqrt(ofdm::chain_energy(v, m));
      if (lhs > p.clip_radius) f = std::min(f, p.clip_radius / lhs);
    }
    if (f < 1)
      for (auto& vk : v)
        for (auto& vks : vk) vks.row(m) *= f * (1 - 1e-15);
  }
  for (int s = 0; s < p.num_subcarriers; ++s) {
    const double pw = p.power(v, s);
    if (pw > p.power_budget) {
      const double f = p.power_budget > 0 ? std::sqrt(p.power_budget / pw) * (1 - 1e-15) : 0.0;
      for (auto& vk : v) vk[static_cast<size_t>(s)] *= f;
    }
  }
  return v;
}

}  // namespace

AdmmResult admm_solve(const DigitalSubproblem& p_in, const MatrixGrid& v_prev, const AdmmOptions& opts) {
  DigitalSubproblem p = p_in;
  if (p.eig_values.size() != p.a.size()) p.prepare();
  AdmmResult res;

  if (opts.shortcut) {
    Eigen::VectorXd duals;
    MatrixGrid v0 = solve_power_constrained(p, p.b, 0.0, &duals);
    if (p.spectral_excess(v0) <= 0 && p.clip_excess(v0) <= 0) {
      res.state = init_state(p, v0, opts);
      res.state.power_duals = duals;
      res.state.primal_res.push_back(0);
      res.state.dual_res.push_back(0);
      res.state.rho_history.push_back(res.state.rho);
      res.state.objective.push_back(p.objective(v0));
      res.v = std::move(v0);
      res.iterations = 1;
      res.converged = true;
      res.used_shortcut = true;
      return res;
    }
  }

  AdmmState st = init_state(p, v_prev, opts);
  const double rho_floor = 1e-8 * st.rho, rho_ceil = 1e8 * st.rho;
  const double b_norm = std::sqrt(grid_norm2(p.b));
  MatrixGrid v = v_prev;
  for (int it = 1; it <= opts.max_iter; ++it) {
    v = update_v(st, p);
    const MatrixGrid r_old = st.r, z_old = st.z;
    update_r(st, v, p, opts.projection);
    update_z(st, p);
    update_duals(st, v);
    const double primal = std::sqrt(grid_diff_norm2(v, st.r) + grid_diff_norm2(st.r, st.z));
    const double dual = st.rho * std::sqrt(grid_diff_norm2(st.r, r_old) + grid_diff_norm2(st.z, z_old));
    st.primal_res.push_back(primal);
    st.dual_res.push_back(dual);
    st.rho_history.push_back(st.rho);
    st.objective.push_back(p.objective(v));
    res.iterations = it;
    const double scale_p =
        std::max({std::sqrt(grid_norm2(v)), std::sqrt(grid_norm2(st.r)), std::sqrt(grid_norm2(st.z)), 1e-300});
    const double scale_d =
        std::max({std::sqrt(grid_norm2(st.lambda1)) + std::sqrt(grid_norm2(st.lambda2)), b_norm, 1e-300});
    const double rp = primal / scale_p, rd = dual / scale_d;
    if (rp <= opts.tol && rd <= opts.tol) {
      res.converged = true;
      break;
    }
    if (opts.policy == RhoPolicy::Increasing) {
      st.rho = std::min(st.rho * opts.rho_growth, rho_ceil);
    } else if (opts.policy == RhoPolicy::Balanced) {
      if (rp > opts.balance_ratio * rd)
        st.rho = std::min(st.rho * opts.rho_growth, rho_ceil);
      else if (rd > opts.balance_ratio * rp)
        st.rho = std::max(st.rho / opts.rho_growth, rho_floor);
    }
  }
  if (!res.converged) res.warning = "admm: iteration limit reached before the residual tolerance";
  if (opts.polish) v = polish(p, std::move(v));
  if (opts.keep_if_worse && p.feasible(v_prev) && p.objective(v_prev) <= p.objective(v)) {
    v = v_prev;
    res.kept_previous = true;
  }
  res.v = std::move(v);
  res.state = std::move(st);
  return res;
}

std::string residual_csv(const AdmmState& st) {
  std::ostringstream os;
  os << "iter,primal_res,dual_res,rho,objective\n";
  char buf[256];
  for (size_t i = 0; i < st.primal_res.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g\n", i + 1, st.primal_res[i], st.dual_res[i],
                  st.rho_history[i], st.objective[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace hyprec::admm
