#include "hyprec/ofdm.hpp"

#include <algorithm>
#include <cmath>

namespace hyprec::ofdm {

Eigen::MatrixXcd synthesis_matrix(int num_subcarriers, int oversampling) {
  const int n_samples = num_subcarriers * oversampling;
  Eigen::MatrixXcd f(n_samples, num_subcarriers);
  for (int n = 0; n < n_samples; ++n)
    for (int si = 0; si < num_subcarriers; ++si) {
      const int s = subcarrier_value(si, num_subcarriers);
      // Reduce the phase index modulo lS to keep the argument small.
      const long long idx = (static_cast<long long>(s) * n) % n_samples;
      f(n, si) = std::polar(1.0, 2 * kPi * static_cast<double>(idx) / n_samples);
    }
  return f;
}

SpectralPlan make_base_plan(const SystemConfig& cfg) {
  SpectralPlan p;
  p.num_subcarriers = cfg.num_subcarriers;
  p.oversampling = cfg.oversampling;
  p.t_sym = cfg.t_sym();
  p.t_guard = cfg.t_guard();
  p.t_total = cfg.t_total();
  p.l_diag = Eigen::VectorXd::Zero(cfg.num_subcarriers);
  p.synthesis = synthesis_matrix(cfg.num_subcarriers, cfg.oversampling);
  return p;
}

SpectralPlan make_plan(const SystemConfig& cfg) {
  SpectralPlan p = make_base_plan(cfg);
  p.notch_step_hz = cfg.notch_step_hz;
  p.l_diag = notch_diag_bands(cfg.notch_bands, cfg.notch_step_hz, p);
  return p;
}

cd pulse_spectrum(double f, int s_value, const SpectralPlan& plan) {
  const double d = f - s_value / plan.t_sym;
  const double x = kPi * plan.t_total * d;
  const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
  return plan.t_total * sinc * std::polar(1.0, -kPi * (plan.t_sym - plan.t_guard) * d);
}

namespace {

double pulse_power(double f, int s_value, const SpectralPlan& plan) {
  const double x = kPi * plan.t_total * (f - s_value / plan.t_sym);
  const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
  return plan.t_total * plan.t_total * sinc * sinc;
}

}  // namespace

Eigen::VectorXd notch_diag(const std::vector<double>& freqs, const SpectralPlan& plan) {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(plan.num_subcarriers);
  for (int si = 0; si < plan.num_subcarriers; ++si) {
    const int s = subcarrier_value(si, plan.num_subcarriers);
    for (double f : freqs) l[si] += pulse_power(f, s, plan);
  }
  return l;
}

Eigen::VectorXd notch_diag_bands(const std::vector<std::pair<double, double>>& bands, double step,
                                 const SpectralPlan& plan) {
  if (!(step > 0)) throw ParameterError("notch_diag_bands: step must be positive");
  Eigen::VectorXd l = Eigen::VectorXd::Zero(plan.num_subcarriers);
  for (const auto& [lo, hi] : bands) {
    const long long count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int si = 0; si < plan.num_subcarriers; ++si) {
      const int s = subcarrier_value(si, plan.num_subcarriers);
      double acc = 0;
      for (long long j = 0; j < count; ++j) acc += pulse_power(lo + static_cast<double>(j) * step, s, plan);
      l[si] += acc;
    }
  }
  return l;
}

SymbolGrid draw_symbols(const HybridState& st, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  SymbolGrid out(st.v_digital.size());
  for (size_t k = 0; k < st.v_digital.size(); ++k) {
    out[k].resize(st.v_digital[k].size());
    for (size_t s = 0; s < st.v_digital[k].size(); ++s) {
      Eigen::VectorXcd w(st.v_digital[k][s].cols());
      for (auto& x : w) {
        const double re = normal(rng);
        x = cd(re, normal(rng));
      }
      out[k][s] = std::move(w);
    }
  }
  return out;
}

Eigen::VectorXcd antenna_weights(const HybridState& st, const SymbolGrid& symbols, int a) {
  const int S = st.num_subcarriers();
  const int m = st.tx_chain.at(static_cast<size_t>(a));
  if (symbols.size() != st.v_digital.size()) throw DimensionError("antenna_weights: user count");
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(S);
  for (size_t k = 0; k < st.v_digital.size(); ++k) {
    if (static_cast<int>(symbols[k].size()) != S) throw DimensionError("antenna_weights: subcarrier count");
    for (int s = 0; s < S; ++s) {
      const auto& v = st.v_digital[k][static_cast<size_t>(s)];
      const auto& sym = symbols[k][static_cast<size_t>(s)];
      if (sym.size() != v.cols()) throw DimensionError("antenna_weights: symbol length differs from stream count");
      w[s] += (v.row(m) * sym).value();
    }
  }
  return w * st.v_ps[a];
}

Eigen::VectorXcd time_signal(const HybridState& st, const SymbolGrid& symbols, int a, const SpectralPlan& plan) {
  return plan.synthesis * antenna_weights(st, symbols, a);
}

Papr papr(const Eigen::VectorXcd& x) { return papr(x, x.squaredNorm()); }

Papr papr(const Eigen::VectorXcd& x, double expected_energy) {
  if (x.size() == 0 || !(expected_energy > 0)) throw NumericalError("papr: zero signal energy");
  const double peak = x.cwiseAbs2().maxCoeff();
  Papr p;
  p.paper = peak / expected_energy;
  p.conventional = p.paper * static_cast<double>(x.size());
  return p;
}

Eigen::VectorXcd clip(const Eigen::VectorXcd& x, double level) {
  if (!(level > 0)) throw ParameterError("clip: level must be positive");
  Eigen::VectorXcd y = x;
  for (auto& v : y)
    if (std::abs(v) > level) v = std::polar(level, std::arg(v));
  return y;
}

double chain_energy(const MatrixGrid& v, int m) {
  double e = 0;
  for (const auto& vk : v)
    for (const auto& vks : vk) e += vks.row(m).squaredNorm();
  return e;
}

double weighted_chain_energy(const MatrixGrid& v, const Eigen::VectorXd& l_diag, int m) {
  double e = 0;
  for (const auto& vk : v)
    for (size_t s = 0; s < vk.size(); ++s) e += l_diag[static_cast<Eigen::Index>(s)] * vk[s].row(m).squaredNorm();
  return e;
}

namespace {

Eigen::VectorXd subcarrier_power(const HybridState& st) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(st.num_subcarriers());
  for (const auto& vk : st.v_digital)
    for (size_t s = 0; s < vk.size(); ++s) p[static_cast<Eigen::Index>(s)] += vk[s].squaredNorm();
  return p * st.subarray_gain();
}

}  // namespace

Eigen::VectorXd psd_analytic(const HybridState& st, const std::vector<double>& freqs, const SpectralPlan& plan) {
  const Eigen::VectorXd p = subcarrier_power(st);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(freqs.size()));
  for (size_t i = 0; i < freqs.size(); ++i)
    for (int si = 0; si < plan.num_subcarriers; ++si)
      out[static_cast<Eigen::Index>(i)] += pulse_power(freqs[i], subcarrier_value(si, plan.num_subcarriers), plan) * p[si];
  return out;
}

std::vector<double> default_psd_grid(const SystemConfig& cfg, int points) {
  std::vector<double> f(static_cast<size_t>(points));
  const double half = 1.5 * cfg.bandwidth_hz;
  for (int i = 0; i < points; ++i) f[static_cast<size_t>(i)] = -half + 2 * half * i / (points - 1);
  return f;
}

double energy_to_dbm(double energy_j, const SpectralPlan& plan) {
  return std::max(watts_to_dbm(std::max(energy_j / plan.t_total, 0.0)), -300.0);
}

double oob_energy(const HybridState& st, const SpectralPlan& plan) {
  return plan.notch_step_hz * plan.l_diag.dot(subcarrier_power(st));
}

double inband_energy(const HybridState& st, const SpectralPlan& plan, double bandwidth_hz, int points) {
  std::vector<double> f(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) f[static_cast<size_t>(i)] = -bandwidth_hz / 2 + bandwidth_hz * i / (points - 1);
  const Eigen::VectorXd psd = psd_analytic(st, f, plan);
  const double h = bandwidth_hz / (points - 1);
  return h * (psd.sum() - 0.5 * (psd[0] + psd[points - 1]));
}

double papr_prob_bound(int oversampling, int num_subcarriers, double papr_max) {
  return std::exp(-static_cast<double>(oversampling) * num_subcarriers * papr_max / 2);
}

double clipping_bound_lhs(const MatrixGrid& v, double eps, int m) {
  if (!(eps > 0 && eps < 1)) throw ParameterError("clipping_bound_lhs: eps must lie in (0,1)");
  return std::sqrt(-2 * std::log(eps) * chain_energy(v, m));
}

double spectral_bound_lhs(const MatrixGrid& v, const Eigen::VectorXd& l_diag, int m) {
  return std::sqrt(weighted_chain_energy(v, l_diag, m));
}

}  // namespace hyprec::ofdm
