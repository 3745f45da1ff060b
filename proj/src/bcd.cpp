#include "hyprec/bcd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hyprec/wmmse.hpp"

namespace hyprec::bcd {

Problem make_problem(const SystemConfig& cfg_in, std::uint64_t seed) {
  Problem pb;
  pb.cfg = cfg_in;
  pb.cfg.validate();
  pb.channels = model::gen_channel(pb.cfg, seed);
  pb.plan = ofdm::make_plan(pb.cfg);
  return pb;
}

HybridState initialize(const Problem& pb, std::uint64_t seed) {
  const SystemConfig& cfg = pb.cfg;
  HybridState st = make_state(cfg);
  auto rng = model::make_rng(seed, 2);
  std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
  for (auto& v : st.v_ps) v = std::polar(1.0, phase(rng));
  for (int k = 0; k < cfg.num_users; ++k) {
    auto& urf = st.u_rf[static_cast<size_t>(k)];
    const auto& mask = st.u_mask[static_cast<size_t>(k)];
    for (Eigen::Index m = 0; m < urf.cols(); ++m)
      for (Eigen::Index a = 0; a < urf.rows(); ++a) urf(a, m) = mask(a, m) != 0 ? std::polar(1.0, phase(rng)) : cd(0);
  }
  int total_streams = 0;
  for (int k = 0; k < cfg.num_users; ++k) total_streams += cfg.streams(k);
  const double scale = std::sqrt(cfg.power_budget_w / (st.subarray_gain() * total_streams));
  for (int k = 0; k < cfg.num_users; ++k)
    for (int s = 0; s < cfg.num_subcarriers; ++s) {
      const Eigen::MatrixXcd hv = st.apply_v_rf(pb.channels.h[static_cast<size_t>(k)][static_cast<size_t>(s)]);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(hv, Eigen::ComputeFullV);
      st.v_digital[static_cast<size_t>(k)][static_cast<size_t>(s)] = scale * svd.matrixV().leftCols(cfg.streams(k));
    }
  const double radius = std::isfinite(cfg.clip_level) ? cfg.clip_level / std::sqrt(-2 * std::log(cfg.clip_prob)) : kInf;
  st.v_digital = admm::project_clip(
      admm::project_spectral(st.v_digital, pb.plan.l_diag, cfg.spectral_rhs, admm::SpectralProjection::Radial), radius);
  wmmse::update_all_combiners(st, pb.channels);
  return st;
}

TraceRow measure(const HybridState& st, const Problem& pb) {
  const SystemConfig& cfg = pb.cfg;
  TraceRow row;
  row.objective = wmmse::wmmse_objective(st, pb.channels);
  row.sum_rate = wmmse::sum_rate(st, pb.channels);
  row.avg_rate_per_subcarrier = row.sum_rate / cfg.num_subcarriers;
  row.power_slack = kInf;
  for (int s = 0; s < cfg.num_subcarriers; ++s) {
    double pw = 0;
    for (const auto& vk : st.v_digital) pw += vk[static_cast<size_t>(s)].squaredNorm();
    row.power_slack = std::min(row.power_slack, cfg.power_budget_w - st.subarray_gain() * pw);
  }
  row.spectral_slack = kInf;
  row.clip_slack = kInf;
  for (int m = 0; m < cfg.num_tx_rf_chains; ++m) {
    if (std::isfinite(cfg.spectral_rhs))
      row.spectral_slack =
          std::min(row.spectral_slack, cfg.spectral_rhs - ofdm::spectral_bound_lhs(st.v_digital, pb.plan.l_diag, m));
    if (std::isfinite(cfg.clip_level))
      row.clip_slack =
          std::min(row.clip_slack, cfg.clip_level - ofdm::clipping_bound_lhs(st.v_digital, cfg.clip_prob, m));
  }
  row.inband_power_dbm = ofdm::energy_to_dbm(ofdm::inband_energy(st, pb.plan, cfg.bandwidth_hz), pb.plan);
  row.oob_power_dbm = ofdm::energy_to_dbm(ofdm::oob_energy(st, pb.plan), pb.plan);
  return row;
}

namespace {

void update_tx_phases(HybridState& st, const Problem& pb, const BcdOptions& opts) {
  analog::TxWorkspace ws = analog::build_tx_workspace(st, pb.channels);
  if (opts.robust) ws = analog::robust_tx_workspace(ws, analog::gaussian_moments(opts.sigma_e));
  if (opts.analog_method == AnalogMethod::CoordinateDescent) {
    analog::optimize_tx_cd(ws, st.v_ps, opts.cd);
  } else {
    const auto res = manifold::rcg_optimize(manifold::tx_bundle(ws), st.v_ps, opts.rcg);
    if (analog::tx_objective(ws, res.point) <= analog::tx_objective(ws, st.v_ps)) st.v_ps = res.point;
  }
}

void update_rx_phases(HybridState& st, const Problem& pb, const BcdOptions& opts) {
  for (int k = 0; k < st.num_users(); ++k) {
    analog::RxWorkspace ws = analog::build_rx_workspace(st, pb.channels, k);
    if (opts.robust) ws = analog::robust_rx_workspace(ws, analog::gaussian_moments(opts.sigma_e));
    auto& urf = st.u_rf[static_cast<size_t>(k)];
    if (opts.analog_method == AnalogMethod::CoordinateDescent) {
      analog::optimize_rx_cd(ws, urf, opts.cd);
    } else {
      const auto& mask = st.u_mask[static_cast<size_t>(k)];
      const auto res = manifold::rcg_optimize(manifold::rx_bundle(ws), manifold::pack_masked(urf, mask), opts.rcg);
      const Eigen::MatrixXcd cand = manifold::unpack_masked(res.point, mask);
      if (analog::rx_objective(ws, cand) <= analog::rx_objective(ws, urf)) urf = cand;
    }
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

TraceRow bcd_iterate(HybridState& st, const Problem& pb, const BcdOptions& opts, int iter,
                     std::vector<std::string>* warnings) {
  const auto& ch = pb.channels;
  std::array<double, 5> blocks{};
  auto tag = [&](const char* block, const std::exception& e) -> std::string {
    return std::string(block) + " block, iteration " + std::to_string(iter) + ": " + e.what();
  };
  try {
    wmmse::update_all_combiners(st, ch);
  } catch (const NumericalError& e) {
    throw NumericalError(tag("combiner", e));
  }
  blocks[0] = wmmse::wmmse_objective(st, ch);
  if (opts.baseline != Baseline::MmseIdentityWeights) {
    try {
      wmmse::update_all_weights(st, ch);
    } catch (const NumericalError& e) {
      throw NumericalError(tag("weight", e));
    }
  }
  blocks[1] = wmmse::wmmse_objective(st, ch);
  int admm_iters = 0;
  try {
    const admm::DigitalSubproblem sub = admm::build_subproblem(st, ch, pb.cfg, pb.plan);
    admm::AdmmResult res = admm::admm_solve(sub, st.v_digital, opts.admm);
    if (!res.warning.empty() && warnings) warnings->push_back("iteration " + std::to_string(iter) + ": " + res.warning);
    admm_iters = res.iterations;
    st.v_digital = std::move(res.v);
  } catch (const NumericalError& e) {
    throw NumericalError(tag("digital precoder", e));
  }
  blocks[2] = wmmse::wmmse_objective(st, ch);
  if (opts.baseline != Baseline::RandomPs) {
    update_tx_phases(st, pb, opts);
    blocks[3] = wmmse::wmmse_objective(st, ch);
    update_rx_phases(st, pb, opts);
    blocks[4] = wmmse::wmmse_objective(st, ch);
  } else {
    blocks[3] = blocks[4] = blocks[2];
  }
  TraceRow row = measure(st, pb);
  row.iter = iter;
  row.admm_iterations = admm_iters;
  row.block_objectives = blocks;
  return row;
}

RunResult run(const Problem& pb, std::uint64_t seed, const BcdOptions& opts) {
  if (!(opts.outer_tol > 0) || opts.max_outer_iters < 0) throw ParameterError("bcd: invalid outer tolerance or iteration count");
  RunResult out;
  out.state = initialize(pb, seed);
  TraceRow row0 = measure(out.state, pb);
  row0.block_objectives.fill(row0.objective);
  out.trace.rows.push_back(row0);
  double prev = row0.objective;
  for (int it = 1; it <= opts.max_outer_iters; ++it) {
    TraceRow row = bcd_iterate(out.state, pb, opts, it, &out.trace.warnings);
    out.trace.rows.push_back(row);
    const double change = std::abs(prev - row.objective);
    prev = row.objective;
    // Relative change, with unit floor so an objective near zero does not stall the test.
    if (change <= opts.outer_tol * std::max({std::abs(prev), 1.0})) {
      out.trace.converged = true;
      break;
    }
  }
  return out;
}

RunResult run(const SystemConfig& cfg, std::uint64_t seed, const BcdOptions& opts) {
  return run(make_problem(cfg, seed), seed, opts);
}

double evaluate_under_ps_noise(const HybridState& st, const model::ChannelSet& ch, double sigma_e, int num_draws,
                               std::uint64_t seed) {
  if (num_draws < 1) throw ParameterError("evaluate_under_ps_noise: need at least one draw");
  if (sigma_e == 0) return wmmse::sum_rate(st, ch);
  auto rng = model::make_rng(seed, 3);
  std::normal_distribution<double> err(0.0, sigma_e);
  double acc = 0;
  for (int d = 0; d < num_draws; ++d) {
    HybridState noisy = st;
    for (auto& v : noisy.v_ps) v *= std::polar(1.0, err(rng));
    for (size_t k = 0; k < noisy.u_rf.size(); ++k) {
      auto& urf = noisy.u_rf[k];
      for (Eigen::Index m = 0; m < urf.cols(); ++m)
        for (Eigen::Index a = 0; a < urf.rows(); ++a)
          if (noisy.u_mask[k](a, m) != 0) urf(a, m) *= std::polar(1.0, err(rng));
    }
    acc += wmmse::sum_rate(noisy, ch);
  }
  return acc / num_draws;
}

std::string Trace::to_csv() const {
  std::ostringstream os;
  os << "iter,objective,sum_rate,avg_rate_per_subcarrier,admm_iterations,power_slack,spectral_slack,clip_slack,"
        "inband_power_dbm,oob_power_dbm,obj_after_combiner,obj_after_weight,obj_after_digital,obj_after_tx_phase,"
        "obj_after_rx_phase\n";
  for (const auto& r : rows) {
    os << r.iter << ',' << fmt(r.objective) << ',' << fmt(r.sum_rate) << ',' << fmt(r.avg_rate_per_subcarrier) << ','
       << r.admm_iterations << ',' << fmt(r.power_slack) << ',' << fmt(r.spectral_slack) << ',' << fmt(r.clip_slack)
       << ',' << fmt(r.inband_power_dbm) << ',' << fmt(r.oob_power_dbm);
    for (double b : r.block_objectives) os << ',' << fmt(b);
    os << '\n';
  }
  return os.str();
}

std::string Trace::to_json() const {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["converged"] = converged;
  j["warnings"] = warnings;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    json row;
    row["iter"] = r.iter;
    row["objective"] = num(r.objective);
    row["sum_rate"] = num(r.sum_rate);
    row["avg_rate_per_subcarrier"] = num(r.avg_rate_per_subcarrier);
    row["admm_iterations"] = r.admm_iterations;
    row["power_slack"] = num(r.power_slack);
    row["spectral_slack"] = num(r.spectral_slack);
    row["clip_slack"] = num(r.clip_slack);
    row["inband_power_dbm"] = num(r.inband_power_dbm);
    row["oob_power_dbm"] = num(r.oob_power_dbm);
    json blocks = json::array();
    for (double b : r.block_objectives) blocks.push_back(num(b));
    row["block_objectives"] = blocks;
    j["rows"].push_back(row);
  }
  return j.dump(2);
}

}  // namespace hyprec::bcd
