#include "hyprec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hyprec/wmmse.hpp"

#ifndef HYPREC_VERSION
#define HYPREC_VERSION "unknown"
#endif

namespace hyprec::cli {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kKinds = {
    {ExperimentKind::Convergence, "convergence"},         {ExperimentKind::RateVsPower, "rate_vs_power"},
    {ExperimentKind::PsdStudy, "psd_study"},              {ExperimentKind::EmissionTradeoff, "emission_tradeoff"},
    {ExperimentKind::Robustness, "robustness"},           {ExperimentKind::RcgVsCd, "rcg_vs_cd"},
};

const std::vector<std::string> kAxes = {"power_dbm", "num_tx_rf_chains", "spectral_rhs", "sigma_e_deg",
                                        "num_subcarriers"};

bcd::Baseline baseline_from_string(const std::string& s) {
  if (s == "none" || s == "proposed") return bcd::Baseline::None;
  if (s == "mmse_identity_weights") return bcd::Baseline::MmseIdentityWeights;
  if (s == "random_ps") return bcd::Baseline::RandomPs;
  throw ParameterError("unknown baseline: " + s);
}

std::string point_label(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%03zu", index);
  return buf;
}

std::string run_stem(const RunRecord& r) { return point_label(r.sweep_index) + "_seed" + std::to_string(r.seed); }

void add_trace_metrics(RunRecord& rec, const bcd::RunResult& res, const std::string& prefix = "") {
  const auto& last = res.trace.rows.back();
  rec.metrics.emplace_back(prefix + "sum_rate", last.sum_rate);
  rec.metrics.emplace_back(prefix + "avg_rate_per_subcarrier", last.avg_rate_per_subcarrier);
  rec.metrics.emplace_back(prefix + "objective", last.objective);
  rec.metrics.emplace_back(prefix + "outer_iterations", static_cast<double>(res.trace.rows.size() - 1));
  rec.metrics.emplace_back(prefix + "converged", res.trace.converged ? 1.0 : 0.0);
  rec.metrics.emplace_back(prefix + "inband_power_dbm", last.inband_power_dbm);
  rec.metrics.emplace_back(prefix + "oob_power_dbm", last.oob_power_dbm);
  for (const auto& w : res.trace.warnings) rec.warnings.push_back(prefix + w);
}

std::string psd_csv(const HybridState& st, const bcd::Problem& pb) {
  const auto freqs = ofdm::default_psd_grid(pb.cfg);
  const Eigen::VectorXd psd = ofdm::psd_analytic(st, freqs, pb.plan);
  std::ostringstream os;
  os << "frequency_hz,psd_dbm_hz\n";
  for (size_t i = 0; i < freqs.size(); ++i)
    os << format_number(freqs[i]) << ',' << format_number(ofdm::energy_to_dbm(psd[static_cast<Eigen::Index>(i)], pb.plan))
       << '\n';
  return os.str();
}

std::string f_trace_csv(const std::vector<double>& cd, const std::vector<double>& rcg) {
  std::ostringstream os;
  os << "step,cd_objective,rcg_objective\n";
  const size_t n = std::max(cd.size(), rcg.size());
  for (size_t i = 0; i < n; ++i)
    os << i << ',' << (i < cd.size() ? format_number(cd[i]) : "") << ',' << (i < rcg.size() ? format_number(rcg[i]) : "")
       << '\n';
  return os.str();
}

RunRecord run_one(const ExperimentSpec& spec, size_t index, std::uint64_t seed) {
  RunRecord rec;
  rec.sweep_index = index;
  rec.seed = seed;
  auto [cfg, opts] = apply_sweep(spec, index);
  const bcd::Problem pb = bcd::make_problem(cfg, seed);
  const std::string stem = run_stem(rec);
  switch (spec.kind) {
    case ExperimentKind::Convergence:
    case ExperimentKind::EmissionTradeoff: {
      const auto res = bcd::run(pb, seed, opts);
      add_trace_metrics(rec, res);
      rec.files.emplace_back("runs/" + stem + ".csv", res.trace.to_csv());
      break;
    }
    case ExperimentKind::PsdStudy: {
      const auto res = bcd::run(pb, seed, opts);
      add_trace_metrics(rec, res);
      rec.files.emplace_back("runs/" + stem + ".csv", res.trace.to_csv());
      rec.files.emplace_back("psd/" + stem + ".csv", psd_csv(res.state, pb));
      break;
    }
    case ExperimentKind::RateVsPower: {
      for (const auto& method : spec.methods) {
        bcd::BcdOptions o = opts;
        o.baseline = baseline_from_string(method);
        const auto res = bcd::run(pb, seed, o);
        add_trace_metrics(rec, res, method + "_");
        rec.files.emplace_back("runs/" + stem + "_" + method + ".csv", res.trace.to_csv());
      }
      break;
    }
    case ExperimentKind::Robustness: {
      const double sigma = (spec.sweep_axis == "sigma_e_deg" ? spec.sweep_values[index] : spec.robust_sigma_deg) * kPi / 180;
      bcd::BcdOptions plain = opts;
      plain.robust = false;
      bcd::BcdOptions robust = opts;
      robust.robust = true;
      robust.sigma_e = sigma;
      const auto a = bcd::run(pb, seed, plain);
      const auto b = bcd::run(pb, seed, robust);
      const double ra = bcd::evaluate_under_ps_noise(a.state, pb.channels, sigma, spec.eval_draws, seed);
      const double rb = bcd::evaluate_under_ps_noise(b.state, pb.channels, sigma, spec.eval_draws, seed);
      const double S = cfg.num_subcarriers;
      rec.metrics = {{"nonrobust_avg_rate", ra / S}, {"robust_avg_rate", rb / S}, {"robust_gain", (rb - ra) / S},
                     {"nonrobust_nominal_avg_rate", a.trace.rows.back().avg_rate_per_subcarrier},
                     {"robust_nominal_avg_rate", b.trace.rows.back().avg_rate_per_subcarrier}};
      rec.files.emplace_back("runs/" + stem + "_nonrobust.csv", a.trace.to_csv());
      rec.files.emplace_back("runs/" + stem + "_robust.csv", b.trace.to_csv());
      for (const auto& w : a.trace.warnings) rec.warnings.push_back(w);
      for (const auto& w : b.trace.warnings) rec.warnings.push_back(w);
      break;
    }
    case ExperimentKind::RcgVsCd: {
      const auto res = bcd::run(pb, seed, opts);
      auto rng = model::make_rng(seed, 4);
      std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
      Eigen::VectorXcd start(res.state.num_tx_antennas());
      for (auto& v : start) v = std::polar(1.0, phase(rng));
      const auto ws = analog::build_tx_workspace(res.state, pb.channels);
      Eigen::VectorXcd v_cd = start;
      const auto cd_res = analog::optimize_tx_cd(ws, v_cd, opts.cd);
      const auto rcg_res = manifold::rcg_optimize(manifold::tx_bundle(ws), start, opts.rcg);
      // Analog-subproblem objective v^H Q v - 2 Re(u^H v), without the WMMSE constant.
      const double f_cd = cd_res.f_trace.back();
      const double f_rcg = rcg_res.f_trace.back();
      rec.metrics = {{"cd_objective", f_cd},
                     {"rcg_objective", f_rcg},
                     {"relative_gap", std::abs(f_rcg - f_cd) / std::max(std::abs(f_cd), 1e-300)},
                     {"cd_sweeps", static_cast<double>(cd_res.sweeps)},
                     {"rcg_iterations", static_cast<double>(rcg_res.iterations)}};
      rec.files.emplace_back("runs/" + stem + ".csv", f_trace_csv(cd_res.f_trace, rcg_res.f_trace));
      break;
    }
  }
  return rec;
}

json bcd_json(const bcd::BcdOptions& o) {
  json j;
  j["max_outer_iters"] = o.max_outer_iters;
  j["outer_tol"] = o.outer_tol;
  j["analog_method"] = o.analog_method == bcd::AnalogMethod::Rcg ? "rcg" : "coordinate_descent";
  j["robust"] = o.robust;
  j["sigma_e_deg"] = o.sigma_e * 180 / kPi;
  j["baseline"] = o.baseline == bcd::Baseline::None                  ? "none"
                  : o.baseline == bcd::Baseline::MmseIdentityWeights ? "mmse_identity_weights"
                                                                     : "random_ps";
  j["admm_tol"] = o.admm.tol;
  j["admm_max_iter"] = o.admm.max_iter;
  return j;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

ExperimentKind kind_from_string(const std::string& s) {
  for (const auto& [k, name] : kKinds)
    if (name == s) return k;
  throw ParameterError("unknown experiment kind: " + s);
}

std::string to_string(ExperimentKind k) {
  for (const auto& [kk, name] : kKinds)
    if (kk == k) return name;
  return "unknown";
}

ExperimentSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("experiment spec: ") + e.what());
  }
  ExperimentSpec spec;
  try {
    spec.kind = kind_from_string(j.value("kind", std::string("convergence")));
    spec.config = config_from_json(j.contains("config") ? j.at("config").dump() : std::string("{}"));
    if (j.contains("sweep")) {
      const auto& sw = j.at("sweep");
      spec.sweep_axis = sw.value("axis", std::string());
      for (const auto& v : sw.value("values", json::array())) spec.sweep_values.push_back(v.is_null() ? kInf : v.get<double>());
    }
    if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    spec.output_dir = j.value("output_dir", spec.output_dir);
    spec.eval_draws = j.value("eval_draws", spec.eval_draws);
    if (j.contains("methods")) spec.methods = j.at("methods").get<std::vector<std::string>>();
    spec.robust_sigma_deg = j.value("robust_sigma_deg", spec.robust_sigma_deg);
    if (j.contains("bcd")) {
      const auto& b = j.at("bcd");
      spec.bcd.max_outer_iters = b.value("max_outer_iters", spec.bcd.max_outer_iters);
      spec.bcd.outer_tol = b.value("outer_tol", spec.bcd.outer_tol);
      const std::string method = b.value("analog_method", std::string("coordinate_descent"));
      if (method == "rcg")
        spec.bcd.analog_method = bcd::AnalogMethod::Rcg;
      else if (method == "coordinate_descent")
        spec.bcd.analog_method = bcd::AnalogMethod::CoordinateDescent;
      else
        throw ParameterError("unknown analog_method: " + method);
      spec.bcd.robust = b.value("robust", spec.bcd.robust);
      spec.bcd.sigma_e = b.value("sigma_e_deg", 0.0) * kPi / 180;
      spec.bcd.baseline = baseline_from_string(b.value("baseline", std::string("none")));
      spec.bcd.admm.tol = b.value("admm_tol", spec.bcd.admm.tol);
      spec.bcd.admm.max_iter = b.value("admm_max_iter", spec.bcd.admm.max_iter);
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("experiment spec: ") + e.what());
  }
  spec.bcd.admm.rho0 = spec.config.rho0;
  spec.bcd.admm.rho_growth = spec.config.rho_growth;
  if (spec.seeds.empty()) throw ParameterError("experiment spec: seeds must not be empty");
  if (!spec.sweep_axis.empty()) {
    if (std::find(kAxes.begin(), kAxes.end(), spec.sweep_axis) == kAxes.end())
      throw ParameterError("experiment spec: unknown sweep axis " + spec.sweep_axis);
    if (!std::is_sorted(spec.sweep_values.begin(), spec.sweep_values.end()))
      throw ParameterError("experiment spec: sweep values must be sorted");
  } else if (!spec.sweep_values.empty()) {
    throw ParameterError("experiment spec: sweep values given without an axis");
  }
  if (spec.eval_draws < 1) throw ParameterError("experiment spec: eval_draws must be positive");
  return spec;
}

void apply_paper_scale(ExperimentSpec& spec) {
  spec.config.num_tx_antennas = 64;
  spec.config.num_subcarriers = 32;
  spec.config.validate();
}

std::pair<SystemConfig, bcd::BcdOptions> apply_sweep(const ExperimentSpec& spec, size_t index) {
  SystemConfig cfg = spec.config;
  bcd::BcdOptions opts = spec.bcd;
  if (!spec.sweep_axis.empty()) {
    const double v = spec.sweep_values.at(index);
    if (spec.sweep_axis == "power_dbm")
      cfg.power_budget_w = dbm_to_watts(v);
    else if (spec.sweep_axis == "num_tx_rf_chains")
      cfg.num_tx_rf_chains = static_cast<int>(v);
    else if (spec.sweep_axis == "spectral_rhs")
      cfg.spectral_rhs = v;
    else if (spec.sweep_axis == "sigma_e_deg")
      opts.sigma_e = v * kPi / 180;
    else if (spec.sweep_axis == "num_subcarriers")
      cfg.num_subcarriers = static_cast<int>(v);
  }
  cfg.validate();
  return {cfg, opts};
}

ExperimentOutput run_experiment(const ExperimentSpec& spec, int threads) {
  const size_t points = spec.sweep_axis.empty() ? 1 : spec.sweep_values.size();
  const size_t total = points * spec.seeds.size();
  std::vector<RunRecord> slots(total);
  std::vector<std::string> errors(total);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < total; i = next++) {
      const size_t p = i / spec.seeds.size(), s = i % spec.seeds.size();
      try {
        slots[i] = run_one(spec, p, spec.seeds[s]);
      } catch (const std::exception& e) {
        errors[i] = point_label(p) + " seed " + std::to_string(spec.seeds[s]) + ": " + e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError(e);

  ExperimentOutput out;
  out.runs = std::move(slots);
  std::ostringstream summary;
  std::vector<std::string> names;
  for (const auto& [n, v] : out.runs.front().metrics) names.push_back(n);
  summary << "sweep_index," << (spec.sweep_axis.empty() ? "sweep_value" : spec.sweep_axis) << ",num_seeds";
  for (const auto& n : names) summary << ',' << n;
  summary << '\n';
  for (size_t p = 0; p < points; ++p) {
    std::vector<double> mean(names.size(), 0.0);
    const size_t n_seeds = spec.seeds.size();
    for (size_t s = 0; s < n_seeds; ++s) {
      const auto& rec = out.runs[p * n_seeds + s];
      for (size_t i = 0; i < names.size(); ++i) mean[i] += rec.metrics.at(i).second / static_cast<double>(n_seeds);
    }
    summary << p << ',' << (spec.sweep_axis.empty() ? std::string("none") : format_number(spec.sweep_values[p])) << ','
            << n_seeds;
    for (double m : mean) summary << ',' << format_number(m);
    summary << '\n';
  }
  out.summary_csv = summary.str();

  json manifest;
  manifest["kind"] = to_string(spec.kind);
  manifest["version"] = HYPREC_VERSION;
  manifest["config"] = json::parse(config_to_json(spec.config));
  manifest["sweep"] = {{"axis", spec.sweep_axis}, {"values", json::array()}};
  for (double v : spec.sweep_values) manifest["sweep"]["values"].push_back(std::isfinite(v) ? json(v) : json(nullptr));
  manifest["seeds"] = spec.seeds;
  manifest["bcd"] = bcd_json(spec.bcd);
  manifest["eval_draws"] = spec.eval_draws;
  json files = json::array({"summary.csv"});
  json warnings = json::array();
  for (const auto& rec : out.runs) {
    for (const auto& f : rec.files) files.push_back(f.first);
    for (const auto& w : rec.warnings)
      warnings.push_back(point_label(rec.sweep_index) + " seed " + std::to_string(rec.seed) + ": " + w);
  }
  manifest["files"] = files;
  manifest["warnings"] = warnings;
  out.manifest_json = manifest.dump(2) + "\n";
  return out;
}

void write_outputs(const ExperimentSpec& spec, const ExperimentOutput& out) {
  namespace fs = std::filesystem;
  auto write = [&](const std::string& rel, const std::string& contents) {
    const fs::path path = fs::path(spec.output_dir) / rel;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << contents;
    if (!f) throw std::runtime_error("write failed for " + path.string());
  };
  for (const auto& rec : out.runs)
    for (const auto& [rel, contents] : rec.files) write(rel, contents);
  write("summary.csv", out.summary_csv);
  write("manifest.json", out.manifest_json);
}

}  // namespace hyprec::cli
