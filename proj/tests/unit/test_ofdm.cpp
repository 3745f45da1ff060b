#include <doctest.h>

#include <cmath>

#include "hyprec/ofdm.hpp"
#include "oracles/oracles.hpp"

using namespace hyprec;

namespace {

SystemConfig cfg8() {
  SystemConfig cfg;
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("synthesis matrix is left unitary") {
  for (int l : {2, 4, 8}) {
    const auto f = ofdm::synthesis_matrix(8, l);
    CHECK(f.rows() == 8 * l);
    const Eigen::MatrixXcd g = f.adjoint() * f / (8.0 * l);
    CHECK((g - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-10);
  }
  // Without oversampling the edge subcarriers -S/2 and S/2 share one column.
  const auto f1 = ofdm::synthesis_matrix(8, 1);
  CHECK((f1.col(0) - f1.col(7)).norm() < 1e-12);
  // Entry convention exp(j 2 pi s n / (lS)) with s = -S/2 at column 0.
  const auto f = ofdm::synthesis_matrix(4, 2);
  CHECK(std::abs(f(3, 0) - std::polar(1.0, 2 * kPi * (-2) * 3 / 8.0)) < 1e-12);
  CHECK(std::abs(f(5, 2) - std::polar(1.0, 2 * kPi * 1 * 5 / 8.0)) < 1e-12);
}

TEST_CASE("subcarrier ordering") {
  CHECK(subcarrier_value(0, 8) == -4);
  CHECK(subcarrier_value(3, 8) == -1);
  CHECK(subcarrier_value(4, 8) == 1);
  CHECK(subcarrier_value(7, 8) == 4);
}

TEST_CASE("pulse spectrum") {
  const auto plan = ofdm::make_base_plan(cfg8());
  for (int s : {-4, -1, 1, 3}) {
    const cd at = ofdm::pulse_spectrum(s / plan.t_sym, s, plan);
    CHECK(std::abs(at - cd(plan.t_total, 0)) < 1e-12 * plan.t_total);
    for (int k : {-3, 1, 2}) {
      const double f = s / plan.t_sym + k / plan.t_total;
      CHECK(std::abs(ofdm::pulse_spectrum(f, s, plan)) < 1e-12 * plan.t_total);
    }
  }
  for (double f : {-23.3e6, -3.1e6, 0.7e6, 12.9e6, 27.5e6}) {
    for (int s : {-4, 2}) {
      const cd ref = oracle::pulse_spectrum_quadrature(f, s, plan.t_sym, plan.t_guard);
      const cd got = ofdm::pulse_spectrum(f, s, plan);
      CHECK(std::abs(got - ref) <= 1e-6 * std::max(std::abs(ref), 1e-3 * plan.t_total));
    }
  }
}

TEST_CASE("notch diagonal") {
  const auto plan = ofdm::make_base_plan(cfg8());
  CHECK(ofdm::notch_diag({}, plan).isZero());
  const auto one = ofdm::notch_diag({13.1e6}, plan);
  for (int si = 0; si < 8; ++si)
    CHECK(one[si] == doctest::Approx(std::norm(ofdm::pulse_spectrum(13.1e6, subcarrier_value(si, 8), plan))).epsilon(1e-12));

  const std::vector<double> freqs{-25e6, -17.2e6, -11e6, 10.5e6, 14e6, 28.9e6};
  Eigen::MatrixXcd a(freqs.size(), 8);
  for (size_t j = 0; j < freqs.size(); ++j)
    for (int si = 0; si < 8; ++si) a(j, si) = ofdm::pulse_spectrum(freqs[j], subcarrier_value(si, 8), plan);
  const Eigen::VectorXd dense = (a.adjoint() * a).diagonal().real();
  const auto l = ofdm::notch_diag(freqs, plan);
  CHECK((l - dense).norm() <= 1e-10 * dense.norm());

  // Streamed bands equal an explicit list of the same grid points.
  std::vector<double> grid;
  for (int j = 0; j <= 40; ++j) grid.push_back(10e6 + j * 0.25e6);
  const auto streamed = ofdm::notch_diag_bands({{10e6, 20e6}}, 0.25e6, plan);
  CHECK((streamed - ofdm::notch_diag(grid, plan)).norm() <= 1e-12 * streamed.norm());
  CHECK((streamed.array() >= 0).all());
}

TEST_CASE("time signal") {
  const auto cfg = cfg8();
  const auto plan = ofdm::make_base_plan(cfg);
  std::mt19937_64 rng(1);
  HybridState st = make_state(cfg);
  auto sym = ofdm::draw_symbols(st, rng);
  CHECK(ofdm::time_signal(st, sym, 0, plan).isZero());

  // Single active subcarrier: constant envelope.
  st.v_digital[0][2] = Eigen::MatrixXcd::Ones(cfg.num_tx_rf_chains, 2);
  const auto x1 = ofdm::time_signal(st, sym, 5, plan);
  const double mod = std::abs(x1[0]);
  for (auto v : x1) CHECK(std::abs(std::abs(v) - mod) < 1e-12 * mod);

  // Second moment identity.
  st = oracle::random_state(cfg, rng);
  const int a = 6, m = cfg.tx_chain_of(a);
  const double expected = cfg.oversampling * cfg.num_subcarriers * ofdm::chain_energy(st.v_digital, m);
  std::vector<double> e;
  for (int i = 0; i < 10000; ++i) e.push_back(ofdm::time_signal(st, ofdm::draw_symbols(st, rng), a, plan).squaredNorm());
  const auto ms = oracle::mean_se(e);
  CHECK(std::abs(ms.mean - expected) <= 3 * ms.se);

  // Wrong symbol length is a dimension error.
  sym = ofdm::draw_symbols(st, rng);
  sym[1][0] = Eigen::VectorXcd::Zero(3);
  CHECK_THROWS_AS(ofdm::time_signal(st, sym, 0, plan), DimensionError);
}

TEST_CASE("papr conventions") {
  Eigen::VectorXcd c(128);
  for (int n = 0; n < 128; ++n) c[n] = std::polar(2.0, 0.1 * n);
  auto p = ofdm::papr(c);
  CHECK(p.paper == doctest::Approx(1.0 / 128));
  CHECK(p.conventional == doctest::Approx(1.0));
  std::mt19937_64 rng(2);
  const Eigen::VectorXcd g = oracle::random_matrix(128, 1, rng);
  p = ofdm::papr(g);
  const auto q = ofdm::papr(3.7 * g);
  CHECK(q.paper == doctest::Approx(p.paper).epsilon(1e-12));
  const double direct = g.cwiseAbs2().maxCoeff() / (g.squaredNorm() / 128);
  CHECK(p.conventional == doctest::Approx(direct).epsilon(1e-14));
  CHECK(ofdm::papr(g, 2 * g.squaredNorm()).paper == doctest::Approx(p.paper / 2));
  CHECK_THROWS_AS(ofdm::papr(Eigen::VectorXcd::Zero(4)), NumericalError);
}

TEST_CASE("clip") {
  std::mt19937_64 rng(3);
  const Eigen::VectorXcd x = oracle::random_matrix(256, 1, rng, 2.0);
  CHECK(ofdm::clip(x, 100.0) == x);
  const auto y = ofdm::clip(x, 1.0);
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    CHECK(std::abs(y[n]) <= 1.0 + 1e-15);
    CHECK(oracle::phase_distance(std::arg(y[n]), std::arg(x[n])) < 1e-12);
    if (std::abs(x[n]) <= 1.0) CHECK(y[n] == x[n]);
  }
  CHECK_THROWS_AS(ofdm::clip(x, 0.0), ParameterError);
}

TEST_CASE("psd") {
  const auto cfg = cfg8();
  const auto plan = ofdm::make_base_plan(cfg);
  HybridState st = make_state(cfg);
  const auto grid = ofdm::default_psd_grid(cfg, 256);
  CHECK(grid.front() == doctest::Approx(-30e6));
  CHECK(grid.back() == doctest::Approx(30e6));
  CHECK(ofdm::psd_analytic(st, grid, plan).isZero());

  std::mt19937_64 rng(4);
  st = oracle::random_state(cfg, rng);
  const auto psd = ofdm::psd_analytic(st, grid, plan);

  // Monte Carlo of sum_a |sum_s o^s(f) w^a[s]|^2.
  Eigen::MatrixXcd o(grid.size(), 8);
  for (size_t i = 0; i < grid.size(); ++i)
    for (int si = 0; si < 8; ++si) o(i, si) = ofdm::pulse_spectrum(grid[i], subcarrier_value(si, 8), plan);
  const int draws = 4000;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(grid.size());
  for (int d = 0; d < draws; ++d) {
    const auto sym = ofdm::draw_symbols(st, rng);
    for (int a = 0; a < cfg.num_tx_antennas; ++a) acc += (o * ofdm::antenna_weights(st, sym, a)).cwiseAbs2();
  }
  acc /= draws;
  double worst = 0;
  for (size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(acc[i] - psd[i]) / psd[i]);
  CHECK(worst < 0.05);

  // Phase rotations of the analog precoder leave the PSD unchanged.
  HybridState rot = st;
  rot.v_ps = oracle::random_phases(cfg.num_tx_antennas, rng);
  CHECK((ofdm::psd_analytic(rot, grid, plan) - psd).norm() <= 1e-12 * psd.norm());
  const auto sym = ofdm::draw_symbols(st, rng);
  for (int a = 0; a < cfg.num_tx_antennas; ++a)
    CHECK((ofdm::time_signal(rot, sym, a, plan).cwiseAbs() - ofdm::time_signal(st, sym, a, plan).cwiseAbs()).norm() <
          1e-10);
}

TEST_CASE("emission energies") {
  auto cfg = cfg8();
  auto plan = ofdm::make_plan(cfg);
  CHECK((plan.l_diag.array() > 0).all());
  std::mt19937_64 rng(5);
  HybridState st = oracle::random_state(cfg, rng);
  double direct = 0;
  for (int si = 0; si < 8; ++si) {
    double p = 0;
    for (int k = 0; k < 2; ++k) p += st.v_digital[k][si].squaredNorm();
    direct += plan.l_diag[si] * p * cfg.subarray_size();
  }
  CHECK(ofdm::oob_energy(st, plan) == doctest::Approx(direct * cfg.notch_step_hz).epsilon(1e-12));
  CHECK(ofdm::inband_energy(st, plan, cfg.bandwidth_hz) > 0);
  CHECK(ofdm::energy_to_dbm(0.0, plan) == -300.0);
  CHECK(ofdm::energy_to_dbm(plan.t_total * 1e-3, plan) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bound arithmetic") {
  CHECK(ofdm::papr_prob_bound(4, 32, 0.1) == doctest::Approx(std::exp(-6.4)).epsilon(1e-14));
  CHECK(ofdm::papr_prob_bound(4, 32, 0.1) == doctest::Approx(1.66e-3).epsilon(2e-3));
  for (int l : {1, 2, 4}) {
    const double b1 = ofdm::papr_prob_bound(l, 8, 0.3), b2 = ofdm::papr_prob_bound(2 * l, 8, 0.3);
    CHECK(b2 == doctest::Approx(b1 * b1).epsilon(1e-12));
    CHECK(b2 < b1);
  }
  CHECK(ofdm::papr_prob_bound(1 << 20, 8, 0.3) == 0.0);

  const auto cfg = cfg8();
  std::mt19937_64 rng(6);
  HybridState st = oracle::random_state(cfg, rng);
  HybridState zero = make_state(cfg);
  CHECK(ofdm::clipping_bound_lhs(zero.v_digital, 0.3, 0) == 0.0);
  const double c1 = ofdm::clipping_bound_lhs(st.v_digital, 0.3, 1);
  CHECK(c1 == doctest::Approx(std::sqrt(-2 * std::log(0.3) * ofdm::chain_energy(st.v_digital, 1))));
  auto scaled = st.v_digital;
  for (auto& vk : scaled)
    for (auto& m : vk) m *= 2.5;
  CHECK(ofdm::clipping_bound_lhs(scaled, 0.3, 1) == doctest::Approx(2.5 * c1));
  CHECK_THROWS_AS(ofdm::clipping_bound_lhs(st.v_digital, 1.0, 0), ParameterError);

  const Eigen::VectorXd l = Eigen::VectorXd::LinSpaced(8, 0.1, 0.8);
  CHECK(ofdm::spectral_bound_lhs(st.v_digital, Eigen::VectorXd::Zero(8), 2) == 0.0);
  const double s1 = ofdm::spectral_bound_lhs(st.v_digital, l, 2);
  CHECK(ofdm::spectral_bound_lhs(scaled, l, 2) == doctest::Approx(2.5 * s1));
}

TEST_CASE("clipping exceedance follows the complex Gaussian tail") {
  // Each time sample is circular Gaussian with variance equal to the chain energy, so
  // with the clipping constraint tight at eps the per-sample exceedance rate is eps^2.
  const auto cfg = cfg8();
  const auto plan = ofdm::make_base_plan(cfg);
  std::mt19937_64 rng(7);
  HybridState st = oracle::random_state(cfg, rng);
  const double eps = 0.3;
  const int a = 3, m = cfg.tx_chain_of(a);
  const double chi = ofdm::clipping_bound_lhs(st.v_digital, eps, m);
  long long hits = 0, total = 0;
  for (int d = 0; d < 20000; ++d) {
    const auto x = ofdm::time_signal(st, ofdm::draw_symbols(st, rng), a, plan);
    for (auto v : x) hits += std::abs(v) > chi;
    total += x.size();
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(total);
  CHECK(rate == doctest::Approx(eps * eps).epsilon(0.05));
}
