#include <doctest.h>

#include <cmath>

#include "hyprec/model.hpp"
#include "hyprec/state.hpp"
#include "oracles/oracles.hpp"

using namespace hyprec;

TEST_CASE("ula_steering closed form") {
  const double lambda = 0.01;
  const auto zero = model::ula_steering(5, 0.0, lambda / 2, lambda);
  for (auto x : zero) CHECK(std::abs(x - cd(1, 0)) < 1e-15);

  const auto two = model::ula_steering(2, kPi / 2, lambda / 2, lambda);
  CHECK(std::abs(two[0] - cd(1, 0)) < 1e-12);
  CHECK(std::abs(two[1] - cd(-1, 0)) < 1e-12);

  const auto any = model::ula_steering(9, 0.37, 0.013, lambda);
  for (auto x : any) CHECK(std::abs(std::abs(x) - 1) < 1e-14);

  CHECK_THROWS_AS(model::ula_steering(3, 0.1, 0.005, 0.0), ParameterError);
  CHECK_THROWS_AS(model::ula_steering(3, 0.1, 0.005, -1.0), ParameterError);
}

TEST_CASE("path loss") {
  const double expected = 22 * std::log10(373.0) + 28 + 20 * std::log10(28.0);
  CHECK(model::path_loss_db(373, 28, 0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(model::path_loss_db(373, 28, 0) == doctest::Approx(113.52).epsilon(1e-4));
  CHECK(model::path_loss_db(746, 28, 0) - model::path_loss_db(373, 28, 0) ==
        doctest::Approx(22 * std::log10(2.0)).epsilon(1e-12));
  CHECK(model::path_loss_db(373, 28, 3.5) - model::path_loss_db(373, 28, 0) == doctest::Approx(3.5));
}

TEST_CASE("noise variance") {
  SystemConfig cfg;
  cfg.num_subcarriers = 32;
  cfg.validate();
  const double expected = -174 + 10 * std::log10(20e6 / 32) + 8;
  CHECK(model::noise_variance_dbm(cfg) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(model::noise_variance_dbm(cfg) == doctest::Approx(-108.04).epsilon(1e-4));
  const double v32 = model::noise_variance(cfg);
  cfg.num_subcarriers = 64;
  cfg.validate();
  CHECK(model::noise_variance(cfg) == doctest::Approx(v32 / 2).epsilon(1e-12));
}

TEST_CASE("config validation") {
  SystemConfig cfg;
  cfg.num_tx_rf_chains = 3;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = SystemConfig{};
  cfg.num_subcarriers = 7;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = SystemConfig{};
  cfg.clip_prob = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = SystemConfig{};
  cfg.num_streams = {3};
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = SystemConfig{};
  cfg.num_rx_antennas = {4, 4, 4};
  CHECK_THROWS_AS(cfg.validate(), ParameterError);

  cfg = SystemConfig{};
  cfg.validate();
  CHECK(cfg.num_rx_antennas.size() == 2);
  const SystemConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.num_tx_antennas == cfg.num_tx_antennas);
  CHECK(back.power_budget_w == cfg.power_budget_w);
  CHECK(std::isinf(back.spectral_rhs));
  CHECK(back.notch_bands == cfg.notch_bands);
}

TEST_CASE("partially connected precoder structure") {
  SystemConfig cfg;
  cfg.validate();
  std::mt19937_64 rng(3);
  HybridState st = oracle::random_state(cfg, rng);
  const Eigen::MatrixXcd vrf = st.v_rf();
  for (int a = 0; a < cfg.num_tx_antennas; ++a) {
    int nz = 0;
    for (int m = 0; m < cfg.num_tx_rf_chains; ++m) nz += std::abs(vrf(a, m)) > 0;
    CHECK(nz == 1);
    CHECK(std::abs(std::abs(vrf(a, cfg.tx_chain_of(a))) - 1) < 1e-15);
  }
  const Eigen::MatrixXcd gram = vrf.adjoint() * vrf;
  CHECK((gram - cfg.subarray_size() * Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-10);
  const Eigen::MatrixXcd h = oracle::random_matrix(4, cfg.num_tx_antennas, rng);
  CHECK((st.apply_v_rf(h) - h * vrf).norm() < 1e-12);
}

TEST_CASE("gen_channel determinism and shape") {
  SystemConfig cfg;
  cfg.validate();
  const auto a = model::gen_channel(cfg, 42);
  const auto b = model::gen_channel(cfg, 42);
  const auto c = model::gen_channel(cfg, 43);
  REQUIRE(a.h.size() == 2);
  bool differs = false;
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < cfg.num_subcarriers; ++s) {
      const auto& m = a.h[k][s];
      CHECK(m.rows() == 4);
      CHECK(m.cols() == 16);
      CHECK(m.allFinite());
      CHECK(m == b.h[k][s]);
      differs = differs || (m != c.h[k][s]);
    }
  CHECK(differs);
  CHECK(a.noise_var == model::noise_variance(cfg));
}

TEST_CASE("single tap channel is flat") {
  SystemConfig cfg;
  cfg.num_taps = 1;
  cfg.validate();
  const auto ch = model::gen_channel(cfg, 7);
  for (int k = 0; k < 2; ++k)
    for (int s = 1; s < cfg.num_subcarriers; ++s) CHECK((ch.h[k][s] - ch.h[k][0]).norm() == 0.0);
}

TEST_CASE("LOS limit has rank one") {
  auto check_rank_one = [](SystemConfig cfg, double ratio) {
    cfg.validate();
    const auto ch = model::gen_channel(cfg, 11);
    for (int k = 0; k < 2; ++k)
      for (int s = 0; s < cfg.num_subcarriers; ++s) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ch.h[k][s]);
        const auto sv = svd.singularValues();
        CHECK(sv[1] < ratio * sv[0]);
      }
  };
  // The scattered-to-LOS amplitude ratio falls as 1/sqrt(kappa).
  SystemConfig cfg;
  cfg.nlos_gain_amplitude = false;
  cfg.rician_kappa = 1e10;
  check_rank_one(cfg, 1e-4);
  // The amplitude convention makes scattered taps far stronger than the LOS
  // power gain, so the same ratio needs a much larger kappa.
  cfg.nlos_gain_amplitude = true;
  cfg.rician_kappa = 1e18;
  check_rank_one(cfg, 1e-4);
  cfg.rician_kappa = kInf;
  check_rank_one(cfg, 1e-10);
}

TEST_CASE("channel power matches the analytic mixture") {
  // Fixed geometry, fresh tap coefficients: E||H||^2/(Nt Nr) = (kappa g + sum g_l)/(kappa + 1).
  SystemConfig cfg;
  cfg.num_users = 1;
  cfg.validate();
  const auto base = model::gen_channel(cfg, 5);
  auto geo = base.geometry;
  const double kappa = cfg.rician_kappa;
  double analytic = kappa * geo[0].los_gain;
  for (double g : geo[0].nlos_gain) analytic += g;
  analytic /= kappa + 1;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0, std::sqrt(0.5));
  std::vector<double> samples;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    for (auto& t : geo[0].taps) t = cd(n(rng), n(rng));
    const auto h = model::assemble_channel(cfg, geo);
    samples.push_back(h[0][i % cfg.num_subcarriers].squaredNorm() / (16.0 * 4.0));
  }
  const auto ms = oracle::mean_se(samples);
  CHECK(std::abs(ms.mean - analytic) <= 3 * ms.se);

  // Same check over seeds with the geometry recomputed from each realization.
  std::vector<double> ratio;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto ch = model::gen_channel(cfg, seed);
    const auto& g = ch.geometry[0];
    double a = kappa * g.los_gain;
    for (double x : g.nlos_gain) a += x;
    a /= kappa + 1;
    ratio.push_back(ch.h[0][seed % cfg.num_subcarriers].squaredNorm() / (64.0 * a));
  }
  const auto mr = oracle::mean_se(ratio);
  CHECK(std::abs(mr.mean - 1) <= 3 * mr.se);
}

TEST_CASE("geometry within the user disc") {
  SystemConfig cfg;
  cfg.validate();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto ch = model::gen_channel(cfg, seed);
    for (const auto& g : ch.geometry) {
      CHECK(g.distance_m >= 373 - 4 - 1e-9);
      CHECK(g.distance_m <= 373 + 4 + 1e-9);
      CHECK(g.aod == g.aoa);
      CHECK(g.nlos_gain.size() == 3);
    }
  }
}
