#include <doctest.h>

#include <cmath>

#include "hyprec/wmmse.hpp"
#include "oracles/oracles.hpp"

using namespace hyprec;

namespace {

struct Instance {
  SystemConfig cfg;
  model::ChannelSet ch;
  HybridState st;
};

Instance make_instance(std::uint64_t seed, int users = 2, int nt = 8, int subcarriers = 4) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.cfg = oracle::small_config(nt, 2, users, subcarriers);
  in.ch = oracle::random_channels(in.cfg, rng);
  in.st = oracle::random_state(in.cfg, rng);
  return in;
}

double weighted_trace(const HybridState& st, const model::ChannelSet& ch, int k, int s) {
  return std::real((st.weights[k][s] * wmmse::mse_matrix(st, ch, k, s)).trace());
}

}  // namespace

TEST_CASE("hpd helpers") {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_hpd(5, rng);
  const auto b = oracle::random_matrix(5, 2, rng);
  CHECK((m * wmmse::hpd_solve(m, b) - b).norm() < 1e-12);
  CHECK(wmmse::log_det_hpd(m) == doctest::Approx(std::log(std::real(m.determinant()))).epsilon(1e-12));
  CHECK_THROWS_AS(wmmse::hpd_solve(-m, b), NumericalError);
}

TEST_CASE("mse matrix with zero precoders") {
  auto in = make_instance(2);
  for (auto& vk : in.st.v_digital)
    for (auto& v : vk) v.setZero();
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 4; ++s) {
      const auto& u = in.st.u_digital[k][s];
      const auto& urf = in.st.u_rf[k];
      const Eigen::MatrixXcd expected =
          Eigen::MatrixXcd::Identity(2, 2) + in.ch.noise_var * u.adjoint() * urf.adjoint() * urf * u;
      CHECK((wmmse::mse_matrix(in.st, in.ch, k, s) - expected).norm() < 1e-12);
      CHECK(wmmse::rate(in.st, in.ch, k, s) == 0.0);
    }
}

TEST_CASE("mse matrix is a covariance") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto in = make_instance(seed);
    for (int k = 0; k < 2; ++k)
      for (int s = 0; s < 4; ++s) {
        const auto e = wmmse::mse_matrix(in.st, in.ch, k, s);
        CHECK((e - e.adjoint()).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
      }
  }
}

TEST_CASE("mse matrix matches sampling") {
  auto in = make_instance(3);
  const int k = 1, s = 2;
  const Eigen::MatrixXcd hv = in.ch.h[k][s] * in.st.v_rf();
  const auto& urf = in.st.u_rf[k];
  const auto& u = in.st.u_digital[k][s];
  std::mt19937_64 rng(33);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(2, 2);
  const int draws = 100000;
  const double sn = std::sqrt(in.ch.noise_var);
  for (int d = 0; d < draws; ++d) {
    Eigen::VectorXcd y = sn * oracle::random_matrix(4, 1, rng);
    Eigen::VectorXcd own;
    for (int i = 0; i < 2; ++i) {
      const Eigen::VectorXcd w = oracle::random_matrix(2, 1, rng);
      y += hv * in.st.v_digital[i][s] * w;
      if (i == k) own = w;
    }
    const Eigen::VectorXcd err = u.adjoint() * urf.adjoint() * y - own;
    acc += err * err.adjoint();
  }
  acc /= draws;
  const auto e = wmmse::mse_matrix(in.st, in.ch, k, s);
  CHECK((acc - e).norm() <= 0.02 * e.norm());
}

TEST_CASE("rate invariance to combiner basis") {
  auto in = make_instance(4);
  std::mt19937_64 rng(44);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 4; ++s) {
      const double r = wmmse::rate(in.st, in.ch, k, s);
      CHECK(r > 0);
      HybridState t = in.st;
      t.u_digital[k][s] = in.st.u_digital[k][s] * oracle::random_matrix(2, 2, rng);
      CHECK(wmmse::rate(t, in.ch, k, s) == doctest::Approx(r).epsilon(1e-9));
    }
}

TEST_CASE("MMSE combiner is stationary and optimal") {
  auto in = make_instance(5);
  std::mt19937_64 rng(55);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 4; ++s) {
      in.st.u_digital[k][s] = wmmse::update_digital_combiner(in.st, in.ch, k, s);
      const double f0 = weighted_trace(in.st, in.ch, k, s);
      // Finite-difference gradient of tr(W E) in U vanishes.
      const Eigen::MatrixXcd u0 = in.st.u_digital[k][s];
      Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(u0.data(), u0.size());
      auto f = [&](const Eigen::VectorXcd& xv) {
        HybridState t = in.st;
        t.u_digital[k][s] = Eigen::Map<const Eigen::MatrixXcd>(xv.data(), u0.rows(), u0.cols());
        return weighted_trace(t, in.ch, k, s);
      };
      CHECK(oracle::fd_wirtinger(f, x).norm() < 1e-6 * std::max(1.0, f0));
      for (int trial = 0; trial < 20; ++trial) {
        HybridState t = in.st;
        t.u_digital[k][s] += oracle::random_matrix(2, 2, rng, 0.05);
        CHECK(weighted_trace(t, in.ch, k, s) >= f0 - 1e-12);
      }
    }
  // Zero channel gives a zero combiner.
  auto zero = make_instance(6);
  for (auto& hk : zero.ch.h)
    for (auto& h : hk) h.setZero();
  CHECK(wmmse::update_digital_combiner(zero.st, zero.ch, 0, 0).isZero());
}

TEST_CASE("high-SNR single-user combiner inverts the effective channel") {
  std::mt19937_64 rng(7);
  SystemConfig cfg = oracle::small_config(8, 2, 1, 2);
  cfg.num_rx_antennas = {2};
  cfg.validate();
  auto ch = oracle::random_channels(cfg, rng, 1e-12);
  HybridState st = oracle::random_state(cfg, rng);
  const auto g = wmmse::effective_channel(st, ch, 0, 0);
  const Eigen::MatrixXcd gv = g * st.v_digital[0][0];
  st.u_digital[0][0] = wmmse::update_digital_combiner(st, ch, 0, 0);
  // U^H G V -> I, i.e. U -> (G V)^{-H}.
  CHECK((st.u_digital[0][0].adjoint() * gv - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-6);
}

TEST_CASE("weight update") {
  auto in = make_instance(8);
  for (auto& vk : in.st.v_digital)
    for (auto& v : vk) v.setZero();
  wmmse::update_all_combiners(in.st, in.ch);
  wmmse::update_all_weights(in.st, in.ch);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 4; ++s) CHECK((in.st.weights[k][s] - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-12);

  in = make_instance(9);
  wmmse::update_all_combiners(in.st, in.ch);
  wmmse::update_all_weights(in.st, in.ch);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 4; ++s) {
      const auto& w = in.st.weights[k][s];
      CHECK((w * wmmse::mse_matrix(in.st, in.ch, k, s) - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-10);
      CHECK((w - w.adjoint()).norm() < 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w);
      CHECK(es.eigenvalues().minCoeff() > 0);
    }
}

TEST_CASE("WMMSE rate identity") {
  for (int users : {1, 2, 3}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto in = make_instance(100 + seed, users);
      wmmse::update_all_combiners(in.st, in.ch);
      wmmse::update_all_weights(in.st, in.ch);
      double log_det_sum = 0;
      for (int k = 0; k < users; ++k)
        for (int s = 0; s < 4; ++s) {
          const double ldw = wmmse::log_det_hpd(in.st.weights[k][s]) / std::log(2.0);
          log_det_sum += ldw;
          CHECK(wmmse::rate(in.st, in.ch, k, s) == doctest::Approx(ldw).epsilon(1e-8));
        }
      CHECK(std::abs(wmmse::sum_rate(in.st, in.ch) - log_det_sum) < 1e-8);
      // At the (U, W) optimum the objective is sum n_k - ln det W.
      const double expected = 2.0 * users * 4 - std::log(2.0) * log_det_sum;
      CHECK(wmmse::wmmse_objective(in.st, in.ch) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("objective with identity weights is the MSE trace") {
  auto in = make_instance(10);
  for (auto& wk : in.st.weights)
    for (auto& w : wk) w = Eigen::MatrixXcd::Identity(2, 2);
  double tr = 0;
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 4; ++s) tr += std::real(wmmse::mse_matrix(in.st, in.ch, k, s).trace());
  CHECK(wmmse::wmmse_objective(in.st, in.ch) == doctest::Approx(tr).epsilon(1e-13));
}

TEST_CASE("combiner and weight blocks do not increase the objective") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto in = make_instance(200 + seed);
    const double f0 = wmmse::wmmse_objective(in.st, in.ch);
    wmmse::update_all_combiners(in.st, in.ch);
    const double f1 = wmmse::wmmse_objective(in.st, in.ch);
    wmmse::update_all_weights(in.st, in.ch);
    const double f2 = wmmse::wmmse_objective(in.st, in.ch);
    CHECK(f1 <= f0 + 1e-8);
    CHECK(f2 <= f1 + 1e-8);
  }
}
