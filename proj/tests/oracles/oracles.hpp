#pragma once

// Test-only reference implementations. Nothing here calls the solver it checks.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "hyprec/admm.hpp"
#include "hyprec/bcd.hpp"

namespace oracle {

using hyprec::cd;
using hyprec::MatrixGrid;

Eigen::MatrixXcd random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0);
/// Random Hermitian positive definite matrix with eigenvalues in [lo, hi].
Eigen::MatrixXcd random_hpd(int n, std::mt19937_64& rng, double lo = 0.2, double hi = 2.0);
Eigen::VectorXcd random_phases(int n, std::mt19937_64& rng);

/// Small config used by most unit tests; unit-scale channels are drawn by random_channels.
hyprec::SystemConfig small_config(int nt = 8, int nrf = 2, int users = 2, int subcarriers = 4);
/// i.i.d. unit-variance Gaussian channels with the given noise variance.
hyprec::model::ChannelSet random_channels(const hyprec::SystemConfig& cfg, std::mt19937_64& rng, double noise_var = 0.1);
/// State with random phases, digital precoders, combiners and HPD weights.
hyprec::HybridState random_state(const hyprec::SystemConfig& cfg, std::mt19937_64& rng, double v_scale = 0.3);

/// Central finite-difference Wirtinger gradient 0.5 (df/dRe + j df/dIm).
Eigen::VectorXcd fd_wirtinger(const std::function<double(const Eigen::VectorXcd&)>& f, const Eigen::VectorXcd& x,
                              double h = 1e-6);

/// Phase grid minimizer of g(phi) over `points` uniform phases.
double grid_argmin_phase(const std::function<double(double)>& g, int points);
/// Wrapped absolute phase difference in [0, pi].
double phase_distance(double a, double b);

/// Composite Simpson quadrature of the rectangular subcarrier pulse transform.
cd pulse_spectrum_quadrature(double f, int s_value, double t_sym, double t_guard, int intervals = 200000);

/// Accelerated projected gradient on the digital subproblem; the feasible set
/// projection is Dykstra's alternating projection over the three constraint families.
struct PgResult {
  MatrixGrid v;
  double objective = 0;
  int iterations = 0;
};
PgResult projected_gradient(const hyprec::admm::DigitalSubproblem& p, int max_iter = 20000, double tol = 1e-13);

/// Euclidean projection onto sum_s l_s ||x_s||^2 <= bound for one chain, by Newton on the multiplier.
Eigen::VectorXd ellipsoid_scales(const Eigen::VectorXd& l, const Eigen::VectorXd& energy, double bound);

/// Feasible-set projection used by projected_gradient.
MatrixGrid project_feasible(const hyprec::admm::DigitalSubproblem& p, const MatrixGrid& x, int cycles = 200);

struct MeanSe {
  double mean = 0;
  double se = 0;
};
MeanSe mean_se(const std::vector<double>& xs);

}  // namespace oracle
