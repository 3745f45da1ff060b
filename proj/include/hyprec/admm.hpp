#pragma once

#include <string>
#include <vector>

#include "hyprec/model.hpp"
#include "hyprec/ofdm.hpp"
#include "hyprec/state.hpp"

namespace hyprec::admm {

enum class RhoPolicy { Fixed, Increasing, Balanced };
/// Exact: Euclidean projection onto the per-chain spectral ellipsoid.
/// Radial: uniform per-chain rescaling onto its boundary.
enum class SpectralProjection { Exact, Radial };

struct AdmmOptions {
  double tol = 1e-6;
  int max_iter = 1000;
  double rho0 = 1.0;        // relative to the mean diagonal of the quadratic term
  double rho_growth = 2.0;
  double balance_ratio = 10.0;
  RhoPolicy policy = RhoPolicy::Balanced;
  SpectralProjection projection = SpectralProjection::Exact;
  /// Try the power-only solution first and return it when it is already feasible.
  bool shortcut = true;
  /// Rescale chains at exit so every constraint holds exactly.
  bool polish = true;
  /// Return the previous precoder when it is feasible and the solve did not improve on it.
  bool keep_if_worse = true;
};

/// Digital-precoder subproblem with every other block fixed:
/// minimize sum_s sum_k tr(V^H A^s V) - 2 Re tr(B^H V) + constant
/// s.t. per-subcarrier power, per-chain spectral and per-chain clipping constraints.
struct DigitalSubproblem {
  int num_users = 0;
  int num_subcarriers = 0;
  int num_rf_chains = 0;
  std::vector<int> streams;
  double subarray_gain = 1;  // N_t / N_RF
  std::vector<Eigen::MatrixXcd> a;  // [s]
  MatrixGrid b;                     // [k][s]
  double constant = 0;
  double power_budget = 0;
  Eigen::VectorXd l_diag;
  double spectral_rhs = kInf;  // sqrt(eps')
  double clip_radius = kInf;   // chi / sqrt(-2 ln eps)
  std::vector<Eigen::VectorXd> eig_values;    // [s], filled by prepare()
  std::vector<Eigen::MatrixXcd> eig_vectors;  // [s]

  /// Caches the eigendecomposition of every A^s.
  void prepare();

  /// Equals the WMMSE objective when v is substituted into the state.
  double objective(const MatrixGrid& v) const;
  double power(const MatrixGrid& v, int s) const;
  /// Largest constraint excess (0 when feasible): power, spectral, clipping.
  double power_excess(const MatrixGrid& v) const;
  double spectral_excess(const MatrixGrid& v) const;
  double clip_excess(const MatrixGrid& v) const;
  bool feasible(const MatrixGrid& v, double rel_tol = 1e-9) const;
};

DigitalSubproblem build_subproblem(const HybridState& st, const model::ChannelSet& ch, const SystemConfig& cfg,
                                   const ofdm::SpectralPlan& plan);

struct AdmmState {
  MatrixGrid r, z, lambda1, lambda2;
  double rho = 1;
  Eigen::VectorXd power_duals;  // per subcarrier
  std::vector<double> primal_res, dual_res, rho_history, objective;
};

/// Fresh state with R = Z = v and zero duals; rho scaled by the quadratic term.
AdmmState init_state(const DigitalSubproblem& p, const MatrixGrid& v, const AdmmOptions& opts);
double reference_rho(const DigitalSubproblem& p);

/// Minimizer of the V part of the augmented Lagrangian under the power constraint.
/// The power dual of each subcarrier is found by bisection and stored in st.power_duals.
MatrixGrid update_v(AdmmState& st, const DigitalSubproblem& p);
/// Solves (A + (half_rho + c theta) I) V = rhs per subcarrier under the power budget.
/// half_rho = 0 uses a pseudo-inverse on the null space of A.
MatrixGrid solve_power_constrained(const DigitalSubproblem& p, const MatrixGrid& rhs, double half_rho,
                                   Eigen::VectorXd* duals = nullptr);

MatrixGrid update_r(AdmmState& st, const MatrixGrid& v, const DigitalSubproblem& p,
                    SpectralProjection mode = SpectralProjection::Exact);
MatrixGrid update_z(AdmmState& st, const DigitalSubproblem& p);
void update_duals(AdmmState& st, const MatrixGrid& v);

/// Per-chain projections used by the R and Z steps. Rows of chain m across all (k,s) move together.
MatrixGrid project_spectral(const MatrixGrid& x, const Eigen::VectorXd& l_diag, double rhs, SpectralProjection mode);
MatrixGrid project_clip(const MatrixGrid& x, double radius);

struct AdmmResult {
  MatrixGrid v;
  AdmmState state;
  int iterations = 0;
  bool converged = false;
  bool used_shortcut = false;
  bool kept_previous = false;
  std::string warning;
};

AdmmResult admm_solve(const DigitalSubproblem& p, const MatrixGrid& v_prev, const AdmmOptions& opts);

/// iter,primal_res,dual_res,rho,objective
std::string residual_csv(const AdmmState& st);

/// Elementwise grid helpers.
double grid_norm2(const MatrixGrid& g);
MatrixGrid grid_axpy(double alpha, const MatrixGrid& x, const MatrixGrid& y);  // alpha x + y
MatrixGrid grid_zero_like(const MatrixGrid& g);

}  // namespace hyprec::admm
