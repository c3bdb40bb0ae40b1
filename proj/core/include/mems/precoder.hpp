#pragma once

#include <optional>
#include <vector>

#include "mems/channel.hpp"
#include "mems/types.hpp"

namespace mems {

struct IterationCaps {
  int max_outer = 50;
  int max_fp = 500;
  int max_sca = 100;
  int max_pg = 2000;

  void validate() const {
    if (max_outer < 1 || max_fp < 1 || max_sca < 1 || max_pg < 1) {
      throw InvalidInputError("IterationCaps: caps must be >= 1");
    }
  }
};

struct OptimizerConfig {
  int n_streams = 1;
  double total_power = 1.0;
  Weights w;
  TolerancePolicy tol;
  IterationCaps caps;
  std::optional<ComplexMatrix> seed_basis;  // initial W, defaults to the
                                            // leading eigenvectors of the
                                            // composite gain matrix

  void validate(Eigen::Index n_t) const {
    w.validate();
    tol.validate();
    caps.validate();
    if (n_streams < 1 || n_streams > n_t) {
      throw InvalidInputError("OptimizerConfig: need 1 <= n_streams <= n_t");
    }
    if (!(total_power > 0.0)) {
      throw InvalidInputError("OptimizerConfig: total power must be positive");
    }
  }
};

/// Projector onto the orthogonal complement of the accepted streams plus
/// the three projected effective gain matrices, updated one stream at a
/// time without refactoring the residual covariances.
struct GainState {
  ComplexMatrix proj;                    // Pi, Hermitian idempotent
  std::array<ComplexMatrix, 3> gains;    // projected G-tilde per Link

  const ComplexMatrix& gain(Link l) const { return gains[static_cast<std::size_t>(l)]; }
};

GainState gain_state_init(const ChannelSet& ch);

/// Absorbs stream (w_n, p_n): shrinks the projector by the accepted
/// direction and applies the rank-one gain correction (no correction when
/// p_n = 0, matching the 1/p_n -> infinity limit).
GainState gain_update(const GainState& state, const ComplexVector& w_n, double p_n);

struct BasisStats {
  long fp_iters = 0;
  int warm_start_fallbacks = 0;
  bool all_converged = true;
  double max_stationarity_residual = 0.0;  // ||(B - C) f|| / ||B f|| per stream max
};

/// Stage 1: sequential construction of an orthonormal basis under fixed
/// per-stream powers, each column found by the damped generalized power
/// iteration warm-started from the previous basis.
ComplexMatrix basis_update(const ChannelSet& ch, const RealVector& powers,
                           const OptimizerConfig& cfg, const ComplexMatrix& basis_prev,
                           BasisStats* stats = nullptr);

struct PowerStats {
  long sca_iters = 0;
  bool converged = false;
  std::vector<RealVector> iterates;  // initial point plus one entry per SCA step
};

/// Stage 2: power allocation for a fixed basis by successive convex
/// approximation of the difference-of-convex objective; the true objective
/// is nondecreasing across iterates and the returned point satisfies the
/// simplex KKT conditions.
RealVector power_allocation(const ChannelSet& ch, const ComplexMatrix& basis,
                            const OptimizerConfig& cfg, const RealVector& p_prev,
                            PowerStats* stats = nullptr);

/// Concave surrogate maximization over {p >= 0, sum p <= P_tot} by
/// projected gradient ascent with backtracking. Terminates when the KKT
/// residual drops below kkt_tol; on line-search failure returns the best
/// feasible iterate with *converged = false.
RealVector convex_subproblem(const ComplexMatrix& k_c, const ComplexMatrix& k_s,
                             const RealVector& k_e_grad, const Weights& w, double total_power,
                             const RealVector& p_init, double kkt_tol, int max_pg,
                             bool* converged = nullptr);

struct SolveResult {
  Precoder precoder;
  std::vector<double> objective_trace;  // unclamped objective after each power stage
  int outer_iters = 0;
  long fp_iters = 0;
  long sca_iters = 0;
  bool converged = false;
  double wall_ms = 0.0;
};

/// Full two-stage alternation: basis update and power allocation with warm
/// starts until the objective change falls below outer_tol.
SolveResult solve(const ChannelSet& ch, const OptimizerConfig& cfg);

struct LowSnrSolution {
  Precoder precoder;
  bool degenerate = false;  // largest composite eigenvalue <= 0, zero power
};

/// Closed-form small-power optimum: everything on the principal
/// eigenvector of w_c H_c^H H_c - w_c H_e^H H_e + w_s H_s^H H_s.
LowSnrSolution low_snr_precoder(const ChannelSet& ch, const Weights& w, double total_power);

/// The composite low-SNR gain matrix M above.
ComplexMatrix composite_gain(const ChannelSet& ch, const Weights& w);

/// Scaled KKT residual of the simplex-constrained ascent problem for a
/// gradient g at point p; also reports the multiplier through *nu.
double simplex_kkt_residual(const RealVector& grad, const RealVector& p, double total_power,
                            double* nu = nullptr);

/// Euclidean projection onto {p >= 0, sum p <= total_power}.
RealVector project_to_simplex(const RealVector& p, double total_power);

}  // namespace mems
