#pragma once

#include <array>
#include <functional>
#include <string>

#include "mems/channel.hpp"
#include "mems/types.hpp"

namespace mems {

/// Labels of the eight transmit-space subspaces, keyed by which receivers
/// see them: `none` is invisible everywhere, `comm_sense` is seen by the
/// legitimate receiver and the sensing receiver but nulled at the
/// eavesdropper, `full_common` is inside all three row spaces.
enum class SubspaceLabel : int {
  none = 0,        // n
  comm = 1,        // c
  sense = 2,       // s
  eve = 3,         // e
  comm_sense = 4,  // cs
  comm_eve = 5,    // ce
  sense_eve = 6,   // se
  full_common = 7, // cse
};

inline constexpr std::array<SubspaceLabel, 8> kAllSubspaceLabels{
    SubspaceLabel::none,       SubspaceLabel::comm,     SubspaceLabel::sense,
    SubspaceLabel::eve,        SubspaceLabel::comm_sense, SubspaceLabel::comm_eve,
    SubspaceLabel::sense_eve,  SubspaceLabel::full_common};

const char* subspace_label_name(SubspaceLabel label);

/// Eight orthonormal bases that together split C^{n_t} as a direct sum.
struct SubspaceDecomposition {
  std::array<ComplexMatrix, 8> bases;
  TolerancePolicy tol;

  const ComplexMatrix& basis(SubspaceLabel label) const {
    return bases[static_cast<std::size_t>(label)];
  }
  Eigen::Index dim(SubspaceLabel label) const { return basis(label).cols(); }
  Eigen::Index total_dim() const {
    return bases[0].rows();
  }
};

/// Per-label DoF weights at a given trade-off point, the resulting maximal
/// weighted DoF, and the dimension of the useful subspace.
struct DofReport {
  std::array<double, 8> weight{};
  double d_max = 0.0;
  Eigen::Index useful_dim = 0;

  double weight_of(SubspaceLabel label) const {
    return weight[static_cast<std::size_t>(label)];
  }
};

/// Splits the transmit space into the eight labeled subspaces through
/// stacked null-space solves, in the fixed order n, c, s, e, cs, ce, se,
/// cse. Verifies the direct-sum dimension identity and the defining
/// membership residuals before returning; failures raise
/// NumericalDegeneracyError (some rank-deficient channel geometries do not
/// admit the decomposition).
SubspaceDecomposition decompose(const ChannelSet& ch, const TolerancePolicy& tol = {});

/// Per-label DoF weights {0, +w_c, +w_s, -w_c, w_c+w_s, 0, w_s-w_c, +w_s}
/// and d_max = w_c k_c + w_s k_s + (w_c+w_s) k_cs + [w_s-w_c]^+ k_se + w_s k_cse.
DofReport dof_table(const SubspaceDecomposition& dec, const Weights& w);

/// Orthonormal basis of the direct sum of all labels with strictly
/// positive DoF weight: c, s, cs, cse, plus se exactly when w_s > w_c.
ComplexMatrix useful_subspace(const SubspaceDecomposition& dec, const Weights& w);

/// Basis of the useful subspace with uniform per-stream power. Achieves
/// the maximal weighted DoF; throws EmptyUsefulSpaceError when the useful
/// subspace is trivial.
Precoder quasi_optimal_precoder(const SubspaceDecomposition& dec, const Weights& w,
                                double total_power);

/// Weighted rank combination w_c rank(H_c F) - w_c rank(H_e F) + w_s rank(H_s F).
/// Meaningful for precoders whose nonzero columns all carry power of the
/// same order.
double rank_dof(const ChannelSet& ch, const ComplexMatrix& f, const Weights& w,
                const TolerancePolicy& tol = {});

/// Finite-difference slope of the unclamped objective between two powers
/// (dB), for a precoder family indexed by total power.
double empirical_dof(const ChannelSet& ch,
                     const std::function<ComplexMatrix(double)>& make_f,
                     const Weights& w, double p_lo_db = 40.0, double p_hi_db = 60.0);

}  // namespace mems
