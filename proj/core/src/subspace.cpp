#include "mems/subspace.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "mems/numerics.hpp"
#include "mems/rates.hpp"

namespace mems {

namespace {

constexpr double kMembershipTol = 1e-8;

std::size_t idx(SubspaceLabel l) { return static_cast<std::size_t>(l); }

// Rows of each block are rescaled to a common magnitude before stacking;
// per-block scaling does not move the null space but keeps the rank
// threshold meaningful when channel norms differ wildly.
ComplexMatrix stack_blocks(const std::vector<ComplexMatrix>& blocks, Eigen::Index n) {
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  ComplexMatrix out(rows, n);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    if (b.rows() == 0) continue;
    const double nrm = b.cwiseAbs().maxCoeff();
    out.middleRows(at, b.rows()) = (nrm > 0.0) ? (b / nrm).eval() : b;
    at += b.rows();
  }
  return out;
}

ComplexMatrix stacked_null(const std::vector<ComplexMatrix>& blocks, Eigen::Index n,
                           const TolerancePolicy& tol) {
  return null_space_basis(stack_blocks(blocks, n), tol);
}

// Lemma-style complement: given span(A) inside span(U) with both bases
// orthonormal, returns an orthonormal basis of U ∩ A^perp through a second
// null-space solve in U's coordinates.
ComplexMatrix complement_within(const ComplexMatrix& u, const ComplexMatrix& a,
                                const TolerancePolicy& tol) {
  if (a.cols() == 0) return u;
  if (u.cols() == 0) return u;
  const ComplexMatrix reduced = a.adjoint() * u;  // k_A x k_U
  ComplexMatrix coeff = null_space_basis(reduced, tol);
  ComplexMatrix basis = u * coeff;
  apply_phase_convention(basis);
  return basis;
}

double membership_residual(const ComplexMatrix& h, const ComplexMatrix& basis) {
  if (basis.cols() == 0) return 0.0;
  const double hn = h.norm();
  if (hn == 0.0) return 0.0;
  return (h * basis).norm() / hn;
}

}  // namespace

const char* subspace_label_name(SubspaceLabel label) {
  switch (label) {
    case SubspaceLabel::none: return "n";
    case SubspaceLabel::comm: return "c";
    case SubspaceLabel::sense: return "s";
    case SubspaceLabel::eve: return "e";
    case SubspaceLabel::comm_sense: return "cs";
    case SubspaceLabel::comm_eve: return "ce";
    case SubspaceLabel::sense_eve: return "se";
    default: return "cse";
  }
}

SubspaceDecomposition decompose(const ChannelSet& ch, const TolerancePolicy& tol) {
  ch.validate();
  tol.validate();
  const Eigen::Index n = ch.tx_antennas();
  const ComplexMatrix& hc = ch.comm;
  const ComplexMatrix& hs = ch.sense;
  const ComplexMatrix& he = ch.eve;

  SubspaceDecomposition dec;
  dec.tol = tol;
  auto& b = dec.bases;

  // Invisible-everywhere space, then the three private spaces as
  // complements of it inside the pairwise null intersections.
  b[idx(SubspaceLabel::none)] = stacked_null({hc, hs, he}, n, tol);
  const ComplexMatrix& v_n = b[idx(SubspaceLabel::none)];
  b[idx(SubspaceLabel::comm)] = complement_within(stacked_null({hs, he}, n, tol), v_n, tol);
  b[idx(SubspaceLabel::sense)] = complement_within(stacked_null({hc, he}, n, tol), v_n, tol);
  b[idx(SubspaceLabel::eve)] = complement_within(stacked_null({hc, hs}, n, tol), v_n, tol);

  // Pairwise-common spaces: the part of one null space orthogonal to the
  // three labels already placed inside it.
  auto pair_common = [&](const ComplexMatrix& h, std::initializer_list<SubspaceLabel> prior) {
    std::vector<ComplexMatrix> blocks{h};
    for (SubspaceLabel l : prior) {
      if (dec.basis(l).cols() > 0) blocks.push_back(dec.basis(l).adjoint());
    }
    return stacked_null(blocks, n, tol);
  };
  b[idx(SubspaceLabel::comm_sense)] =
      pair_common(he, {SubspaceLabel::none, SubspaceLabel::comm, SubspaceLabel::sense});
  b[idx(SubspaceLabel::comm_eve)] =
      pair_common(hs, {SubspaceLabel::none, SubspaceLabel::eve, SubspaceLabel::comm});
  b[idx(SubspaceLabel::sense_eve)] =
      pair_common(hc, {SubspaceLabel::none, SubspaceLabel::sense, SubspaceLabel::eve});

  // Whatever is orthogonal to the seven spans belongs to all three row
  // spaces.
  Eigen::Index seven = 0;
  for (int i = 0; i < 7; ++i) seven += b[static_cast<std::size_t>(i)].cols();
  if (seven == 0) {
    b[idx(SubspaceLabel::full_common)] = ComplexMatrix::Identity(n, n);
  } else {
    ComplexMatrix concat(n, seven);
    Eigen::Index at = 0;
    for (int i = 0; i < 7; ++i) {
      const auto& bi = b[static_cast<std::size_t>(i)];
      concat.middleCols(at, bi.cols()) = bi;
      at += bi.cols();
    }
    b[idx(SubspaceLabel::full_common)] = null_space_basis(concat.adjoint(), tol);
  }

  // Postcondition checks: dimension identity, directness, memberships.
  Eigen::Index total = 0;
  for (const auto& bi : b) total += bi.cols();
  if (total != n) {
    std::ostringstream os;
    os << "decompose: subspace dimensions sum to " << total << " instead of " << n << " (";
    for (SubspaceLabel l : kAllSubspaceLabels) {
      os << subspace_label_name(l) << "=" << dec.dim(l)
         << (l == SubspaceLabel::full_common ? "" : " ");
    }
    os << "); the channel geometry does not admit the eight-way direct sum";
    throw NumericalDegeneracyError(os.str());
  }
  ComplexMatrix all(n, n);
  Eigen::Index at = 0;
  for (const auto& bi : b) {
    all.middleCols(at, bi.cols()) = bi;
    at += bi.cols();
  }
  if (numerical_rank(all, tol) != n) {
    throw NumericalDegeneracyError(
        "decompose: concatenated bases are numerically singular");
  }
  struct Membership {
    SubspaceLabel label;
    std::array<bool, 3> nulled;  // {comm, eve, sense}
  };
  static constexpr std::array<Membership, 7> kMemberships{{
      {SubspaceLabel::none, {true, true, true}},
      {SubspaceLabel::comm, {false, true, true}},
      {SubspaceLabel::sense, {true, true, false}},
      {SubspaceLabel::eve, {true, false, true}},
      {SubspaceLabel::comm_sense, {false, true, false}},
      {SubspaceLabel::comm_eve, {false, false, true}},
      {SubspaceLabel::sense_eve, {true, false, false}},
  }};
  for (const auto& ms : kMemberships) {
    for (int li = 0; li < 3; ++li) {
      if (!ms.nulled[static_cast<std::size_t>(li)]) continue;
      const Link link = static_cast<Link>((li == 0) ? 0 : (li == 1) ? 1 : 2);
      const double res = membership_residual(ch.link(link), dec.basis(ms.label));
      if (res > kMembershipTol) {
        std::ostringstream os;
        os << "decompose: membership residual " << res << " for subspace "
           << subspace_label_name(ms.label);
        throw NumericalDegeneracyError(os.str());
      }
    }
  }
  return dec;
}

DofReport dof_table(const SubspaceDecomposition& dec, const Weights& w) {
  w.validate();
  DofReport rep;
  rep.weight[idx(SubspaceLabel::none)] = 0.0;
  rep.weight[idx(SubspaceLabel::comm)] = w.comm;
  rep.weight[idx(SubspaceLabel::sense)] = w.sense;
  rep.weight[idx(SubspaceLabel::eve)] = -w.comm;
  rep.weight[idx(SubspaceLabel::comm_sense)] = w.comm + w.sense;
  rep.weight[idx(SubspaceLabel::comm_eve)] = 0.0;
  rep.weight[idx(SubspaceLabel::sense_eve)] = w.sense - w.comm;
  rep.weight[idx(SubspaceLabel::full_common)] = w.sense;

  const double k_c = static_cast<double>(dec.dim(SubspaceLabel::comm));
  const double k_s = static_cast<double>(dec.dim(SubspaceLabel::sense));
  const double k_cs = static_cast<double>(dec.dim(SubspaceLabel::comm_sense));
  const double k_se = static_cast<double>(dec.dim(SubspaceLabel::sense_eve));
  const double k_cse = static_cast<double>(dec.dim(SubspaceLabel::full_common));
  rep.d_max = w.comm * k_c + w.sense * k_s + (w.comm + w.sense) * k_cs +
              std::max(0.0, w.sense - w.comm) * k_se + w.sense * k_cse;

  rep.useful_dim = dec.dim(SubspaceLabel::comm) + dec.dim(SubspaceLabel::sense) +
                   dec.dim(SubspaceLabel::comm_sense) + dec.dim(SubspaceLabel::full_common);
  if (w.sense > w.comm) rep.useful_dim += dec.dim(SubspaceLabel::sense_eve);
  return rep;
}

ComplexMatrix useful_subspace(const SubspaceDecomposition& dec, const Weights& w) {
  w.validate();
  std::vector<SubspaceLabel> members{SubspaceLabel::comm, SubspaceLabel::sense,
                                     SubspaceLabel::comm_sense, SubspaceLabel::full_common};
  if (w.sense > w.comm) members.push_back(SubspaceLabel::sense_eve);

  const Eigen::Index n = dec.total_dim();
  Eigen::Index cols = 0;
  for (SubspaceLabel l : members) cols += dec.dim(l);
  if (cols == 0) return ComplexMatrix(n, 0);

  ComplexMatrix concat(n, cols);
  Eigen::Index at = 0;
  for (SubspaceLabel l : members) {
    concat.middleCols(at, dec.dim(l)) = dec.basis(l);
    at += dec.dim(l);
  }
  // The members form a direct sum but need not be mutually orthogonal;
  // an SVD-based column-space basis orthonormalizes the union.
  return row_space_basis(concat.adjoint(), dec.tol);
}

Precoder quasi_optimal_precoder(const SubspaceDecomposition& dec, const Weights& w,
                                double total_power) {
  if (!(total_power > 0.0)) {
    throw InvalidInputError("quasi_optimal_precoder: total power must be positive");
  }
  const ComplexMatrix basis = useful_subspace(dec, w);
  if (basis.cols() == 0) {
    throw EmptyUsefulSpaceError(
        "quasi_optimal_precoder: useful subspace is empty; transmit nothing");
  }
  Precoder p;
  p.basis = basis;
  p.powers = RealVector::Constant(basis.cols(), total_power / static_cast<double>(basis.cols()));
  return p;
}

namespace {

// Rank of a product H * F judged against the factors' scale: a column of F
// annihilated by H leaves residue ~eps * |H| * |F| that must not count, so
// the threshold uses |H| |F| instead of the product's own largest singular
// value.
Eigen::Index product_rank(const ComplexMatrix& h, const ComplexMatrix& f,
                          const TolerancePolicy& tol) {
  const ComplexMatrix prod = h * f;
  if (prod.rows() == 0 || prod.cols() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(prod);
  const double scale = h.norm() * f.norm();
  const double thresh =
      tol.rank_rel_tol * scale * static_cast<double>(std::max(prod.rows(), prod.cols()));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > thresh) ++r;
  }
  return r;
}

}  // namespace

double rank_dof(const ChannelSet& ch, const ComplexMatrix& f, const Weights& w,
                const TolerancePolicy& tol) {
  w.validate();
  require_finite(f, "rank_dof.f");
  tol.validate();
  const double r_c = static_cast<double>(product_rank(ch.comm, f, tol));
  const double r_e = static_cast<double>(product_rank(ch.eve, f, tol));
  const double r_s = static_cast<double>(product_rank(ch.sense, f, tol));
  return w.comm * r_c - w.comm * r_e + w.sense * r_s;
}

double empirical_dof(const ChannelSet& ch,
                     const std::function<ComplexMatrix(double)>& make_f,
                     const Weights& w, double p_lo_db, double p_hi_db) {
  if (!(p_hi_db > p_lo_db)) {
    throw InvalidInputError("empirical_dof: need p_hi_db > p_lo_db");
  }
  const double p_lo = std::pow(10.0, p_lo_db / 10.0);
  const double p_hi = std::pow(10.0, p_hi_db / 10.0);
  const double r_lo = weighted_objective(ch, make_f(p_lo), w, /*clamp=*/false);
  const double r_hi = weighted_objective(ch, make_f(p_hi), w, /*clamp=*/false);
  return (r_hi - r_lo) / (std::log2(p_hi) - std::log2(p_lo));
}

}  // namespace mems
