#pragma once

#include <utility>

#include "mems/types.hpp"

namespace mems {

/// Tolerance-governed dense kernels shared by every other component.
/// All functions are pure and safe to call concurrently.

/// Number of singular values above rank_rel_tol * sigma_max * max(rows, cols).
/// A zero matrix has rank 0.
Eigen::Index numerical_rank(const ComplexMatrix& m, const TolerancePolicy& tol = {});

/// Orthonormal basis (n x k) of the right null space of m, where
/// k = cols(m) - numerical_rank(m). Columns follow the library phase
/// convention (largest-magnitude entry real and positive). A matrix with
/// zero rows is treated as the zero map, so the basis is the identity.
ComplexMatrix null_space_basis(const ComplexMatrix& m, const TolerancePolicy& tol = {});

/// Orthonormal basis of the span of m's conjugated rows: the orthogonal
/// complement of the right null space. Column count equals numerical_rank(m).
ComplexMatrix row_space_basis(const ComplexMatrix& m, const TolerancePolicy& tol = {});

/// B * B^H for a matrix with orthonormal columns (checked to 1e-10).
ComplexMatrix projector(const ComplexMatrix& basis);

/// Moore-Penrose pseudoinverse via SVD, with the same singular-value
/// thresholding as numerical_rank.
ComplexMatrix pseudoinverse(const ComplexMatrix& m, const TolerancePolicy& tol = {});

struct HermitianEig {
  RealVector values;      // sorted descending
  ComplexMatrix vectors;  // unitary, phase-convention columns
};

/// Eigendecomposition of a Hermitian matrix (symmetrized as (M + M^H)/2
/// before factoring; inputs further than 1e-10 from Hermitian are rejected).
HermitianEig hermitian_eig(const ComplexMatrix& m);

/// Upper-triangular factor L with L^H L = M for Hermitian positive definite M.
/// Requires the smallest eigenvalue to exceed 1e-12 times the largest.
ComplexMatrix cholesky_factor(const ComplexMatrix& m);

/// Rotates each column so that its largest-magnitude entry is real and
/// positive. Deterministic output for tests; objectives only see |.|^2.
void apply_phase_convention(ComplexMatrix& m);

/// Generalized eigendecomposition of the Hermitian pencil (A, B) with B
/// positive definite, values sorted descending. Used by the pencil-based
/// secrecy baseline and by solver oracles.
HermitianEig generalized_hermitian_eig(const ComplexMatrix& a, const ComplexMatrix& b);

/// Orthonormal basis of the intersection of the column spans of the given
/// bases, computed through stacked null spaces of the complement projectors.
ComplexMatrix span_intersection(const std::vector<ComplexMatrix>& bases,
                                const TolerancePolicy& tol = {});

void require_finite(const ComplexMatrix& m, const char* what);

}  // namespace mems
