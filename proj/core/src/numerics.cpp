#include "mems/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <vector>

namespace mems {

namespace {

constexpr double kOrthonormalTol = 1e-10;
constexpr double kHermitianTol = 1e-10;
constexpr double kPdEigRatio = 1e-12;

Eigen::Index rank_from_singular_values(const RealVector& sv, Eigen::Index rows,
                                       Eigen::Index cols, double rel_tol) {
  if (sv.size() == 0) return 0;
  const double smax = sv.maxCoeff();
  if (smax <= 0.0) return 0;
  const double thresh = rel_tol * smax * static_cast<double>(std::max(rows, cols));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) ++r;
  }
  return r;
}

}  // namespace

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(what) + ": input has non-finite entries");
  }
}

void apply_phase_convention(ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > best) {
        best = a;
        imax = i;
      }
    }
    if (best <= 0.0) continue;
    const Complex pivot = m(imax, j);
    m.col(j) *= std::conj(pivot) / std::abs(pivot);
    // Pin the pivot exactly real; the rotation above leaves a ~1 ulp phase.
    m(imax, j) = Complex(std::abs(m(imax, j)), 0.0);
  }
}

Eigen::Index numerical_rank(const ComplexMatrix& m, const TolerancePolicy& tol) {
  require_finite(m, "numerical_rank");
  tol.validate();
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return rank_from_singular_values(svd.singularValues(), m.rows(), m.cols(),
                                   tol.rank_rel_tol);
}

ComplexMatrix null_space_basis(const ComplexMatrix& m, const TolerancePolicy& tol) {
  require_finite(m, "null_space_basis");
  tol.validate();
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) {
    return ComplexMatrix::Identity(n, n);
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const Eigen::Index r =
      rank_from_singular_values(svd.singularValues(), m.rows(), m.cols(), tol.rank_rel_tol);
  ComplexMatrix basis = svd.matrixV().rightCols(n - r);
  apply_phase_convention(basis);
  return basis;
}

ComplexMatrix row_space_basis(const ComplexMatrix& m, const TolerancePolicy& tol) {
  require_finite(m, "row_space_basis");
  tol.validate();
  if (m.rows() == 0) {
    return ComplexMatrix(m.cols(), 0);
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const Eigen::Index r =
      rank_from_singular_values(svd.singularValues(), m.rows(), m.cols(), tol.rank_rel_tol);
  ComplexMatrix basis = svd.matrixV().leftCols(r);
  apply_phase_convention(basis);
  return basis;
}

ComplexMatrix projector(const ComplexMatrix& basis) {
  require_finite(basis, "projector");
  const Eigen::Index n = basis.rows();
  if (basis.cols() == 0) {
    return ComplexMatrix::Zero(n, n);
  }
  const ComplexMatrix gram = basis.adjoint() * basis;
  const double dev = (gram - ComplexMatrix::Identity(basis.cols(), basis.cols()))
                         .cwiseAbs()
                         .maxCoeff();
  if (dev > kOrthonormalTol) {
    std::ostringstream os;
    os << "projector: basis is not orthonormal (max deviation " << dev << ")";
    throw ContractViolationError(os.str());
  }
  ComplexMatrix p = basis * basis.adjoint();
  // Symmetrize away the last ulps so P = P^H holds exactly.
  p = Complex(0.5, 0.0) * (p + p.adjoint()).eval();
  return p;
}

ComplexMatrix pseudoinverse(const ComplexMatrix& m, const TolerancePolicy& tol) {
  require_finite(m, "pseudoinverse");
  tol.validate();
  if (m.rows() == 0 || m.cols() == 0) {
    return ComplexMatrix(m.cols(), m.rows());
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const Eigen::Index r =
      rank_from_singular_values(sv, m.rows(), m.cols(), tol.rank_rel_tol);
  RealVector inv = RealVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < r; ++i) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

HermitianEig hermitian_eig(const ComplexMatrix& m) {
  require_finite(m, "hermitian_eig");
  if (m.rows() != m.cols()) {
    throw InvalidInputError("hermitian_eig: matrix must be square");
  }
  const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  const double dev = m.size() ? (m - m.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  if (dev > kHermitianTol * scale) {
    std::ostringstream os;
    os << "hermitian_eig: matrix deviates from Hermitian by " << dev;
    throw ContractViolationError(os.str());
  }
  const ComplexMatrix sym = Complex(0.5, 0.0) * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
  HermitianEig out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  apply_phase_convention(out.vectors);
  return out;
}

ComplexMatrix cholesky_factor(const ComplexMatrix& m) {
  require_finite(m, "cholesky_factor");
  if (m.rows() != m.cols()) {
    throw InvalidInputError("cholesky_factor: matrix must be square");
  }
  const ComplexMatrix sym = Complex(0.5, 0.0) * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > kPdEigRatio * std::max(lmax, 0.0))) {
    std::ostringstream os;
    os << "cholesky_factor: matrix is not positive definite (smallest eigenvalue "
       << lmin << ", largest " << lmax << ")";
    throw std::domain_error(os.str());
  }
  Eigen::LLT<ComplexMatrix> llt(sym);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "cholesky_factor: factorization failed near singularity (smallest eigenvalue "
       << lmin << ")";
    throw std::domain_error(os.str());
  }
  // Upper-triangular convention: with U = L^H, U^H U = L L^H = M.
  return ComplexMatrix(llt.matrixL()).adjoint();
}

HermitianEig generalized_hermitian_eig(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_finite(a, "generalized_hermitian_eig");
  require_finite(b, "generalized_hermitian_eig");
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw InvalidInputError("generalized_hermitian_eig: dimension mismatch");
  }
  // Reduce (A, B) to a standard Hermitian problem through B = U^H U.
  const ComplexMatrix u = cholesky_factor(b);
  const ComplexMatrix uinv = u.triangularView<Eigen::Upper>().solve(
      ComplexMatrix::Identity(b.rows(), b.cols()));
  const ComplexMatrix c = uinv.adjoint() * a * uinv;
  HermitianEig std_eig = hermitian_eig(c);
  HermitianEig out;
  out.values = std_eig.values;
  out.vectors = uinv * std_eig.vectors;
  // Generalized eigenvectors are B-orthonormal, not orthonormal; normalize
  // each to unit Euclidean length for downstream direction comparisons.
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    const double nrm = out.vectors.col(j).norm();
    if (nrm > 0.0) out.vectors.col(j) /= nrm;
  }
  apply_phase_convention(out.vectors);
  return out;
}

ComplexMatrix span_intersection(const std::vector<ComplexMatrix>& bases,
                                const TolerancePolicy& tol) {
  if (bases.empty()) {
    throw InvalidInputError("span_intersection: no bases given");
  }
  const Eigen::Index n = bases.front().rows();
  Eigen::Index total_rows = 0;
  for (const auto& b : bases) {
    if (b.rows() != n) {
      throw InvalidInputError("span_intersection: bases live in different spaces");
    }
    total_rows += n;
  }
  // x lies in every span iff every complement projector annihilates it.
  ComplexMatrix stack(total_rows, n);
  Eigen::Index row = 0;
  for (const auto& b : bases) {
    stack.middleRows(row, n) = ComplexMatrix::Identity(n, n) - projector(b);
    row += n;
  }
  return null_space_basis(stack, tol);
}

}  // namespace mems
