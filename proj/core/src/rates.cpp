#include "mems/rates.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "mems/numerics.hpp"

namespace mems {

namespace {

constexpr double kLog2e = 1.4426950408889634;  // 1/ln(2)

double log2_one_plus_sum(const RealVector& eigs) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    acc += std::log1p(std::max(eigs(i), 0.0));
  }
  return acc * kLog2e;
}

}  // namespace

double link_rate(const ComplexMatrix& h, const ComplexMatrix& f) {
  require_finite(h, "link_rate.h");
  require_finite(f, "link_rate.f");
  if (h.cols() != f.rows()) {
    throw InvalidInputError("link_rate: cols(H) must equal rows(F)");
  }
  if (f.cols() == 0) return 0.0;
  const ComplexMatrix hf = h * f;
  const ComplexMatrix gram = hf.adjoint() * hf;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
      Complex(0.5, 0.0) * (gram + gram.adjoint()), Eigen::EigenvaluesOnly);
  return log2_one_plus_sum(es.eigenvalues());
}

double secrecy_rate(const ComplexMatrix& h_c, const ComplexMatrix& h_e,
                    const ComplexMatrix& f) {
  return std::max(0.0, link_rate(h_c, f) - link_rate(h_e, f));
}

double weighted_objective(const ChannelSet& ch, const ComplexMatrix& f,
                          const Weights& w, bool clamp) {
  w.validate();
  const double r_c = link_rate(ch.comm, f);
  const double r_e = link_rate(ch.eve, f);
  const double r_s = link_rate(ch.sense, f);
  const double sec = clamp ? std::max(0.0, r_c - r_e) : (r_c - r_e);
  return w.comm * sec + w.sense * r_s;
}

RealVector marginal_gains(const ChannelSet& ch, const ComplexMatrix& basis,
                          const RealVector& powers, const Weights& w) {
  w.validate();
  require_finite(basis, "marginal_gains.basis");
  const Eigen::Index n_streams = basis.cols();
  if (powers.size() != n_streams) {
    throw InvalidInputError("marginal_gains: powers length must match basis columns");
  }
  if (powers.size() && powers.minCoeff() < 0.0) {
    throw InvalidInputError("marginal_gains: powers must be nonnegative");
  }

  RealVector gains = RealVector::Zero(n_streams);
  for (Link l : kAllLinks) {
    const ComplexMatrix& h = ch.link(l);
    const double lw = (l == Link::comm) ? w.comm : (l == Link::eve) ? -w.comm : w.sense;
    if (lw == 0.0) continue;
    // T_{n-1} = I + H W_{n-1} P_{n-1} W_{n-1}^H H^H accumulated one rank at
    // a time; the marginal gain reads off the current effective Gram.
    ComplexMatrix t = ComplexMatrix::Identity(h.rows(), h.rows());
    for (Eigen::Index n = 0; n < n_streams; ++n) {
      const ComplexVector hw = h * basis.col(n);
      const ComplexVector tinv_hw = t.llt().solve(hw);
      const double q = std::max(0.0, std::real(hw.dot(tinv_hw)));
      gains(n) += lw * kLog2e * std::log1p(powers(n) * q);
      t += powers(n) * hw * hw.adjoint();
    }
  }
  return gains;
}

}  // namespace mems
