#include "mems/baselines.hpp"

#include <cmath>

#include "mems/numerics.hpp"
#include "mems/oracle.hpp"
#include "mems/rates.hpp"

namespace mems {

Precoder gsvd_secrecy_precoder(const ComplexMatrix& h_c, const ComplexMatrix& h_e,
                               double total_power, int n_streams,
                               const TolerancePolicy& tol, const IterationCaps& caps) {
  require_finite(h_c, "gsvd_secrecy_precoder.h_c");
  require_finite(h_e, "gsvd_secrecy_precoder.h_e");
  if (!(total_power > 0.0) || n_streams < 1) {
    throw InvalidInputError("gsvd_secrecy_precoder: bad power budget or stream count");
  }
  const Eigen::Index n = h_c.cols();
  if (h_e.cols() != n) {
    throw InvalidInputError("gsvd_secrecy_precoder: channel column mismatch");
  }

  const ComplexMatrix a = h_c.adjoint() * h_c;
  const ComplexMatrix b = h_e.adjoint() * h_e;
  // The ridge keeps the pencil definite for rank-deficient (or absent)
  // eavesdroppers without disturbing the gain-ratio ordering.
  double delta = 1e-9 * (h_e.squaredNorm());
  if (delta <= 0.0) {
    delta = 1e-9 * std::max(1.0, h_c.squaredNorm());
  }
  const HermitianEig pencil = generalized_hermitian_eig(
      a, b + delta * ComplexMatrix::Identity(n, n));

  Eigen::Index selected = 0;
  while (selected < pencil.values.size() && selected < n_streams &&
         pencil.values(selected) > 1.0) {
    ++selected;
  }
  if (selected == 0) {
    Precoder zero;
    zero.basis = ComplexMatrix(n, 0);
    zero.powers = RealVector(0);
    return zero;
  }

  // Ordered orthonormalization: QR keeps each already-orthogonal direction
  // (and the gain-ratio ranking) intact, only straightening later columns
  // against earlier ones.
  const ComplexMatrix directions = pencil.vectors.leftCols(selected);
  Eigen::HouseholderQR<ComplexMatrix> qr(directions);
  ComplexMatrix basis =
      qr.householderQ() * ComplexMatrix::Identity(n, selected);
  apply_phase_convention(basis);
  Precoder out;
  out.basis = std::move(basis);

  ChannelSet wiretap;
  wiretap.comm = h_c;
  wiretap.eve = h_e;
  wiretap.sense = ComplexMatrix::Zero(1, n);
  wiretap.dims.n_t = static_cast<int>(n);
  wiretap.dims.n_c = static_cast<int>(h_c.rows());
  wiretap.dims.n_e = static_cast<int>(h_e.rows());
  wiretap.dims.n_s = 1;
  wiretap.dims.n_streams = static_cast<int>(out.basis.cols());
  OptimizerConfig pcfg;
  pcfg.n_streams = static_cast<int>(out.basis.cols());
  pcfg.total_power = total_power;
  pcfg.w = Weights::from_comm(1.0);
  pcfg.tol = tol;
  pcfg.caps = caps;
  const RealVector uniform = RealVector::Constant(
      out.basis.cols(), total_power / static_cast<double>(out.basis.cols()));
  out.powers = power_allocation(wiretap, out.basis, pcfg, uniform);
  return out;
}

Precoder secrecy_agnostic_precoder(const ChannelSet& ch, const OptimizerConfig& cfg) {
  ChannelSet blind = ch;
  blind.eve = ComplexMatrix::Zero(ch.eve.rows(), ch.eve.cols());
  return solve(blind, cfg).precoder;
}

OperatingPoint sensing_upper_bound(const ComplexMatrix& h_s, double total_power,
                                   int max_streams) {
  require_finite(h_s, "sensing_upper_bound.h_s");
  if (!(total_power > 0.0)) {
    throw InvalidInputError("sensing_upper_bound: total power must be positive");
  }
  const HermitianEig eig = hermitian_eig(h_s.adjoint() * h_s);
  Eigen::Index modes = eig.values.size();
  if (max_streams > 0) modes = std::min<Eigen::Index>(modes, max_streams);
  const RealVector gains = eig.values.head(modes).cwiseMax(0.0);
  OperatingPoint pt;
  pt.label = "sub";
  Precoder pc;
  pc.basis = eig.vectors.leftCols(modes);
  pc.powers = oracle::waterfilling(gains, total_power);
  double rate = 0.0;
  for (Eigen::Index k = 0; k < gains.size(); ++k) {
    rate += std::log2(1.0 + gains(k) * pc.powers(k));
  }
  pt.sensing = rate;
  pt.secrecy = 0.0;
  pt.precoder = std::move(pc);
  return pt;
}

std::vector<OperatingPoint> time_sharing_curve(const OperatingPoint& a,
                                               const OperatingPoint& b, int samples) {
  if (samples < 2) {
    throw InvalidInputError("time_sharing_curve: need at least two samples");
  }
  std::vector<OperatingPoint> curve;
  curve.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double theta = static_cast<double>(i) / static_cast<double>(samples - 1);
    OperatingPoint pt;
    pt.label = "timeshare";
    pt.secrecy = theta * a.secrecy + (1.0 - theta) * b.secrecy;
    pt.sensing = theta * a.sensing + (1.0 - theta) * b.sensing;
    curve.push_back(std::move(pt));
  }
  return curve;
}

}  // namespace mems
