#include <doctest.h>

#include <cmath>

#include "mems/channel.hpp"
#include "mems/numerics.hpp"
#include "mems/oracle.hpp"
#include "mems/precoder.hpp"
#include "mems/rates.hpp"

using namespace mems;

namespace {

ChannelSet random_channels(int n, std::uint64_t seed) {
  ChannelSet ch;
  ch.comm = sample_rayleigh(n, n, seed);
  ch.eve = sample_rayleigh(n, n, seed + 1);
  ch.sense = sample_rayleigh(n, n, seed + 2);
  ch.dims = SystemDims{n, n, n, n, n, 1};
  return ch;
}

ChannelSet zero_channels(int n) {
  ChannelSet ch;
  ch.comm = ComplexMatrix::Zero(n, n);
  ch.eve = ComplexMatrix::Zero(n, n);
  ch.sense = ComplexMatrix::Zero(n, n);
  ch.dims = SystemDims{n, n, n, n, n, 1};
  return ch;
}

OptimizerConfig config(int streams, double power, double w_c) {
  OptimizerConfig cfg;
  cfg.n_streams = streams;
  cfg.total_power = power;
  cfg.w = Weights::from_comm(w_c);
  return cfg;
}

double overlap(const ComplexVector& a, const ComplexVector& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("project_to_simplex clips and renormalizes") {
  RealVector p(3);
  p << 0.2, -0.1, 0.3;
  const RealVector q = project_to_simplex(p, 1.0);
  CHECK(q(0) == doctest::Approx(0.2));
  CHECK(q(1) == 0.0);
  CHECK(q(2) == doctest::Approx(0.3));

  RealVector big(2);
  big << 3.0, 1.0;
  const RealVector r = project_to_simplex(big, 2.0);
  CHECK(r.sum() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.minCoeff() >= 0.0);
  CHECK(r(0) == doctest::Approx(2.0));
  CHECK(r(1) == doctest::Approx(0.0));
}

TEST_CASE("convex_subproblem collapses to zero when only the penalty remains") {
  const ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  RealVector k_e(2), p0(2);
  k_e << 0.5, 0.25;
  p0 << 0.7, 0.1;
  bool ok = false;
  const RealVector p =
      convex_subproblem(zero, zero, k_e, Weights{0.5, 0.5}, 1.0, p0, 1e-6, 500, &ok);
  CHECK(ok);
  CHECK(p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convex_subproblem hits the scalar interior optimum") {
  // w_c = w_s = 0.5 with equal unit matrices gives log2(1 + 2p) - c p,
  // whose interior maximum is p* = 1/(c ln 2) - 1/2.
  ComplexMatrix k(1, 1);
  k(0, 0) = 2.0;
  RealVector k_e(1), p0(1);
  k_e << 0.2;  // c = w_c * k_e = 0.1
  p0 << 1.0;
  const double c = 0.1;
  const double expected = 1.0 / (c * std::numbers::ln2) - 0.5;
  const RealVector p =
      convex_subproblem(k, k, k_e, Weights{0.5, 0.5}, 100.0, p0, 1e-8, 5000);
  CHECK(p(0) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("convex_subproblem matches per-mode bisection on diagonal input") {
  RealVector lc(3), ls(3);
  lc << 2.0, 0.5, 1.0;
  ls << 0.3, 1.5, 0.8;
  const Weights w{0.3, 0.7};
  const double total = 4.0;
  ComplexMatrix k_c = lc.cast<Complex>().asDiagonal();
  ComplexMatrix k_s = ls.cast<Complex>().asDiagonal();
  const RealVector p0 = RealVector::Constant(3, total / 3.0);
  const RealVector p =
      convex_subproblem(k_c, k_s, RealVector::Zero(3), w, total, p0, 1e-9, 20000);

  // Independent route: bisect the water level nu so the per-mode KKT
  // solutions spend the whole budget.
  auto spent = [&](double nu) {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      acc += oracle::generalized_kkt_bisect(lc(i), ls(i), w, nu);
    }
    return acc;
  };
  double lo = 1e-9, hi = 10.0;
  while (spent(hi) > total) hi *= 2.0;
  while (spent(lo) < total) lo /= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (spent(mid) > total ? lo : hi) = mid;
  }
  const double nu = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double expected = oracle::generalized_kkt_bisect(lc(i), ls(i), w, nu);
    CHECK(p(i) == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("gain_update at zero power only reprojects") {
  const ChannelSet ch = random_channels(4, 50);
  GainState st = gain_state_init(ch);
  ComplexVector w1 = sample_rayleigh(4, 1, 51).col(0);
  w1.normalize();
  const GainState next = gain_update(st, w1, 0.0);
  const ComplexMatrix pi_next = st.proj - w1 * w1.adjoint();
  for (Link l : kAllLinks) {
    const ComplexMatrix expected = pi_next * st.gain(l) * pi_next;
    CHECK((next.gain(l) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gain_update chain equals direct residual-covariance recomputation") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const int n = 6, streams = 3;
    const ChannelSet ch = random_channels(n, 60 + seed * 10);
    const ComplexMatrix w = random_unitary(n, 70 + seed).leftCols(streams);
    RealVector p(streams);
    p << 0.7, 1.3, 0.0;

    GainState st = gain_state_init(ch);
    for (int k = 0; k < streams; ++k) {
      st = gain_update(st, w.col(k), p(k));

      const ComplexMatrix wk = w.leftCols(k + 1);
      const ComplexMatrix pi =
          ComplexMatrix::Identity(n, n) - wk * wk.adjoint();
      for (Link l : kAllLinks) {
        const ComplexMatrix& h = ch.link(l);
        const ComplexMatrix t =
            ComplexMatrix::Identity(h.rows(), h.rows()) +
            h * wk * p.head(k + 1).asDiagonal() * wk.adjoint() * h.adjoint();
        const ComplexMatrix direct =
            pi * h.adjoint() * t.partialPivLu().solve(h) * pi;
        CHECK((st.gain(l) - direct).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
}

TEST_CASE("gain_update propagates zero gains") {
  const ChannelSet ch = zero_channels(3);
  GainState st = gain_state_init(ch);
  ComplexVector w1 = ComplexVector::Zero(3);
  w1(0) = 1.0;
  const GainState next = gain_update(st, w1, 2.0);
  for (Link l : kAllLinks) CHECK(next.gain(l).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gain state stays Hermitian, idempotent and projector-confined") {
  const ChannelSet ch = random_channels(5, 85);
  const ComplexMatrix w = random_unitary(5, 86).leftCols(3);
  RealVector p(3);
  p << 1.0, 0.4, 0.0;
  GainState st = gain_state_init(ch);
  for (int k = 0; k < 3; ++k) {
    st = gain_update(st, w.col(k), p(k));
    CHECK((st.proj - st.proj.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((st.proj * st.proj - st.proj).cwiseAbs().maxCoeff() < 1e-8);
    for (Link l : kAllLinks) {
      const ComplexMatrix& g = st.gain(l);
      CHECK((g - g.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((st.proj * g * st.proj - g).cwiseAbs().maxCoeff() < 1e-8);
      const HermitianEig eig = hermitian_eig(g);
      CHECK(eig.values.minCoeff() > -1e-8);
    }
  }
}

TEST_CASE("gain_update rejects directions outside the projector range") {
  const ChannelSet ch = random_channels(3, 80);
  GainState st = gain_state_init(ch);
  ComplexVector e1 = ComplexVector::Zero(3);
  e1(0) = 1.0;
  st = gain_update(st, e1, 1.0);
  CHECK_THROWS_AS(gain_update(st, e1, 1.0), ContractViolationError);
}

TEST_CASE("basis_update solves the secrecy-only generalized eigenproblem") {
  const int n = 5;
  ChannelSet ch = random_channels(n, 90);
  ch.sense = ComplexMatrix::Zero(n, n);
  OptimizerConfig cfg = config(1, 1.0, 1.0);
  RealVector p(1);
  p << 2.5;
  const ComplexMatrix w_prev = random_unitary(n, 91).leftCols(1);
  const ComplexMatrix w = basis_update(ch, p, cfg, w_prev);

  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a_c = eye + p(0) * (ch.comm.adjoint() * ch.comm);
  const ComplexMatrix a_e = eye + p(0) * (ch.eve.adjoint() * ch.eve);
  const HermitianEig pencil = generalized_hermitian_eig(a_c, a_e);
  CHECK(overlap(w.col(0), pencil.vectors.col(0)) > 1.0 - 1e-6);
}

TEST_CASE("basis_update tracks the sensing eigenvector at small power") {
  const int n = 5;
  ChannelSet ch = random_channels(n, 95);
  OptimizerConfig cfg = config(1, 1.0, 0.0);
  // The power iteration contracts like (1 + p l2)/(1 + p l1), so a small
  // stream power needs a generous iteration budget.
  cfg.caps.max_fp = 100000;
  RealVector p(1);
  p << 1e-3;
  const ComplexMatrix w_prev = random_unitary(n, 96).leftCols(1);
  const ComplexMatrix w = basis_update(ch, p, cfg, w_prev);
  const HermitianEig eig = hermitian_eig(ch.sense.adjoint() * ch.sense);
  CHECK(overlap(w.col(0), eig.vectors.col(0)) > 1.0 - 1e-6);
}

TEST_CASE("basis_update returns an orthonormal completion on dead channels") {
  const int n = 4;
  const ChannelSet ch = zero_channels(n);
  OptimizerConfig cfg = config(n, 1.0, 0.5);
  const RealVector p = RealVector::Constant(n, 0.25);
  const ComplexMatrix w = basis_update(ch, p, cfg, random_unitary(n, 97));
  CHECK((w.adjoint() * w - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("basis columns stay orthogonal across streams") {
  const int n = 6;
  const ChannelSet ch = random_channels(n, 98);
  OptimizerConfig cfg = config(4, 2.0, 0.6);
  const RealVector p = RealVector::Constant(4, 0.5);
  BasisStats stats;
  const ComplexMatrix w = basis_update(ch, p, cfg, random_unitary(n, 99).leftCols(4), &stats);
  CHECK((w.adjoint() * w - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
  if (stats.all_converged) {
    CHECK(stats.max_stationarity_residual < 1e-5);
  }
}

TEST_CASE("power_allocation pours everything into a lone useful stream") {
  ChannelSet ch;
  ch.comm = ComplexMatrix::Identity(1, 1);
  ch.sense = ComplexMatrix::Identity(1, 1);
  ch.eve = ComplexMatrix::Zero(1, 1);
  ch.dims = SystemDims{1, 1, 1, 1, 1, 1};
  OptimizerConfig cfg = config(1, 1.0, 0.5);
  RealVector p0(1);
  p0 << 0.2;
  const RealVector p = power_allocation(ch, ComplexMatrix::Identity(1, 1), cfg, p0);
  CHECK(p(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("power_allocation reduces to waterfilling without an eavesdropper") {
  const int n = 4;
  RealVector lam(n);
  lam << 2.0, 1.2, 0.6, 0.1;
  ChannelSet ch;
  ch.comm = ComplexMatrix::Zero(n, n);
  ch.eve = ComplexMatrix::Zero(n, n);
  ch.sense = lam.cwiseSqrt().cast<Complex>().asDiagonal();
  ch.dims = SystemDims{n, n, n, n, n, 1};
  OptimizerConfig cfg = config(n, 3.0, 0.0);
  const RealVector p = power_allocation(ch, ComplexMatrix::Identity(n, n), cfg,
                                        RealVector::Constant(n, 3.0 / n));
  const RealVector expected = oracle::waterfilling(lam, 3.0);
  CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("power_allocation is stationary at zero for identical channels") {
  const int n = 3;
  ChannelSet ch = random_channels(n, 110);
  ch.eve = ch.comm;
  ch.sense = ComplexMatrix::Zero(n, n);
  OptimizerConfig cfg = config(n, 2.0, 1.0);
  PowerStats stats;
  const RealVector p = power_allocation(ch, random_unitary(n, 111), cfg,
                                        RealVector::Zero(n), &stats);
  CHECK(p.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.converged);
}

TEST_CASE("power_allocation improves the true objective monotonically") {
  for (std::uint64_t seed : {7u, 8u}) {
    const int n = 5, streams = 3;
    const ChannelSet ch = random_channels(n, 120 + seed);
    const ComplexMatrix w = random_unitary(n, 130 + seed).leftCols(streams);
    OptimizerConfig cfg = config(streams, 4.0, 0.5);
    PowerStats stats;
    power_allocation(ch, w, cfg, RealVector::Constant(streams, 4.0 / streams), &stats);
    REQUIRE(stats.iterates.size() >= 2);
    double prev = -1e300;
    for (const RealVector& p : stats.iterates) {
      const double obj =
          weighted_objective(ch, w * p.cwiseSqrt().asDiagonal(), cfg.w, false);
      CHECK(obj >= prev - 1e-9);
      prev = obj;
      CHECK(p.minCoeff() >= -1e-12);
      CHECK(p.sum() <= cfg.total_power * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("solve reaches single-channel capacity under a sensing-only weight") {
  const int n = 4;
  const ChannelSet ch = random_channels(n, 140);
  OptimizerConfig cfg = config(n, 5.0, 0.0);
  const SolveResult res = solve(ch, cfg);
  const HermitianEig eig = hermitian_eig(ch.sense.adjoint() * ch.sense);
  const RealVector wf = oracle::waterfilling(eig.values.cwiseMax(0.0), 5.0);
  double capacity = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) capacity += std::log2(1.0 + eig.values(k) * wf(k));
  CHECK(res.objective_trace.back() == doctest::Approx(capacity).epsilon(1e-4));
}

TEST_CASE("solve concentrates power at deep low SNR") {
  const int n = 6;
  const ChannelSet ch = random_channels(n, 150);
  OptimizerConfig cfg = config(2, 1e-4, 0.5);
  const SolveResult res = solve(ch, cfg);
  const RealVector& p = res.precoder.powers;
  const double pmax = p.maxCoeff();
  REQUIRE(pmax > 0.0);
  Eigen::Index arg = 0;
  p.maxCoeff(&arg);
  CHECK(p.minCoeff() / pmax < 0.05);
  const HermitianEig eig = hermitian_eig(composite_gain(ch, cfg.w));
  CHECK(overlap(res.precoder.basis.col(arg), eig.vectors.col(0)) > 0.99);
}

TEST_CASE("solve on dead channels converges immediately to zero") {
  const ChannelSet ch = zero_channels(3);
  OptimizerConfig cfg = config(2, 1.0, 0.5);
  const SolveResult res = solve(ch, cfg);
  CHECK(res.converged);
  CHECK(res.outer_iters == 1);
  CHECK(res.objective_trace.back() == 0.0);
}

TEST_CASE("solve keeps its trace nondecreasing and its output feasible") {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    const int n = 6;
    const ChannelSet ch = random_channels(n, 200 + seed);
    OptimizerConfig cfg = config(3, 8.0, 0.7);
    const SolveResult res = solve(ch, cfg);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
      CHECK(res.objective_trace[i] >= res.objective_trace[i - 1] - 1e-7);
    }
    const ComplexMatrix& w = res.precoder.basis;
    CHECK((w.adjoint() * w - ComplexMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(res.precoder.powers.minCoeff() >= -1e-12);
    CHECK(res.precoder.powers.sum() <= cfg.total_power * (1.0 + 1e-9));
  }
}

TEST_CASE("solve accepts a caller-provided seed basis") {
  const int n = 4;
  const ChannelSet ch = random_channels(n, 240);
  OptimizerConfig cfg = config(2, 2.0, 0.5);
  cfg.seed_basis = random_unitary(n, 241).leftCols(2);
  const SolveResult res = solve(ch, cfg);
  CHECK(std::isfinite(res.objective_trace.back()));
}

TEST_CASE("low_snr_precoder picks the dominant direction") {
  ChannelSet ch;
  ComplexMatrix hc = ComplexMatrix::Zero(2, 2);
  hc(0, 0) = 2.0;
  hc(1, 1) = 1.0;
  ch.comm = hc;
  ch.eve = ComplexMatrix::Zero(2, 2);
  ch.sense = ComplexMatrix::Zero(2, 2);
  ch.dims = SystemDims{2, 2, 2, 2, 1, 1};
  const LowSnrSolution sol = low_snr_precoder(ch, Weights{1.0, 0.0}, 3.0);
  CHECK_FALSE(sol.degenerate);
  CHECK(std::abs(sol.precoder.basis(0, 0) - Complex(1.0, 0.0)) < 1e-12);
  CHECK(sol.precoder.powers(0) == 3.0);
}

TEST_CASE("low_snr_precoder flags a hopeless composite matrix") {
  ChannelSet ch;
  ch.comm = ComplexMatrix::Zero(2, 2);
  ch.eve = ComplexMatrix::Identity(2, 2);
  ch.sense = ComplexMatrix::Zero(2, 2);
  ch.dims = SystemDims{2, 2, 2, 2, 1, 1};
  const LowSnrSolution sol = low_snr_precoder(ch, Weights{1.0, 0.0}, 1.0);
  CHECK(sol.degenerate);
  CHECK(sol.precoder.powers(0) == 0.0);
}

TEST_CASE("low_snr_precoder beats a random direction search") {
  const int n = 4;
  const ChannelSet ch = random_channels(n, 250);
  const Weights w{0.5, 0.5};
  const ComplexMatrix m = composite_gain(ch, w);
  const LowSnrSolution sol = low_snr_precoder(ch, w, 1.0);
  const double star = std::real(
      (sol.precoder.basis.col(0).adjoint() * m * sol.precoder.basis.col(0))(0, 0));
  const ComplexMatrix samples = sample_rayleigh(n, 10000, 251);
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    ComplexVector f = samples.col(j);
    f.normalize();
    CHECK(std::real((f.adjoint() * m * f)(0, 0)) <= star + 1e-9);
  }
}
