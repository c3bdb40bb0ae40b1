#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mems/channel.hpp"
#include "mems/oracle.hpp"
#include "mems/rates.hpp"

using namespace mems;

namespace {

ChannelSet diag_channels(const RealVector& c, const RealVector& e, const RealVector& s) {
  ChannelSet ch;
  const auto n = c.size();
  ch.comm = c.cast<Complex>().asDiagonal();
  ch.eve = e.cast<Complex>().asDiagonal();
  ch.sense = s.cast<Complex>().asDiagonal();
  ch.dims = SystemDims{static_cast<int>(n), static_cast<int>(n), static_cast<int>(n),
                       static_cast<int>(n), 1, 1};
  return ch;
}

}  // namespace

TEST_CASE("waterfilling splits power evenly over equal gains") {
  RealVector lam(2);
  lam << 1.0, 1.0;
  const RealVector p = oracle::waterfilling(lam, 2.0);
  CHECK(p(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("waterfilling keeps weak modes dry at low budget") {
  RealVector lam(2);
  lam << 4.0, 1.0;
  const RealVector p = oracle::waterfilling(lam, 0.1);
  CHECK(p(0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p(1) == 0.0);
}

TEST_CASE("waterfilling single mode takes the whole budget") {
  RealVector lam(1);
  lam << 2.0;
  const RealVector p = oracle::waterfilling(lam, 3.0);
  CHECK(p(0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("waterfilling meets the budget exactly and is slack-free") {
  RealVector lam(5);
  lam << 3.0, 0.5, 0.0, 2.2, 1e-3;
  const RealVector p = oracle::waterfilling(lam, 7.5);
  CHECK(std::abs(p.sum() - 7.5) < 1e-10);
  CHECK(p.minCoeff() >= 0.0);
  CHECK(p(2) == 0.0);
  // complementary slackness: a powered mode sits strictly above its floor
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (p(k) > 0.0) CHECK(lam(k) * p(k) > 0.0);
  }
}

TEST_CASE("waterfilling of all-zero gains is all-zero power") {
  const RealVector p = oracle::waterfilling(RealVector::Zero(3), 1.0);
  CHECK(p.isZero(0.0));
}

TEST_CASE("kkt bisection returns zero beyond the support threshold") {
  const Weights w{0.4, 0.6};
  const double nu = w.comm * 2.0 + w.sense * 3.0 + 0.1;
  CHECK(oracle::generalized_kkt_bisect(2.0, 3.0, w, nu) == 0.0);
}

TEST_CASE("kkt bisection collapses to the scalar closed form for equal gains") {
  const Weights w{0.5, 0.5};
  // lhs = 1/(1+p), so p = 1/nu - 1
  const double p = oracle::generalized_kkt_bisect(1.0, 1.0, w, 0.25);
  CHECK(p == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("kkt bisection cross-checks waterfilling in the single-channel limit") {
  const Weights w{0.0, 1.0};
  const double lam = 2.5;
  const double nu = 0.4;
  const double p = oracle::generalized_kkt_bisect(0.0, lam, w, nu);
  // Stationarity: w_s lam / (1 + lam p) = nu.
  CHECK(w.sense * lam / (1.0 + lam * p) == doctest::Approx(nu).epsilon(1e-9));
  // Same point through the waterfilling oracle with the implied budget.
  const RealVector wf = oracle::waterfilling(RealVector::Constant(1, lam), p);
  CHECK(wf(0) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("rank-1 grid search finds the dominant direction at n_t = 2") {
  RealVector c(2), z(2);
  c << 2.0, 0.0;
  z << 0.0, 0.0;
  const ChannelSet ch = diag_channels(c, z, z);
  const double total_power = 1.0;
  const auto res = oracle::grid_search_rank1(ch, Weights{1.0, 0.0}, total_power, 10000);
  CHECK(std::abs(res.direction(0)) > std::cos(2.0 * std::numbers::pi / 180.0));
  CHECK(res.objective == doctest::Approx(std::log2(1.0 + 4.0 * total_power)).epsilon(1e-3));
}

TEST_CASE("rank-1 grid search is flat on isotropic instances") {
  RealVector one(2), z(2);
  one << 1.0, 1.0;
  z << 0.0, 0.0;
  const ChannelSet ch = diag_channels(one, z, one);
  const auto res = oracle::grid_search_rank1(ch, Weights{0.5, 0.5}, 3.0, 10000);
  CHECK(std::abs(res.objective - std::log2(1.0 + 3.0)) < 1e-9);
}

TEST_CASE("rank-1 grid search is deterministic") {
  const ChannelSet ch = [] {
    ChannelSet c;
    c.comm = sample_rayleigh(2, 2, 5);
    c.eve = sample_rayleigh(2, 2, 6);
    c.sense = sample_rayleigh(2, 2, 7);
    c.dims = SystemDims{2, 2, 2, 2, 1, 1};
    return c;
  }();
  const auto a = oracle::grid_search_rank1(ch, Weights{0.5, 0.5}, 2.0, 12000);
  const auto b = oracle::grid_search_rank1(ch, Weights{0.5, 0.5}, 2.0, 12000);
  CHECK(a.objective == b.objective);
  CHECK((a.direction - b.direction).norm() == 0.0);
}

TEST_CASE("rank-1 grid search covers n_t = 3 with a low-discrepancy sweep") {
  RealVector c(3), z(3);
  c << 2.0, 0.0, 0.0;
  z << 0.0, 0.0, 0.0;
  const ChannelSet ch = diag_channels(c, z, z);
  const auto res = oracle::grid_search_rank1(ch, Weights{1.0, 0.0}, 1.0, 50000);
  CHECK(std::abs(res.direction(0)) > 0.98);
  CHECK(res.objective == doctest::Approx(std::log2(5.0)).epsilon(2e-2));
}
