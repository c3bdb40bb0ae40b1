#include "mems/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "mems/rates.hpp"

namespace mems {
namespace oracle {

RealVector waterfilling(const RealVector& gains, double total_power) {
  if (!(total_power > 0.0)) {
    throw InvalidInputError("waterfilling: total power must be positive");
  }
  if (!gains.allFinite() || (gains.size() && gains.minCoeff() < 0.0)) {
    throw InvalidInputError("waterfilling: gains must be finite and nonnegative");
  }
  const Eigen::Index n = gains.size();
  RealVector p = RealVector::Zero(n);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return gains(a) > gains(b); });

  // Largest active set whose common water level clears every inverse gain.
  double inv_sum = 0.0;
  double mu = 0.0;
  int active = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = gains(order[static_cast<std::size_t>(i)]);
    if (lam <= 0.0) break;
    const double trial_inv = inv_sum + 1.0 / lam;
    const double trial_mu = (total_power + trial_inv) / static_cast<double>(i + 1);
    if (trial_mu <= 1.0 / lam) break;
    inv_sum = trial_inv;
    mu = trial_mu;
    active = static_cast<int>(i) + 1;
  }
  for (int i = 0; i < active; ++i) {
    const Eigen::Index k = order[static_cast<std::size_t>(i)];
    p(k) = std::max(0.0, mu - 1.0 / gains(k));
  }
  return p;
}

namespace {

double rank1_objective(const ChannelSet& ch, const Weights& w, const ComplexVector& f,
                       double total_power) {
  const ComplexMatrix precoder = std::sqrt(total_power) * f;
  return weighted_objective(ch, precoder, w, /*clamp=*/false);
}

// Van der Corput radical inverse, the building block of the Halton grid
// used at n_t = 3.
double radical_inverse(long i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double x = 0.0;
  while (i > 0) {
    x += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return x;
}

}  // namespace

Rank1SearchResult grid_search_rank1(const ChannelSet& ch, const Weights& w,
                                    double total_power, long grid) {
  ch.validate();
  w.validate();
  const Eigen::Index n = ch.tx_antennas();
  if (n != 2 && n != 3) {
    throw InvalidInputError("grid_search_rank1: only n_t in {2, 3} is supported");
  }
  if (grid < 10000) {
    throw InvalidInputError("grid_search_rank1: need at least 10^4 grid points");
  }

  Rank1SearchResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  const double two_pi = 2.0 * std::numbers::pi;

  if (n == 2) {
    // f = (cos a, sin a e^{i phi}) up to global phase.
    const long n_a = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(grid))));
    const long n_phi = (grid + n_a - 1) / n_a;
    for (long ia = 0; ia < n_a; ++ia) {
      const double a = (std::numbers::pi / 2.0) * static_cast<double>(ia) /
                       static_cast<double>(n_a - 1);
      for (long ip = 0; ip < n_phi; ++ip) {
        const double phi = two_pi * static_cast<double>(ip) / static_cast<double>(n_phi);
        ComplexVector f(2);
        f << Complex(std::cos(a), 0.0),
            Complex(std::sin(a) * std::cos(phi), std::sin(a) * std::sin(phi));
        const double val = rank1_objective(ch, w, f, total_power);
        if (val > best.objective) {
          best.objective = val;
          best.direction = f;
        }
      }
    }
  } else {
    // Halton points mapped to magnitudes (two angles) and two phases, with
    // the first coordinate pinned real.
    for (long i = 0; i < grid; ++i) {
      const double u1 = radical_inverse(i + 1, 2);
      const double u2 = radical_inverse(i + 1, 3);
      const double u3 = radical_inverse(i + 1, 5);
      const double u4 = radical_inverse(i + 1, 7);
      const double alpha = std::acos(std::clamp(1.0 - 2.0 * u1, -1.0, 1.0)) / 2.0;
      const double beta = (std::numbers::pi / 2.0) * u2;
      const double phi2 = two_pi * u3;
      const double phi3 = two_pi * u4;
      ComplexVector f(3);
      f << Complex(std::cos(alpha), 0.0),
          std::sin(alpha) * std::cos(beta) * Complex(std::cos(phi2), std::sin(phi2)),
          std::sin(alpha) * std::sin(beta) * Complex(std::cos(phi3), std::sin(phi3));
      const double val = rank1_objective(ch, w, f, total_power);
      if (val > best.objective) {
        best.objective = val;
        best.direction = f;
      }
    }
  }
  return best;
}

double generalized_kkt_bisect(double lambda_c, double lambda_s, const Weights& w,
                              double nu) {
  w.validate();
  if (!(nu > 0.0) || !(lambda_c >= 0.0) || !(lambda_s >= 0.0)) {
    throw InvalidInputError("generalized_kkt_bisect: need nu > 0 and nonnegative gains");
  }
  auto lhs = [&](double p) {
    return w.comm * lambda_c / (1.0 + lambda_c * p) + w.sense * lambda_s / (1.0 + lambda_s * p);
  };
  if (lhs(0.0) <= nu) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (lhs(hi) > nu) {
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (lhs(mid) > nu) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
}  // namespace mems
