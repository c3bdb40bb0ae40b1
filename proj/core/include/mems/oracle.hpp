#pragma once

#include "mems/channel.hpp"
#include "mems/types.hpp"

namespace mems {
namespace oracle {

/// Closed-form waterfilling over parallel gains: p_k = [mu - 1/lambda_k]^+
/// with mu from the sorted-threshold rule so the budget is met exactly.
/// Zero-gain modes receive zero power; an all-zero gain vector yields p = 0.
RealVector waterfilling(const RealVector& gains, double total_power);

struct Rank1SearchResult {
  ComplexVector direction;  // unit vector
  double objective = 0.0;   // unclamped weighted objective at full power
};

/// Deterministic brute-force sweep of rank-one precoders f * sqrt(P) over a
/// quasi-uniform grid of the complex unit sphere. Supports n_t in {2, 3}.
Rank1SearchResult grid_search_rank1(const ChannelSet& ch, const Weights& w,
                                    double total_power, long grid);

/// Unique p >= 0 with w_c l_c/(1 + l_c p) + w_s l_s/(1 + l_s p) = nu,
/// found by bisection; returns 0 when even p = 0 undershoots nu.
double generalized_kkt_bisect(double lambda_c, double lambda_s, const Weights& w,
                              double nu);

}  // namespace oracle
}  // namespace mems
