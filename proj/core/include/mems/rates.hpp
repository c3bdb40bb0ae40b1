#pragma once

#include "mems/channel.hpp"
#include "mems/types.hpp"

namespace mems {

/// log2 det(I + F^H H^H H F) in bits per channel use, evaluated from the
/// eigenvalues of the N_s x N_s Hermitian Gram matrix. Nonnegative; zero
/// for an empty or zero precoder.
double link_rate(const ComplexMatrix& h, const ComplexMatrix& f);

/// [R_c - R_e]^+ for the given precoding matrix.
double secrecy_rate(const ComplexMatrix& h_c, const ComplexMatrix& h_e,
                    const ComplexMatrix& f);

/// Weighted secrecy + sensing objective. With clamp the secrecy part is
/// [R_c - R_e]^+ (the reported value); without it the raw difference is
/// used, which is what the optimizer ascends.
double weighted_objective(const ChannelSet& ch, const ComplexMatrix& f,
                          const Weights& w, bool clamp);

/// Net marginal gain of each sequentially added stream: entry n is the
/// weighted contribution of basis column n given the first n-1 streams,
/// and the entries sum to the unclamped weighted objective.
RealVector marginal_gains(const ChannelSet& ch, const ComplexMatrix& basis,
                          const RealVector& powers, const Weights& w);

}  // namespace mems
