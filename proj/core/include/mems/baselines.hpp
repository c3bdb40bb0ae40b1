#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mems/channel.hpp"
#include "mems/precoder.hpp"
#include "mems/types.hpp"

namespace mems {

/// One evaluated point in the (secrecy rate, sensing rate) plane.
struct OperatingPoint {
  double secrecy = 0.0;
  double sensing = 0.0;
  std::string label;
  std::optional<Precoder> precoder;
};

/// Wiretap-only baseline: directions ranked by the ridge-regularized pencil
/// (H_c^H H_c, H_e^H H_e + delta I), keeping up to n_streams secrecy-positive
/// modes (generalized eigenvalue > 1) and re-optimizing power on the
/// order-preserving orthonormalization of the selection with w = (1, 0).
/// Returns an empty zero-power precoder when no mode clears the threshold.
Precoder gsvd_secrecy_precoder(const ComplexMatrix& h_c, const ComplexMatrix& h_e,
                               double total_power, int n_streams,
                               const TolerancePolicy& tol = {},
                               const IterationCaps& caps = {});

/// Trade-off baseline that cannot see the eavesdropper: the two-stage
/// solver run with H_e zeroed out; callers evaluate the result against the
/// true channels.
Precoder secrecy_agnostic_precoder(const ChannelSet& ch, const OptimizerConfig& cfg);

/// Sensing-only operating point: eigenmodes of H_s^H H_s with waterfilling.
/// A positive max_streams caps the fill to the strongest modes, matching an
/// experiment where every precoder carries at most N_s streams; 0 uses all.
OperatingPoint sensing_upper_bound(const ComplexMatrix& h_s, double total_power,
                                   int max_streams = 0);

/// Convex combinations theta * a + (1 - theta) * b in the rate plane,
/// theta on a uniform grid with `samples` points (endpoints included).
std::vector<OperatingPoint> time_sharing_curve(const OperatingPoint& a,
                                               const OperatingPoint& b, int samples);

}  // namespace mems
