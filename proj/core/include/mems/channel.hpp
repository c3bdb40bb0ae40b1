#pragma once

#include <array>
#include <cstdint>

#include "mems/types.hpp"

namespace mems {

/// Antenna/stream geometry of one experiment instance.
struct SystemDims {
  int n_t = 1;       // transmit antennas
  int n_c = 1;       // legitimate receiver antennas
  int n_e = 1;       // eavesdropper antennas
  int n_s = 1;       // sensing receiver antennas
  int n_streams = 1; // data streams N_s
  int block_len = 1; // channel uses per block T

  void validate() const {
    if (n_t < 1 || n_c < 1 || n_e < 1 || n_s < 1 || n_streams < 1 || block_len < 1 ||
        n_streams > n_t) {
      throw InvalidInputError("SystemDims: counts must be >= 1 and n_streams <= n_t");
    }
  }
};

enum class Link { comm = 0, eve = 1, sense = 2 };
inline constexpr std::array<Link, 3> kAllLinks{Link::comm, Link::eve, Link::sense};

/// The three noise-normalized effective channels. All have n_t columns;
/// `sense` is the Cholesky-style factor whose Gram matrix drives the
/// sensing rate, so only sense^H * sense matters downstream.
struct ChannelSet {
  ComplexMatrix comm;   // H_c, n_c x n_t
  ComplexMatrix eve;    // H_e, n_e x n_t
  ComplexMatrix sense;  // H_s, rows x n_t
  SystemDims dims;

  const ComplexMatrix& link(Link l) const {
    switch (l) {
      case Link::comm: return comm;
      case Link::eve: return eve;
      default: return sense;
    }
  }

  Eigen::Index tx_antennas() const { return comm.cols(); }

  void validate() const;
};

/// i.i.d. CN(0,1) matrix: real and imaginary parts each N(0, 1/2).
/// Deterministic for a given seed, independent of platform.
ComplexMatrix sample_rayleigh(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// Haar-ish random unitary from the QR factor of a Rayleigh sample, with
/// deterministic column phases.
ComplexMatrix random_unitary(Eigen::Index n, std::uint64_t seed);

/// Scale raw channels by their noise levels and fold blocklength and target
/// statistics into the effective sensing factor:
///   H_c = raw_c / sigma_c,  H_e = raw_e / sigma_e,
///   H_s = chol((T / sigma_s^2) * R_sensing).
ChannelSet build_effective_channels(const ComplexMatrix& raw_c, const ComplexMatrix& raw_e,
                                    const ComplexMatrix& r_sensing, double sigma_c,
                                    double sigma_e, double sigma_s, int block_len);

/// Per-label dimensions for a structured channel instance, ordered
/// {n, c, s, e, cs, ce, se, cse} (same order as SubspaceLabel).
using LabelDims = std::array<int, 8>;

/// Builds a channel set whose eight-subspace decomposition has exactly the
/// requested dimensions. The three row spaces are drawn from a common
/// random unitary frame, so every subspace is realized and the direct sum
/// is well conditioned; each channel is a thin product A_i * Q_i^H with a
/// square random mixing factor. Row counts equal each channel's rank
/// (minimum 1; a rank-0 channel gets one zero row).
ChannelSet make_structured_channels(const LabelDims& dims, std::uint64_t seed);

/// Derives a deterministic sub-seed for stream `stream` of trial seed
/// `seed` (splitmix64 over the pair).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mems
