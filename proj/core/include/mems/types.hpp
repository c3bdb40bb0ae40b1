#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "mems/errors.hpp"

namespace mems {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Tolerances that govern every rank decision and iterative stopping rule.
struct TolerancePolicy {
  /// Relative singular-value threshold: sigma counts toward the rank when
  /// sigma > rank_rel_tol * sigma_max * max(rows, cols).
  double rank_rel_tol = 1e-10;
  /// Cauchy tolerance for the fixed-point basis iteration.
  double fp_tol = 1e-8;
  /// Step-size tolerance for the power-allocation SCA loop.
  double sca_tol = 1e-6;
  /// Objective-change tolerance (bits) for the outer alternation.
  double outer_tol = 1e-5;

  void validate() const {
    if (!(rank_rel_tol > 0.0) || !(rank_rel_tol < 1.0) || !(fp_tol > 0.0) ||
        !(sca_tol > 0.0) || !(outer_tol > 0.0)) {
      throw InvalidInputError("TolerancePolicy: tolerances must be strictly positive, rank_rel_tol < 1");
    }
  }
};

/// Trade-off weights for the secrecy and sensing objectives, w_c + w_s = 1.
struct Weights {
  double comm = 0.5;   // w_c
  double sense = 0.5;  // w_s

  static Weights from_comm(double w_c) { return Weights{w_c, 1.0 - w_c}; }

  void validate() const {
    if (!(comm >= 0.0) || !(sense >= 0.0) || std::abs(comm + sense - 1.0) > 1e-12) {
      throw InvalidInputError("Weights: need w_c >= 0, w_s >= 0, w_c + w_s = 1");
    }
  }
};

/// Semi-unitary precoding basis plus per-stream powers; the transmit
/// matrix is basis * diag(sqrt(powers)).
struct Precoder {
  ComplexMatrix basis;  // n_t x N_s, orthonormal columns
  RealVector powers;    // length N_s, nonnegative

  Eigen::Index streams() const { return basis.cols(); }

  /// F = W P^{1/2}
  ComplexMatrix matrix() const {
    return basis * powers.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  double total_power() const { return powers.size() ? powers.sum() : 0.0; }
};

}  // namespace mems
