#include "mems/precoder.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mems/numerics.hpp"
#include "mems/rates.hpp"

namespace mems {

namespace {

constexpr double kLog2e = 1.4426950408889634;  // 1/ln(2)
constexpr double kRangeCut = 0.5;              // eigenvalue split for range(Pi)
constexpr double kInRangeTol = 1e-8;
constexpr double kWarmStartFloor = 1e-12;

ComplexMatrix hermitize(const ComplexMatrix& m) {
  return Complex(0.5, 0.0) * (m + m.adjoint());
}

void pin_phase(ComplexVector& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best) {
      best = a;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  v *= std::conj(v(imax)) / best;
  v(imax) = Complex(std::abs(v(imax)), 0.0);
}

// log2 det(I + K diag(p)) through the Hermitian congruence
// I + D^{1/2} K D^{1/2}, which stays positive definite for p >= 0.
double logdet2(const ComplexMatrix& k, const RealVector& p) {
  const Eigen::Index n = p.size();
  const RealVector root = p.cwiseMax(0.0).cwiseSqrt();
  ComplexMatrix s = ComplexMatrix::Identity(n, n);
  s += root.asDiagonal() * k * root.asDiagonal();
  Eigen::LLT<ComplexMatrix> llt(hermitize(s));
  double acc = 0.0;
  const ComplexMatrix l = llt.matrixL();
  for (Eigen::Index i = 0; i < n; ++i) acc += std::log(std::abs(l(i, i)));
  return 2.0 * acc * kLog2e;
}

// d/dp_k log2 det(I + K diag(p)) = (1/ln2) Re[(I + K diag(p))^{-1} K]_{kk}.
RealVector logdet2_grad(const ComplexMatrix& k, const RealVector& p) {
  const Eigen::Index n = p.size();
  ComplexMatrix m = ComplexMatrix::Identity(n, n) + k * p.asDiagonal();
  const ComplexMatrix x = m.partialPivLu().solve(k);
  RealVector g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = std::real(x(i, i)) * kLog2e;
  return g;
}

ComplexMatrix gram(const ComplexMatrix& h, const ComplexMatrix& basis) {
  const ComplexMatrix hb = h * basis;
  return hermitize(hb.adjoint() * hb);
}

}  // namespace

RealVector project_to_simplex(const RealVector& p, double total_power) {
  RealVector clipped = p.cwiseMax(0.0);
  if (clipped.sum() <= total_power) return clipped;
  // Euclidean projection onto the equality simplex via the sorted
  // threshold rule.
  std::vector<double> u(p.data(), p.data() + p.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    css += u[j];
    const double t = (css - total_power) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) tau = t;
  }
  return (p.array() - tau).cwiseMax(0.0);
}

double simplex_kkt_residual(const RealVector& grad, const RealVector& p, double total_power,
                            double* nu) {
  constexpr double kActive = 1e-10;
  const bool slack = p.sum() < total_power - 1e-9 * std::max(1.0, total_power);
  double nu_val = 0.0;
  if (!slack) {
    double acc = 0.0;
    int count = 0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if (p(k) > kActive) {
        acc += grad(k);
        ++count;
      }
    }
    if (count > 0) nu_val = std::max(0.0, acc / count);
  }
  double resid = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (p(k) > kActive) {
      resid = std::max(resid, std::abs(grad(k) - nu_val));
    } else {
      resid = std::max(resid, std::max(0.0, grad(k) - nu_val));
    }
  }
  if (nu) *nu = nu_val;
  return resid / std::max(1.0, std::abs(nu_val));
}

RealVector convex_subproblem(const ComplexMatrix& k_c, const ComplexMatrix& k_s,
                             const RealVector& k_e_grad, const Weights& w, double total_power,
                             const RealVector& p_init, double kkt_tol, int max_pg,
                             bool* converged) {
  w.validate();
  if (!(total_power > 0.0) || !(kkt_tol > 0.0) || max_pg < 1) {
    throw InvalidInputError("convex_subproblem: bad configuration");
  }
  if (!p_init.allFinite() || !k_e_grad.allFinite()) {
    throw InvalidInputError("convex_subproblem: non-finite input");
  }

  auto phi = [&](const RealVector& p) {
    return w.comm * logdet2(k_c, p) + w.sense * logdet2(k_s, p) - w.comm * k_e_grad.dot(p);
  };
  auto phi_grad = [&](const RealVector& p) -> RealVector {
    return (w.comm * logdet2_grad(k_c, p) + w.sense * logdet2_grad(k_s, p) -
            w.comm * k_e_grad)
        .eval();
  };

  RealVector p = project_to_simplex(p_init, total_power);
  double fval = phi(p);
  RealVector best_p = p;
  double best_f = fval;
  bool ok = true;

  RealVector g = phi_grad(p);
  double step = std::max(1.0, total_power) / std::max(1.0, g.cwiseAbs().maxCoeff());
  RealVector p_prev = p;
  RealVector g_prev = g;
  bool have_history = false;

  for (int it = 0; it < max_pg; ++it) {
    if (simplex_kkt_residual(g, p, total_power) < kkt_tol) break;

    if (have_history) {
      const RealVector s = p - p_prev;
      const RealVector y = g - g_prev;
      const double sy = -s.dot(y);  // >= 0 for a concave objective
      const double ss = s.dot(s);
      if (sy > 1e-300 && ss > 0.0) {
        step = std::clamp(ss / sy, 1e-12 * std::max(1.0, total_power), 1e12);
      }
    }

    double t = step;
    bool accepted = false;
    RealVector p_try;
    double f_try = 0.0;
    for (int halvings = 0; halvings <= 60; ++halvings) {
      p_try = project_to_simplex(p + t * g, total_power);
      const double ascent = g.dot(p_try - p);
      if (ascent <= 0.0) {
        // Projection did not move us along the gradient; the point is
        // stationary for any smaller step as well.
        break;
      }
      f_try = phi(p_try);
      if (f_try >= fval + 1e-4 * ascent) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if ((p_try - p).norm() == 0.0) break;  // stationary point of the projection map
      ok = false;
      break;
    }

    p_prev = p;
    g_prev = g;
    p = p_try;
    fval = f_try;
    g = phi_grad(p);
    have_history = true;
    if (fval > best_f) {
      best_f = fval;
      best_p = p;
    }
  }

  if (fval >= best_f) {
    best_f = fval;
    best_p = p;
  }
  if (converged) {
    *converged = ok && simplex_kkt_residual(phi_grad(best_p), best_p, total_power) < kkt_tol;
  }
  return best_p;
}

GainState gain_state_init(const ChannelSet& ch) {
  ch.validate();
  const Eigen::Index n = ch.tx_antennas();
  GainState st;
  st.proj = ComplexMatrix::Identity(n, n);
  for (Link l : kAllLinks) {
    const ComplexMatrix& h = ch.link(l);
    st.gains[static_cast<std::size_t>(l)] = hermitize(h.adjoint() * h);
  }
  return st;
}

GainState gain_update(const GainState& state, const ComplexVector& w_n, double p_n) {
  if (!std::isfinite(p_n) || p_n < 0.0) {
    throw InvalidInputError("gain_update: stream power must be finite and nonnegative");
  }
  const double in_range = (state.proj * w_n - w_n).norm();
  if (in_range > kInRangeTol) {
    throw ContractViolationError("gain_update: direction lies outside the projector range");
  }
  GainState next;
  next.proj = hermitize(state.proj - w_n * w_n.adjoint());
  for (std::size_t i = 0; i < state.gains.size(); ++i) {
    const ComplexMatrix& g = state.gains[i];
    ComplexMatrix updated = g;
    if (p_n > 0.0) {
      const ComplexVector gw = g * w_n;
      const double quad = std::max(0.0, std::real(w_n.dot(gw)));
      // 1/(1/p + q) written as p/(1 + p q); the p = 0 limit drops the
      // correction entirely.
      updated -= (p_n / (1.0 + p_n * quad)) * (gw * gw.adjoint());
    }
    next.gains[i] = hermitize(next.proj * updated * next.proj);
  }
  return next;
}

ComplexMatrix basis_update(const ChannelSet& ch, const RealVector& powers,
                           const OptimizerConfig& cfg, const ComplexMatrix& basis_prev,
                           BasisStats* stats) {
  ch.validate();
  const Eigen::Index n = ch.tx_antennas();
  cfg.validate(n);
  const Eigen::Index n_streams = cfg.n_streams;
  if (powers.size() != n_streams || !powers.allFinite() ||
      (powers.size() && powers.minCoeff() < 0.0)) {
    throw InvalidInputError("basis_update: powers must be nonnegative, one per stream");
  }
  if (basis_prev.rows() != n || basis_prev.cols() != n_streams) {
    throw InvalidInputError("basis_update: previous basis has wrong shape");
  }

  BasisStats local;
  GainState state = gain_state_init(ch);
  ComplexMatrix basis(n, n_streams);

  for (Eigen::Index sn = 0; sn < n_streams; ++sn) {
    const double p_n = powers(sn);
    const ComplexMatrix a_c = state.proj + p_n * state.gain(Link::comm);
    const ComplexMatrix a_s = state.proj + p_n * state.gain(Link::sense);
    const ComplexMatrix a_e = state.proj + p_n * state.gain(Link::eve);

    // One factorization per stream: A_e and Pi share eigenvectors split by
    // the range of Pi, so C(f)^dagger reduces to eigenvalue scaling.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a_e);
    const RealVector evals = es.eigenvalues();
    const ComplexMatrix& evecs = es.eigenvectors();

    ComplexVector f = state.proj * basis_prev.col(sn);
    if (f.norm() < kWarmStartFloor) {
      ++local.warm_start_fallbacks;
      const ComplexMatrix m = cfg.w.comm * state.gain(Link::comm) -
                              cfg.w.comm * state.gain(Link::eve) +
                              cfg.w.sense * state.gain(Link::sense);
      const HermitianEig me = hermitian_eig(m);
      f = state.proj * me.vectors.col(0);
      if (f.norm() < kWarmStartFloor) {
        // Channels carry no preference; take the dominant in-range direction.
        for (Eigen::Index j = evals.size() - 1; j >= 0; --j) {
          if (evals(j) > kRangeCut) {
            f = evecs.col(j);
            break;
          }
        }
      }
    }
    f.normalize();
    pin_phase(f);

    bool stream_converged = false;
    for (int it = 0; it < cfg.caps.max_fp; ++it) {
      const ComplexVector t_c = a_c * f;
      const ComplexVector t_s = a_s * f;
      const ComplexVector t_e = a_e * f;
      const ComplexVector t_pi = state.proj * f;
      const double q_c = std::max(std::real(f.dot(t_c)), 1e-300);
      const double q_s = std::max(std::real(f.dot(t_s)), 1e-300);
      const double q_e = std::max(std::real(f.dot(t_e)), 1e-300);
      const double q_pi = std::max(std::real(f.dot(t_pi)), 1e-300);

      const ComplexVector bf = (cfg.w.comm / q_c) * t_c + (cfg.w.sense / q_s) * t_s;
      ComplexVector z = evecs.adjoint() * bf;
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (evals(j) > kRangeCut) {
          z(j) /= cfg.w.comm * evals(j) / q_e + cfg.w.sense / q_pi;
        } else {
          z(j) = Complex(0.0, 0.0);
        }
      }
      ComplexVector f_next = evecs * z;
      const double nrm = f_next.norm();
      if (nrm < 1e-300) break;
      f_next /= nrm;
      pin_phase(f_next);
      const double diff = (f_next - f).norm();
      f = f_next;
      ++local.fp_iters;
      if (diff < cfg.tol.fp_tol) {
        stream_converged = true;
        break;
      }
    }
    if (!stream_converged) local.all_converged = false;

    // Stationarity residual ||(B - C) f|| / ||B f|| at the accepted vector.
    {
      const ComplexVector t_c = a_c * f;
      const ComplexVector t_s = a_s * f;
      const ComplexVector t_e = a_e * f;
      const ComplexVector t_pi = state.proj * f;
      const double q_c = std::max(std::real(f.dot(t_c)), 1e-300);
      const double q_s = std::max(std::real(f.dot(t_s)), 1e-300);
      const double q_e = std::max(std::real(f.dot(t_e)), 1e-300);
      const double q_pi = std::max(std::real(f.dot(t_pi)), 1e-300);
      const ComplexVector bf = (cfg.w.comm / q_c) * t_c + (cfg.w.sense / q_s) * t_s;
      const ComplexVector cf = (cfg.w.comm / q_e) * t_e + (cfg.w.sense / q_pi) * t_pi;
      const double bn = bf.norm();
      if (bn > 0.0) {
        local.max_stationarity_residual =
            std::max(local.max_stationarity_residual, (state.proj * (bf - cf)).norm() / bn);
      }
    }

    // Re-pin inside range(Pi) so accumulated drift cannot leak into the
    // accepted basis.
    f = state.proj * f;
    f.normalize();
    pin_phase(f);
    basis.col(sn) = f;
    state = gain_update(state, f, p_n);
  }

  if (stats) *stats = local;
  return basis;
}

RealVector power_allocation(const ChannelSet& ch, const ComplexMatrix& basis,
                            const OptimizerConfig& cfg, const RealVector& p_prev,
                            PowerStats* stats) {
  ch.validate();
  cfg.validate(ch.tx_antennas());
  if (basis.rows() != ch.tx_antennas() || basis.cols() != cfg.n_streams) {
    throw InvalidInputError("power_allocation: basis has wrong shape");
  }
  if (p_prev.size() != cfg.n_streams || !p_prev.allFinite()) {
    throw InvalidInputError("power_allocation: previous powers must be finite, one per stream");
  }

  const ComplexMatrix k_c = gram(ch.comm, basis);
  const ComplexMatrix k_s = gram(ch.sense, basis);
  const ComplexMatrix k_e = gram(ch.eve, basis);
  const Eigen::Index streams = cfg.n_streams;

  auto dc_objective = [&](const RealVector& p) {
    return cfg.w.comm * (logdet2(k_c, p) - logdet2(k_e, p)) +
           cfg.w.sense * logdet2(k_s, p);
  };

  struct Chain {
    RealVector p;
    std::vector<RealVector> iterates;
    long sca_iters = 0;
    bool converged = false;
  };
  const double kkt_inner = std::min(1e-7, cfg.tol.sca_tol);
  auto run_chain = [&](const RealVector& start) {
    Chain chain;
    chain.p = project_to_simplex(start, cfg.total_power);
    chain.iterates.push_back(chain.p);
    bool line_search_ok = true;
    for (int it = 0; it < cfg.caps.max_sca; ++it) {
      const RealVector grad_e = logdet2_grad(k_e, chain.p);
      bool sub_ok = true;
      RealVector p_next = convex_subproblem(k_c, k_s, grad_e, cfg.w, cfg.total_power,
                                            chain.p, kkt_inner, cfg.caps.max_pg, &sub_ok);
      if (!sub_ok) line_search_ok = false;
      const double delta = (p_next - chain.p).norm();
      chain.p = p_next;
      chain.iterates.push_back(chain.p);
      ++chain.sca_iters;
      if (delta < cfg.tol.sca_tol) {
        // At a fixed point the surrogate gradient coincides with the true
        // DC gradient, so certify against the true one before stopping.
        const RealVector g_true = cfg.w.comm * logdet2_grad(k_c, chain.p) +
                                  cfg.w.sense * logdet2_grad(k_s, chain.p) -
                                  cfg.w.comm * logdet2_grad(k_e, chain.p);
        if (simplex_kkt_residual(g_true, chain.p, cfg.total_power) < 1e-6) {
          chain.converged = line_search_ok;
          break;
        }
      }
    }
    return chain;
  };

  // The DC program in p is multi-modal: dense starts can keep
  // eavesdropper-leaky streams powered. Run the warm-start chain, then
  // screen sparse top-k splits (ordered by marginal gain) by direct
  // objective evaluation; only when the best sparse point already beats the
  // warm chain's result is one restart chain worth running.
  PowerStats local;
  Chain best = run_chain(p_prev);
  double best_obj = dc_objective(best.p);
  long total_iters = best.sca_iters;

  if (streams > 1) {
    const RealVector warm = project_to_simplex(p_prev, cfg.total_power);
    const RealVector gains = marginal_gains(ch, basis, warm, cfg.w);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(streams));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return gains(a) > gains(b); });
    RealVector best_start;
    double best_start_obj = best_obj + 1e-12 * std::max(1.0, std::abs(best_obj));
    for (Eigen::Index k = 1; k <= streams; ++k) {
      RealVector start = RealVector::Zero(streams);
      for (Eigen::Index i = 0; i < k; ++i) {
        start(order[static_cast<std::size_t>(i)]) =
            cfg.total_power / static_cast<double>(k);
      }
      const double obj = dc_objective(start);
      if (obj > best_start_obj) {
        best_start_obj = obj;
        best_start = start;
      }
    }
    if (best_start.size() > 0) {
      Chain restart = run_chain(best_start);
      total_iters += restart.sca_iters;
      const double obj = dc_objective(restart.p);
      if (obj > best_obj) {
        best_obj = obj;
        best = std::move(restart);
      }
    }
  }

  local.iterates = std::move(best.iterates);
  local.sca_iters = total_iters;
  local.converged = best.converged;
  if (stats) *stats = local;
  return best.p;
}

ComplexMatrix composite_gain(const ChannelSet& ch, const Weights& w) {
  w.validate();
  ch.validate();
  return hermitize(w.comm * (ch.comm.adjoint() * ch.comm) -
                   w.comm * (ch.eve.adjoint() * ch.eve) +
                   w.sense * (ch.sense.adjoint() * ch.sense));
}

LowSnrSolution low_snr_precoder(const ChannelSet& ch, const Weights& w, double total_power) {
  if (!(total_power > 0.0)) {
    throw InvalidInputError("low_snr_precoder: total power must be positive");
  }
  const HermitianEig eig = hermitian_eig(composite_gain(ch, w));
  LowSnrSolution out;
  out.precoder.basis = eig.vectors.col(0);
  if (eig.values(0) <= 0.0) {
    out.degenerate = true;
    out.precoder.powers = RealVector::Zero(1);
  } else {
    out.precoder.powers = RealVector::Constant(1, total_power);
  }
  return out;
}

namespace {

// One full alternation from a given starting basis. With power_first the
// run opens with a power stage, so a caller-provided basis is scored (and
// monotonically improved) before the greedy stage reshapes it.
SolveResult alternate_from(const ChannelSet& ch, const OptimizerConfig& cfg,
                           const ComplexMatrix& basis0, bool power_first) {
  SolveResult res;
  ComplexMatrix basis = basis0;
  RealVector p = RealVector::Constant(cfg.n_streams,
                                      cfg.total_power / static_cast<double>(cfg.n_streams));
  double prev_obj =
      weighted_objective(ch, basis * p.cwiseSqrt().asDiagonal(), cfg.w, /*clamp=*/false);

  if (power_first) {
    PowerStats pstats;
    p = power_allocation(ch, basis, cfg, p, &pstats);
    res.sca_iters += pstats.sca_iters;
    prev_obj =
        weighted_objective(ch, basis * p.cwiseSqrt().asDiagonal(), cfg.w, /*clamp=*/false);
    res.objective_trace.push_back(prev_obj);
  }

  for (int outer = 0; outer < cfg.caps.max_outer; ++outer) {
    BasisStats bstats;
    const ComplexMatrix basis_next = basis_update(ch, p, cfg, basis, &bstats);
    PowerStats pstats;
    const RealVector p_next = power_allocation(ch, basis_next, cfg, p, &pstats);
    res.fp_iters += bstats.fp_iters;
    res.sca_iters += pstats.sca_iters;
    ++res.outer_iters;

    const double obj = weighted_objective(ch, basis_next * p_next.cwiseSqrt().asDiagonal(),
                                          cfg.w, /*clamp=*/false);
    if (!std::isfinite(obj)) {
      throw NumericalDegeneracyError("solve: objective became non-finite");
    }
    if (!res.objective_trace.empty() &&
        obj < res.objective_trace.back() -
                  1e-12 * std::max(1.0, std::abs(res.objective_trace.back()))) {
      // The greedy basis stage lost more than the power stage recovered;
      // keep the previous iterate and stop.
      res.converged = true;
      break;
    }
    basis = basis_next;
    p = p_next;
    res.objective_trace.push_back(obj);
    if (std::abs(obj - prev_obj) < cfg.tol.outer_tol) {
      res.converged = true;
      break;
    }
    prev_obj = obj;
  }

  res.precoder.basis = std::move(basis);
  res.precoder.powers = std::move(p);
  return res;
}

// High-SNR seed candidate: leading directions of the secrecy pencil
// (I + P G_c, I + P G_e), orthonormalized in ranking order.
ComplexMatrix pencil_seed(const ChannelSet& ch, const OptimizerConfig& cfg) {
  const Eigen::Index n = ch.tx_antennas();
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a = eye + cfg.total_power * hermitize(ch.comm.adjoint() * ch.comm);
  const ComplexMatrix b = eye + cfg.total_power * hermitize(ch.eve.adjoint() * ch.eve);
  const HermitianEig ge = generalized_hermitian_eig(a, b);
  Eigen::HouseholderQR<ComplexMatrix> qr(ge.vectors.leftCols(cfg.n_streams));
  ComplexMatrix seed = qr.householderQ() * ComplexMatrix::Identity(n, cfg.n_streams);
  apply_phase_convention(seed);
  return seed;
}

}  // namespace

SolveResult solve(const ChannelSet& ch, const OptimizerConfig& cfg) {
  ch.validate();
  const Eigen::Index n = ch.tx_antennas();
  cfg.validate(n);
  const auto t0 = std::chrono::steady_clock::now();

  SolveResult res;
  if (cfg.seed_basis) {
    if (cfg.seed_basis->rows() != n || cfg.seed_basis->cols() != cfg.n_streams) {
      throw InvalidInputError("solve: seed basis has wrong shape");
    }
    res = alternate_from(ch, cfg, *cfg.seed_basis, /*power_first=*/true);
  } else {
    // Two deterministic starts: the composite eigenbasis (optimal as power
    // vanishes) and the secrecy pencil (strong at high SNR); keep whichever
    // alternation ends higher.
    const ComplexMatrix low_seed =
        hermitian_eig(composite_gain(ch, cfg.w)).vectors.leftCols(cfg.n_streams);
    res = alternate_from(ch, cfg, low_seed, /*power_first=*/false);
    if (cfg.w.comm > 0.0) {
      SolveResult alt = alternate_from(ch, cfg, pencil_seed(ch, cfg), /*power_first=*/true);
      if (!alt.objective_trace.empty() &&
          (res.objective_trace.empty() ||
           alt.objective_trace.back() > res.objective_trace.back())) {
        res = std::move(alt);
      }
    }
  }

  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

}  // namespace mems
