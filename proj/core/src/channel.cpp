#include "mems/channel.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "mems/numerics.hpp"

namespace mems {

void ChannelSet::validate() const {
  const Eigen::Index n = comm.cols();
  if (eve.cols() != n || sense.cols() != n) {
    throw InvalidInputError("ChannelSet: column counts must all equal n_t");
  }
  require_finite(comm, "ChannelSet.comm");
  require_finite(eve, "ChannelSet.eve");
  require_finite(sense, "ChannelSet.sense");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 round over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ComplexMatrix sample_rayleigh(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) {
    throw InvalidInputError("sample_rayleigh: rows and cols must be >= 1");
  }
  std::mt19937_64 gen(seed);
  ComplexMatrix m(rows, cols);
  // Box-Muller on explicit 53-bit uniforms keeps the stream identical
  // across standard libraries.
  auto uniform = [&gen]() {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
  };
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double u1 = uniform();
      const double u2 = uniform();
      const double r = std::sqrt(-std::log(u1));  // |z| for unit-variance CN
      const double phi = 2.0 * std::numbers::pi * u2;
      m(i, j) = Complex(r * std::cos(phi), r * std::sin(phi));
    }
  }
  return m;
}

ComplexMatrix random_unitary(Eigen::Index n, std::uint64_t seed) {
  const ComplexMatrix g = sample_rayleigh(n, n, seed);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  // Fix the QR sign/phase ambiguity against the R diagonal, then apply the
  // library-wide column phase convention.
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  apply_phase_convention(q);
  return q;
}

ChannelSet build_effective_channels(const ComplexMatrix& raw_c, const ComplexMatrix& raw_e,
                                    const ComplexMatrix& r_sensing, double sigma_c,
                                    double sigma_e, double sigma_s, int block_len) {
  require_finite(raw_c, "build_effective_channels.raw_c");
  require_finite(raw_e, "build_effective_channels.raw_e");
  require_finite(r_sensing, "build_effective_channels.r_sensing");
  if (!(sigma_c > 0.0) || !(sigma_e > 0.0) || !(sigma_s > 0.0)) {
    throw InvalidInputError("build_effective_channels: noise levels must be positive");
  }
  if (block_len < 1) {
    throw InvalidInputError("build_effective_channels: block length must be >= 1");
  }
  const Eigen::Index n = raw_c.cols();
  if (raw_e.cols() != n || r_sensing.rows() != n || r_sensing.cols() != n) {
    throw InvalidInputError("build_effective_channels: dimension mismatch");
  }
  ChannelSet ch;
  ch.comm = raw_c / sigma_c;
  ch.eve = raw_e / sigma_e;
  const double gain = static_cast<double>(block_len) / (sigma_s * sigma_s);
  ch.sense = cholesky_factor(gain * r_sensing);
  ch.dims.n_t = static_cast<int>(n);
  ch.dims.n_c = static_cast<int>(raw_c.rows());
  ch.dims.n_e = static_cast<int>(raw_e.rows());
  ch.dims.n_s = static_cast<int>(n);
  ch.dims.n_streams = static_cast<int>(n);
  ch.dims.block_len = block_len;
  return ch;
}

namespace {

// Column indices of the shared frame visible to one receiver, out of the
// label order {n, c, s, e, cs, ce, se, cse}.
std::vector<int> visible_labels(Link l) {
  switch (l) {
    case Link::comm: return {1, 4, 5, 7};   // c, cs, ce, cse
    case Link::sense: return {2, 4, 6, 7};  // s, cs, se, cse
    default: return {3, 5, 6, 7};           // e, ce, se, cse
  }
}

ComplexMatrix structured_channel(const ComplexMatrix& frame, const LabelDims& dims,
                                 Link l, std::uint64_t seed) {
  std::array<int, 8> offset{};
  int acc = 0;
  for (int i = 0; i < 8; ++i) {
    offset[static_cast<std::size_t>(i)] = acc;
    acc += dims[static_cast<std::size_t>(i)];
  }
  std::vector<Eigen::Index> cols;
  for (int lab : visible_labels(l)) {
    for (int k = 0; k < dims[static_cast<std::size_t>(lab)]; ++k) {
      cols.push_back(offset[static_cast<std::size_t>(lab)] + k);
    }
  }
  const Eigen::Index n = frame.rows();
  const Eigen::Index r = static_cast<Eigen::Index>(cols.size());
  if (r == 0) {
    return ComplexMatrix::Zero(1, n);  // rank-0 channel, one zero row
  }
  ComplexMatrix span(n, r);
  for (Eigen::Index j = 0; j < r; ++j) span.col(j) = frame.col(cols[static_cast<std::size_t>(j)]);
  const ComplexMatrix mix = sample_rayleigh(r, r, seed);
  return mix * span.adjoint();
}

}  // namespace

ChannelSet make_structured_channels(const LabelDims& dims, std::uint64_t seed) {
  int n = 0;
  for (int k : dims) {
    if (k < 0) throw InvalidInputError("make_structured_channels: dims must be >= 0");
    n += k;
  }
  if (n < 1) throw InvalidInputError("make_structured_channels: total dimension must be >= 1");
  const ComplexMatrix frame = random_unitary(n, derive_seed(seed, 101));
  ChannelSet ch;
  ch.comm = structured_channel(frame, dims, Link::comm, derive_seed(seed, 102));
  ch.sense = structured_channel(frame, dims, Link::sense, derive_seed(seed, 103));
  ch.eve = structured_channel(frame, dims, Link::eve, derive_seed(seed, 104));
  ch.dims.n_t = n;
  ch.dims.n_c = static_cast<int>(ch.comm.rows());
  ch.dims.n_e = static_cast<int>(ch.eve.rows());
  ch.dims.n_s = static_cast<int>(ch.sense.rows());
  ch.dims.n_streams = std::max(1, n);
  ch.dims.block_len = 1;
  return ch;
}

}  // namespace mems
