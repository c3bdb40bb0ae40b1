#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mems/channel.hpp"
#include "mems/precoder.hpp"
#include "mems/subspace.hpp"
#include "mems/types.hpp"

namespace mems {

/// Everything needed to reproduce one experiment run.
struct ExperimentConfig {
  SystemDims dims{16, 16, 16, 16, 2, 1};
  std::vector<double> snr_db{0.0};
  int trials = 1;
  std::uint64_t base_seed = 1;
  std::filesystem::path out_dir = "out";
  bool plot = false;
  int threads = 0;  // 0 = auto; MEMS_THREADS caps the final count
  TolerancePolicy tol;
  IterationCaps caps;
  double sensing_ridge = 1e-6;
  std::vector<std::string> methods;            // empty = all
  std::optional<LabelDims> label_dims;         // structured channels when set
  std::optional<std::vector<double>> weight_sweep_override;  // set = use as-is,
                                                             // even when empty

  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  static ExperimentConfig from_json_text(const std::string& text);

  std::vector<double> weights_or_default() const;
  void validate() const;
};

/// One evaluated operating point of one method.
struct SweepRecord {
  std::uint64_t trial_seed = 0;
  std::string method;
  double w_c = 0.0;
  double w_s = 0.0;
  double snr_db = 0.0;
  int n_streams = 0;
  double secrecy = 0.0;    // clamped
  double sensing = 0.0;
  double objective = 0.0;  // unclamped
  int iters_outer = 0;
  long iters_fp = 0;
  long iters_sca = 0;
  bool converged = true;
  double wall_ms = 0.0;    // measured; aggregate output only
};

/// Channels for one trial: Rayleigh links with unit noise and a generic
/// full-rank sensing covariance (A A^H / n_t plus a small ridge).
ChannelSet sample_channel_set(const SystemDims& dims, std::uint64_t trial_seed,
                              double sensing_ridge = 1e-6);

/// Weight sweep across methods at fixed SNR(s); raw records sorted by
/// (method, w_c, snr, seed).
std::vector<SweepRecord> run_pareto(const ExperimentConfig& cfg);

/// Weighted sum rate versus SNR at w_c = w_s = 0.5 (or the single
/// configured weight); streams default to n_t / 2 when the config asks for
/// auto (n_streams = 0 is normalized before use).
std::vector<SweepRecord> run_sumrate_vs_snr(const ExperimentConfig& cfg);

struct DecomposeReport {
  std::array<Eigen::Index, 8> dims{};
  std::array<double, 8> weights{};
  double d_max = 0.0;
  Eigen::Index useful_dim = 0;
  Eigen::Index n_t = 0;
  double w_c = 0.0;

  std::string to_text() const;
  std::string to_csv() const;
};

/// Samples (or builds, for structured configs) one channel set, decomposes
/// it and reports per-label dimensions and DoF weights.
DecomposeReport run_decompose(const ExperimentConfig& cfg);

struct OutputPaths {
  std::filesystem::path raw_csv;
  std::filesystem::path aggregate_csv;
  std::optional<std::filesystem::path> plot_svg;

  static OutputPaths in_dir(const std::filesystem::path& dir, bool plot);
};

/// Writes the raw CSV (deterministic bytes; the wall_ms column is left
/// empty), the per-group aggregate CSV (mean/std, measured wall time) and
/// optionally an SVG of the rate region.
void emit_outputs(const std::vector<SweepRecord>& records, const OutputPaths& paths);

/// Serializes records to CSV text (the raw-file format).
std::string records_to_csv(const std::vector<SweepRecord>& records);

/// Parses raw-format CSV text back into records (wall_ms comes back 0).
std::vector<SweepRecord> records_from_csv(const std::string& text);

/// Effective worker count: `requested` (0 = hardware) capped by the
/// MEMS_THREADS environment variable (0 or unset = no cap).
int effective_thread_count(int requested);

}  // namespace mems
