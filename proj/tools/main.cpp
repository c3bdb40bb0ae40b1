// Experiment CLI: weight sweeps, sum-rate curves, subspace reports and
// single solves, driven by a JSON config with flag overrides.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mems/baselines.hpp"
#include "mems/experiment.hpp"
#include "mems/rates.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<double> snr_db;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool plot = false;
  std::optional<int> n_t;
  std::optional<int> n_streams;
  std::optional<double> w_c;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--snr-db", args.snr_db, "SNR in dB (overrides config)");
  cmd->add_option("--trials", args.trials, "number of Monte-Carlo trials");
  cmd->add_option("--seed", args.seed, "base seed");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_flag("--plot", args.plot, "also write an SVG of the rate region");
  cmd->add_option("--nt", args.n_t, "transmit antennas (sets n_c=n_e=n_s=n_t)");
  cmd->add_option("--streams", args.n_streams, "data streams");
  cmd->add_option("--w-c", args.w_c, "secrecy weight w_c (single-point runs)");
}

mems::ExperimentConfig load_config(const CommonArgs& args) {
  mems::ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    cfg = mems::ExperimentConfig::from_json_file(args.config_path);
  }
  if (args.snr_db) cfg.snr_db = {*args.snr_db};
  if (args.trials) cfg.trials = *args.trials;
  if (args.seed) cfg.base_seed = *args.seed;
  if (args.out_dir) cfg.out_dir = *args.out_dir;
  if (args.plot) cfg.plot = true;
  if (args.n_t) {
    cfg.dims.n_t = cfg.dims.n_c = cfg.dims.n_e = cfg.dims.n_s = *args.n_t;
    if (cfg.dims.n_streams > cfg.dims.n_t) cfg.dims.n_streams = cfg.dims.n_t;
  }
  if (args.n_streams) cfg.dims.n_streams = *args.n_streams;
  if (args.w_c) cfg.weight_sweep_override = std::vector<double>{*args.w_c};
  return cfg;
}

int emit_and_report(const std::vector<mems::SweepRecord>& records,
                    const mems::ExperimentConfig& cfg) {
  const auto paths = mems::OutputPaths::in_dir(cfg.out_dir, cfg.plot);
  mems::emit_outputs(records, paths);
  std::cout << records.size() << " records -> " << paths.raw_csv.string() << ", "
            << paths.aggregate_csv.string();
  if (paths.plot_svg) std::cout << ", " << paths.plot_svg->string();
  std::cout << "\n";
  return 0;
}

int run_single(const mems::ExperimentConfig& cfg) {
  mems::SystemDims dims = cfg.dims;
  if (dims.n_streams <= 0) dims.n_streams = std::max(1, dims.n_t / 2);
  const double snr = cfg.snr_db.empty() ? 0.0 : cfg.snr_db.front();
  const double total_power = std::pow(10.0, snr / 10.0);
  const auto weights = cfg.weights_or_default();
  const double w_c = weights.empty() ? 0.5 : weights.front();

  const mems::ChannelSet ch =
      cfg.label_dims ? mems::make_structured_channels(*cfg.label_dims, cfg.base_seed)
                     : mems::sample_channel_set(dims, cfg.base_seed, cfg.sensing_ridge);

  mems::OptimizerConfig oc;
  oc.n_streams = dims.n_streams;
  oc.total_power = total_power;
  oc.w = mems::Weights::from_comm(w_c);
  oc.tol = cfg.tol;
  oc.caps = cfg.caps;
  const mems::SolveResult res = mems::solve(ch, oc);

  const mems::ComplexMatrix f = res.precoder.matrix();
  std::printf("solve: n_t=%d N_s=%d snr=%g dB w_c=%g seed=%llu\n", dims.n_t,
              dims.n_streams, snr, w_c,
              static_cast<unsigned long long>(cfg.base_seed));
  std::printf("  converged=%d outer=%d fp=%ld sca=%ld wall=%.3f ms\n",
              res.converged ? 1 : 0, res.outer_iters, res.fp_iters, res.sca_iters,
              res.wall_ms);
  std::printf("  R_sec=%.6f R_s=%.6f objective=%.6f\n",
              mems::secrecy_rate(ch.comm, ch.eve, f), mems::link_rate(ch.sense, f),
              mems::weighted_objective(ch, f, oc.w, false));
  std::printf("  objective trace:");
  for (double v : res.objective_trace) std::printf(" %.6f", v);
  std::printf("\n  stream powers:");
  for (Eigen::Index k = 0; k < res.precoder.powers.size(); ++k) {
    std::printf(" %.6g%s", res.precoder.powers(k),
                res.precoder.powers(k) < 1e-10 * total_power ? "(inactive)" : "");
  }
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secrecy/sensing precoder experiments"};
  app.require_subcommand(1);

  CommonArgs pareto_args, sumrate_args, decompose_args, single_args;
  CLI::App* pareto = app.add_subcommand("pareto", "weight sweep over the rate region");
  add_common(pareto, pareto_args);
  CLI::App* sumrate = app.add_subcommand("sumrate", "weighted sum rate vs SNR");
  add_common(sumrate, sumrate_args);
  CLI::App* decompose = app.add_subcommand("decompose", "subspace dimension report");
  add_common(decompose, decompose_args);
  CLI::App* single = app.add_subcommand("single", "one solve with a full trace dump");
  add_common(single, single_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (pareto->parsed()) {
      const mems::ExperimentConfig cfg = load_config(pareto_args);
      return emit_and_report(mems::run_pareto(cfg), cfg);
    }
    if (sumrate->parsed()) {
      const mems::ExperimentConfig cfg = load_config(sumrate_args);
      return emit_and_report(mems::run_sumrate_vs_snr(cfg), cfg);
    }
    if (decompose->parsed()) {
      const mems::ExperimentConfig cfg = load_config(decompose_args);
      const mems::DecomposeReport rep = mems::run_decompose(cfg);
      std::cout << rep.to_text();
      const auto csv_path = cfg.out_dir / "decompose.csv";
      std::filesystem::create_directories(cfg.out_dir);
      std::ofstream out(csv_path);
      if (!out) throw std::runtime_error("cannot open " + csv_path.string());
      out << rep.to_csv();
      std::cout << "report -> " << csv_path.string() << "\n";
      return 0;
    }
    if (single->parsed()) {
      return run_single(load_config(single_args));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
