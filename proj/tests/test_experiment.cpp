#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "mems/experiment.hpp"

using namespace mems;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.dims = SystemDims{4, 4, 4, 4, 2, 1};
  cfg.snr_db = {5.0};
  cfg.trials = 1;
  cfg.base_seed = 11;
  return cfg;
}

std::map<std::string, std::vector<SweepRecord>> by_method(
    const std::vector<SweepRecord>& records) {
  std::map<std::string, std::vector<SweepRecord>> out;
  for (const auto& r : records) out[r.method].push_back(r);
  return out;
}

}  // namespace

TEST_CASE("config json round trip covers dims, sweeps and caps") {
  const std::string text = R"({
    "dims": {"n_t": 6, "n_c": 5, "n_e": 4, "n_s": 6, "n_streams": 3},
    "snr_db": [0.0, 10.0],
    "weights": [0.0, 0.5, 1.0],
    "trials": 7,
    "base_seed": 42,
    "out_dir": "results",
    "plot": true,
    "threads": 2,
    "tolerances": {"fp_tol": 1e-9},
    "caps": {"max_outer": 12},
    "methods": ["proposed", "sub"]
  })";
  const ExperimentConfig cfg = ExperimentConfig::from_json_text(text);
  CHECK(cfg.dims.n_t == 6);
  CHECK(cfg.dims.n_c == 5);
  CHECK(cfg.dims.n_streams == 3);
  CHECK(cfg.snr_db.size() == 2);
  REQUIRE(cfg.weight_sweep_override.has_value());
  CHECK(cfg.weight_sweep_override->size() == 3);
  CHECK(cfg.trials == 7);
  CHECK(cfg.base_seed == 42);
  CHECK(cfg.out_dir == std::filesystem::path("results"));
  CHECK(cfg.plot);
  CHECK(cfg.threads == 2);
  CHECK(cfg.tol.fp_tol == 1e-9);
  CHECK(cfg.caps.max_outer == 12);
  CHECK(cfg.methods.size() == 2);
  cfg.validate();
}

TEST_CASE("default weight sweep is the 21-point grid") {
  const ExperimentConfig cfg;
  const auto w = cfg.weights_or_default();
  REQUIRE(w.size() == 21);
  CHECK(w.front() == 0.0);
  CHECK(w[1] == doctest::Approx(0.05));
  CHECK(w.back() == 1.0);
}

TEST_CASE("pareto with an explicitly empty weight list emits nothing") {
  ExperimentConfig cfg = small_config();
  cfg.weight_sweep_override = std::vector<double>{};
  CHECK(run_pareto(cfg).empty());
}

TEST_CASE("pareto boundary weights reduce to the single-objective optima") {
  ExperimentConfig cfg = small_config();
  cfg.weight_sweep_override = std::vector<double>{0.0, 1.0};
  const auto records = run_pareto(cfg);
  const auto groups = by_method(records);
  REQUIRE(groups.count("proposed"));
  REQUIRE(groups.count("sub"));

  double proposed_rs_at_w0 = -1.0, sub_rs = -1.0;
  for (const auto& r : groups.at("proposed")) {
    if (r.w_c == 0.0) proposed_rs_at_w0 = r.sensing;
  }
  for (const auto& r : groups.at("sub")) {
    if (r.w_c == 0.0) sub_rs = r.sensing;
  }
  REQUIRE(proposed_rs_at_w0 >= 0.0);
  CHECK(std::abs(proposed_rs_at_w0 - sub_rs) < 1e-3);
}

TEST_CASE("proposed secrecy matches or beats gsvd on average at w_c = 1") {
  ExperimentConfig cfg;
  cfg.dims = SystemDims{6, 6, 6, 6, 2, 1};
  cfg.snr_db = {5.0};
  cfg.trials = 20;
  cfg.base_seed = 500;
  cfg.weight_sweep_override = std::vector<double>{1.0};
  const auto records = run_pareto(cfg);
  const auto groups = by_method(records);
  double proposed = 0.0, gsvd = 0.0;
  for (const auto& r : groups.at("proposed")) proposed += r.secrecy;
  for (const auto& r : groups.at("gsvd")) gsvd += r.secrecy;
  proposed /= static_cast<double>(groups.at("proposed").size());
  gsvd /= static_cast<double>(groups.at("gsvd").size());
  CHECK(proposed >= gsvd - 1e-6);
}

TEST_CASE("every record lies in the nonnegative rate quadrant") {
  ExperimentConfig cfg = small_config();
  cfg.weight_sweep_override = std::vector<double>{0.0, 0.5, 1.0};
  cfg.trials = 2;
  for (const auto& r : run_pareto(cfg)) {
    CHECK(r.secrecy >= 0.0);
    CHECK(r.sensing >= 0.0);
    CHECK(std::isfinite(r.objective));
  }
}

TEST_CASE("sumrate at one weight agrees with the pareto row") {
  ExperimentConfig cfg = small_config();
  cfg.weight_sweep_override = std::vector<double>{0.5};
  const auto pareto = run_pareto(cfg);
  const auto sumrate = run_sumrate_vs_snr(cfg);
  double pareto_obj = -1.0, sumrate_obj = -2.0;
  for (const auto& r : pareto) {
    if (r.method == "proposed") pareto_obj = r.objective;
  }
  for (const auto& r : sumrate) {
    if (r.method == "proposed") sumrate_obj = r.objective;
  }
  CHECK(pareto_obj == sumrate_obj);
}

TEST_CASE("sumrate objective grows with SNR for the proposed method") {
  ExperimentConfig cfg = small_config();
  cfg.snr_db = {0.0, 10.0, 20.0};
  const auto records = run_sumrate_vs_snr(cfg);
  std::map<double, double> by_snr;
  for (const auto& r : records) {
    if (r.method == "proposed") by_snr[r.snr_db] = r.objective;
  }
  REQUIRE(by_snr.size() == 3);
  CHECK(by_snr[0.0] <= by_snr[10.0]);
  CHECK(by_snr[10.0] <= by_snr[20.0]);
}

TEST_CASE("zero trials is a configuration error") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(run_sumrate_vs_snr(cfg), InvalidInputError);
  CHECK_THROWS_AS(run_pareto(cfg), InvalidInputError);
}

TEST_CASE("decompose report on full-rank Rayleigh channels is all full-common") {
  ExperimentConfig cfg;
  cfg.dims = SystemDims{8, 8, 8, 8, 2, 1};
  cfg.base_seed = 3;
  cfg.weight_sweep_override = std::vector<double>{0.3};
  const DecomposeReport rep = run_decompose(cfg);
  CHECK(rep.n_t == 8);
  CHECK(rep.dims[7] == 8);  // cse
  for (int i = 0; i < 7; ++i) CHECK(rep.dims[static_cast<std::size_t>(i)] == 0);
  CHECK(rep.d_max == doctest::Approx(8 * 0.7));
  CHECK(rep.useful_dim == 8);
  CHECK(rep.to_text().find("d_max") != std::string::npos);
  CHECK(rep.to_csv().find("label,dim,dof_weight") == 0);
}

TEST_CASE("decompose report handles the degenerate single-antenna case") {
  ExperimentConfig cfg;
  cfg.dims = SystemDims{1, 1, 1, 1, 1, 1};
  const DecomposeReport rep = run_decompose(cfg);
  Eigen::Index total = 0;
  int nonzero = 0;
  for (auto d : rep.dims) {
    total += d;
    nonzero += d > 0 ? 1 : 0;
  }
  CHECK(total == 1);
  CHECK(nonzero == 1);
}

TEST_CASE("csv emission: empty input gives a lone header") {
  const std::string text = records_to_csv({});
  CHECK(text ==
        "trial_seed,method,w_c,w_s,snr_db,N_s,R_sec,R_s,objective,iters_outer,"
        "iters_fp,iters_sca,converged,wall_ms\n");
}

TEST_CASE("csv round trip preserves every parsed field") {
  SweepRecord r;
  r.trial_seed = 77;
  r.method = "proposed";
  r.w_c = 0.35;
  r.w_s = 0.65;
  r.snr_db = 12.5;
  r.n_streams = 3;
  r.secrecy = 1.25;
  r.sensing = 2.5e-3;
  r.objective = -0.75;
  r.iters_outer = 4;
  r.iters_fp = 123;
  r.iters_sca = 17;
  r.converged = true;
  r.wall_ms = 99.0;  // not serialized in the raw file
  const auto parsed = records_from_csv(records_to_csv({r}));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].trial_seed == 77);
  CHECK(parsed[0].method == "proposed");
  CHECK(parsed[0].w_c == r.w_c);
  CHECK(parsed[0].w_s == r.w_s);
  CHECK(parsed[0].snr_db == r.snr_db);
  CHECK(parsed[0].n_streams == 3);
  CHECK(parsed[0].secrecy == r.secrecy);
  CHECK(parsed[0].sensing == r.sensing);
  CHECK(parsed[0].objective == r.objective);
  CHECK(parsed[0].iters_outer == 4);
  CHECK(parsed[0].iters_fp == 123);
  CHECK(parsed[0].iters_sca == 17);
  CHECK(parsed[0].converged);
  CHECK(parsed[0].wall_ms == 0.0);
}

TEST_CASE("pareto reruns are byte-identical") {
  ExperimentConfig cfg = small_config();
  cfg.weight_sweep_override = std::vector<double>{0.0, 0.5, 1.0};
  cfg.trials = 2;
  const std::string a = records_to_csv(run_pareto(cfg));
  const std::string b = records_to_csv(run_pareto(cfg));
  CHECK(a == b);
}

TEST_CASE("emit_outputs writes the configured files") {
  const auto dir = std::filesystem::temp_directory_path() / "mems_emit_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = small_config();
  cfg.weight_sweep_override = std::vector<double>{0.5};
  const auto records = run_pareto(cfg);
  const OutputPaths paths = OutputPaths::in_dir(dir, /*plot=*/true);
  emit_outputs(records, paths);
  CHECK(std::filesystem::exists(paths.raw_csv));
  CHECK(std::filesystem::exists(paths.aggregate_csv));
  REQUIRE(paths.plot_svg.has_value());
  CHECK(std::filesystem::exists(*paths.plot_svg));

  std::ifstream in(paths.aggregate_csv);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("wall_ms_mean") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("thread count respects the environment cap") {
  setenv("MEMS_THREADS", "1", 1);
  CHECK(effective_thread_count(8) == 1);
  setenv("MEMS_THREADS", "0", 1);
  CHECK(effective_thread_count(3) == 3);
  unsetenv("MEMS_THREADS");
  CHECK(effective_thread_count(2) == 2);
}
