#include "mems/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mems/baselines.hpp"
#include "mems/numerics.hpp"
#include "mems/rates.hpp"

namespace mems {

namespace {

using nlohmann::json;

constexpr const char* kRawHeader =
    "trial_seed,method,w_c,w_s,snr_db,N_s,R_sec,R_s,objective,"
    "iters_outer,iters_fp,iters_sca,converged,wall_ms";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct MethodSelection {
  bool proposed = true;
  bool agnostic = true;
  bool gsvd = true;
  bool sub = true;
  bool timeshare = true;
};

MethodSelection select_methods(const std::vector<std::string>& names) {
  if (names.empty()) return {};
  MethodSelection sel{false, false, false, false, false};
  for (const auto& n : names) {
    if (n == "proposed") sel.proposed = true;
    else if (n == "agnostic") sel.agnostic = true;
    else if (n == "gsvd") sel.gsvd = true;
    else if (n == "sub") sel.sub = true;
    else if (n == "timeshare") sel.timeshare = true;
    else throw InvalidInputError("unknown method name: " + n);
  }
  return sel;
}

void parallel_for(int n_tasks, int workers, const std::function<void(int)>& body) {
  if (n_tasks <= 0) return;
  workers = std::max(1, std::min(workers, n_tasks));
  if (workers == 1) {
    for (int i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct LinkRates {
  double comm = 0.0;
  double eve = 0.0;
  double sense = 0.0;
};

LinkRates evaluate_rates(const ChannelSet& ch, const ComplexMatrix& f) {
  LinkRates r;
  r.comm = link_rate(ch.comm, f);
  r.eve = link_rate(ch.eve, f);
  r.sense = link_rate(ch.sense, f);
  return r;
}

SweepRecord make_record(std::uint64_t seed, const std::string& method, double w_c,
                        double snr, int n_streams, const LinkRates& r) {
  SweepRecord rec;
  rec.trial_seed = seed;
  rec.method = method;
  rec.w_c = w_c;
  rec.w_s = 1.0 - w_c;
  rec.snr_db = snr;
  rec.n_streams = n_streams;
  rec.secrecy = std::max(0.0, r.comm - r.eve);
  rec.sensing = r.sense;
  rec.objective = w_c * (r.comm - r.eve) + (1.0 - w_c) * r.sense;
  return rec;
}

void sort_records(std::vector<SweepRecord>& records) {
  std::sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.w_c != b.w_c) return a.w_c < b.w_c;
    if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
    return a.trial_seed < b.trial_seed;
  });
}

SystemDims resolved_dims(const ExperimentConfig& cfg) {
  SystemDims d = cfg.dims;
  if (d.n_streams <= 0) d.n_streams = std::max(1, d.n_t / 2);
  d.validate();
  return d;
}

OptimizerConfig solver_config(const ExperimentConfig& cfg, const SystemDims& dims,
                              double w_c, double total_power) {
  OptimizerConfig oc;
  oc.n_streams = dims.n_streams;
  oc.total_power = total_power;
  oc.w = Weights::from_comm(w_c);
  oc.tol = cfg.tol;
  oc.caps = cfg.caps;
  return oc;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

int effective_thread_count(int requested) {
  int count = requested > 0 ? requested
                            : static_cast<int>(std::thread::hardware_concurrency());
  if (count < 1) count = 1;
  if (const char* env = std::getenv("MEMS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) count = std::min(count, cap);
  }
  return count;
}

std::vector<double> ExperimentConfig::weights_or_default() const {
  if (weight_sweep_override) return *weight_sweep_override;
  std::vector<double> grid;
  grid.reserve(21);
  for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
  return grid;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw InvalidInputError("ExperimentConfig: trials must be >= 1");
  if (dims.n_t < 1 || dims.n_c < 1 || dims.n_e < 1 || dims.n_s < 1 ||
      dims.block_len < 1 || dims.n_streams < 0 || dims.n_streams > dims.n_t) {
    throw InvalidInputError("ExperimentConfig: bad dimensions");
  }
  for (double w : weights_or_default()) {
    if (!(w >= 0.0) || !(w <= 1.0)) {
      throw InvalidInputError("ExperimentConfig: weights must lie in [0, 1]");
    }
  }
  if (!(sensing_ridge >= 0.0)) {
    throw InvalidInputError("ExperimentConfig: sensing ridge must be >= 0");
  }
  tol.validate();
  caps.validate();
  select_methods(methods);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("dims")) {
    const auto& d = j.at("dims");
    cfg.dims.n_t = d.value("n_t", cfg.dims.n_t);
    cfg.dims.n_c = d.value("n_c", cfg.dims.n_c);
    cfg.dims.n_e = d.value("n_e", cfg.dims.n_e);
    cfg.dims.n_s = d.value("n_s", cfg.dims.n_s);
    cfg.dims.n_streams = d.value("n_streams", cfg.dims.n_streams);
    cfg.dims.block_len = d.value("block_len", cfg.dims.block_len);
  }
  if (j.contains("snr_db")) {
    if (j.at("snr_db").is_array()) {
      cfg.snr_db = j.at("snr_db").get<std::vector<double>>();
    } else {
      cfg.snr_db = {j.at("snr_db").get<double>()};
    }
  }
  if (j.contains("weights")) {
    cfg.weight_sweep_override = j.at("weights").get<std::vector<double>>();
  }
  cfg.trials = j.value("trials", cfg.trials);
  cfg.base_seed = j.value("base_seed", cfg.base_seed);
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  cfg.plot = j.value("plot", cfg.plot);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.sensing_ridge = j.value("sensing_ridge", cfg.sensing_ridge);
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    cfg.tol.rank_rel_tol = t.value("rank_rel_tol", cfg.tol.rank_rel_tol);
    cfg.tol.fp_tol = t.value("fp_tol", cfg.tol.fp_tol);
    cfg.tol.sca_tol = t.value("sca_tol", cfg.tol.sca_tol);
    cfg.tol.outer_tol = t.value("outer_tol", cfg.tol.outer_tol);
  }
  if (j.contains("caps")) {
    const auto& c = j.at("caps");
    cfg.caps.max_outer = c.value("max_outer", cfg.caps.max_outer);
    cfg.caps.max_fp = c.value("max_fp", cfg.caps.max_fp);
    cfg.caps.max_sca = c.value("max_sca", cfg.caps.max_sca);
    cfg.caps.max_pg = c.value("max_pg", cfg.caps.max_pg);
  }
  if (j.contains("methods")) {
    cfg.methods = j.at("methods").get<std::vector<std::string>>();
  }
  if (j.contains("label_dims")) {
    const auto& ld = j.at("label_dims");
    LabelDims dims{};
    int i = 0;
    for (const char* name : {"n", "c", "s", "e", "cs", "ce", "se", "cse"}) {
      dims[static_cast<std::size_t>(i++)] = ld.value(name, 0);
    }
    cfg.label_dims = dims;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInputError("cannot open config file: " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return from_json_text(buf.str());
  } catch (const json::exception& e) {
    throw InvalidInputError("bad config " + path.string() + ": " + e.what());
  }
}

ChannelSet sample_channel_set(const SystemDims& dims, std::uint64_t trial_seed,
                              double sensing_ridge) {
  dims.validate();
  const ComplexMatrix raw_c =
      sample_rayleigh(dims.n_c, dims.n_t, derive_seed(trial_seed, 1));
  const ComplexMatrix raw_e =
      sample_rayleigh(dims.n_e, dims.n_t, derive_seed(trial_seed, 2));
  const ComplexMatrix a = sample_rayleigh(dims.n_t, dims.n_t, derive_seed(trial_seed, 3));
  const ComplexMatrix r_sensing =
      (a * a.adjoint()) / static_cast<double>(dims.n_t) +
      sensing_ridge * ComplexMatrix::Identity(dims.n_t, dims.n_t);
  ChannelSet ch = build_effective_channels(raw_c, raw_e, r_sensing, 1.0, 1.0, 1.0,
                                           dims.block_len);
  ch.dims = dims;
  return ch;
}

namespace {

// Shared per-trial evaluation used by both sweep drivers.
struct TrialOutput {
  std::vector<SweepRecord> records;
};

TrialOutput run_trial(const ExperimentConfig& cfg, const SystemDims& dims,
                      std::uint64_t trial_seed, const std::vector<double>& weights,
                      const MethodSelection& sel, bool with_timeshare) {
  TrialOutput out;
  const ChannelSet ch = cfg.label_dims
                            ? make_structured_channels(*cfg.label_dims, trial_seed)
                            : sample_channel_set(dims, trial_seed, cfg.sensing_ridge);

  for (double snr : cfg.snr_db) {
    const double total_power = std::pow(10.0, snr / 10.0);

    OperatingPoint gsvd_point;
    LinkRates gsvd_rates;
    double gsvd_ms = 0.0;
    if (sel.gsvd || (sel.timeshare && with_timeshare)) {
      const double t0 = now_ms();
      const Precoder pc = gsvd_secrecy_precoder(ch.comm, ch.eve, total_power,
                                                dims.n_streams, cfg.tol, cfg.caps);
      gsvd_ms = now_ms() - t0;
      gsvd_rates = evaluate_rates(ch, pc.matrix());
      gsvd_point.secrecy = std::max(0.0, gsvd_rates.comm - gsvd_rates.eve);
      gsvd_point.sensing = gsvd_rates.sense;
      gsvd_point.label = "gsvd";
    }

    OperatingPoint sub_point;
    LinkRates sub_rates;
    double sub_ms = 0.0;
    if (sel.sub || (sel.timeshare && with_timeshare)) {
      const double t0 = now_ms();
      sub_point = sensing_upper_bound(ch.sense, total_power, dims.n_streams);
      sub_ms = now_ms() - t0;
      sub_rates = evaluate_rates(ch, sub_point.precoder->matrix());
      sub_point.secrecy = std::max(0.0, sub_rates.comm - sub_rates.eve);
      sub_point.sensing = sub_rates.sense;
    }

    for (double w_c : weights) {
      if (sel.proposed) {
        const OptimizerConfig oc = solver_config(cfg, dims, w_c, total_power);
        const SolveResult sr = solve(ch, oc);
        SweepRecord rec = make_record(trial_seed, "proposed", w_c, snr, dims.n_streams,
                                      evaluate_rates(ch, sr.precoder.matrix()));
        rec.iters_outer = sr.outer_iters;
        rec.iters_fp = sr.fp_iters;
        rec.iters_sca = sr.sca_iters;
        rec.converged = sr.converged;
        rec.wall_ms = sr.wall_ms;
        out.records.push_back(std::move(rec));
      }
      if (sel.agnostic) {
        const OptimizerConfig oc = solver_config(cfg, dims, w_c, total_power);
        // The eavesdropper-blind baseline solved in place, so the record
        // keeps the iteration counts.
        ChannelSet blind = ch;
        blind.eve = ComplexMatrix::Zero(ch.eve.rows(), ch.eve.cols());
        const SolveResult sr = solve(blind, oc);
        SweepRecord rec = make_record(trial_seed, "agnostic", w_c, snr, dims.n_streams,
                                      evaluate_rates(ch, sr.precoder.matrix()));
        rec.iters_outer = sr.outer_iters;
        rec.iters_fp = sr.fp_iters;
        rec.iters_sca = sr.sca_iters;
        rec.converged = sr.converged;
        rec.wall_ms = sr.wall_ms;
        out.records.push_back(std::move(rec));
      }
      if (sel.gsvd) {
        SweepRecord rec =
            make_record(trial_seed, "gsvd", w_c, snr, dims.n_streams, gsvd_rates);
        rec.wall_ms = gsvd_ms;
        out.records.push_back(std::move(rec));
      }
      if (sel.sub) {
        SweepRecord rec =
            make_record(trial_seed, "sub", w_c, snr, dims.n_streams, sub_rates);
        rec.wall_ms = sub_ms;
        out.records.push_back(std::move(rec));
      }
      if (sel.timeshare && with_timeshare) {
        SweepRecord rec;
        rec.trial_seed = trial_seed;
        rec.method = "timeshare";
        rec.w_c = w_c;
        rec.w_s = 1.0 - w_c;
        rec.snr_db = snr;
        rec.n_streams = dims.n_streams;
        rec.secrecy = w_c * gsvd_point.secrecy + (1.0 - w_c) * sub_point.secrecy;
        rec.sensing = w_c * gsvd_point.sensing + (1.0 - w_c) * sub_point.sensing;
        rec.objective = w_c * rec.secrecy + (1.0 - w_c) * rec.sensing;
        rec.wall_ms = 0.0;
        out.records.push_back(std::move(rec));
      }
    }
  }
  return out;
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg,
                                   const std::vector<double>& weights,
                                   bool with_timeshare) {
  cfg.validate();
  const SystemDims dims = resolved_dims(cfg);
  const MethodSelection sel = select_methods(cfg.methods);
  if (weights.empty()) return {};

  std::vector<TrialOutput> outputs(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, effective_thread_count(cfg.threads), [&](int t) {
    const std::uint64_t trial_seed = cfg.base_seed + static_cast<std::uint64_t>(t);
    outputs[static_cast<std::size_t>(t)] =
        run_trial(cfg, dims, trial_seed, weights, sel, with_timeshare);
  });

  std::vector<SweepRecord> records;
  for (auto& o : outputs) {
    records.insert(records.end(), o.records.begin(), o.records.end());
  }
  sort_records(records);
  return records;
}

}  // namespace

std::vector<SweepRecord> run_pareto(const ExperimentConfig& cfg) {
  return run_sweep(cfg, cfg.weights_or_default(), /*with_timeshare=*/true);
}

std::vector<SweepRecord> run_sumrate_vs_snr(const ExperimentConfig& cfg) {
  std::vector<double> weights{0.5};
  if (cfg.weight_sweep_override && cfg.weight_sweep_override->size() == 1) {
    weights = *cfg.weight_sweep_override;
  }
  ExperimentConfig adjusted = cfg;
  if (adjusted.dims.n_streams <= 0) {
    adjusted.dims.n_streams = std::max(1, adjusted.dims.n_t / 2);
  }
  adjusted.methods = cfg.methods;
  return run_sweep(adjusted, weights, /*with_timeshare=*/false);
}

std::string DecomposeReport::to_text() const {
  std::ostringstream os;
  os << "transmit dimension: " << n_t << "\n";
  os << "label  dim  dof_weight\n";
  for (std::size_t i = 0; i < 8; ++i) {
    os << subspace_label_name(static_cast<SubspaceLabel>(i)) << "\t" << dims[i] << "\t"
       << weights[i] << "\n";
  }
  os << "w_c = " << w_c << ", w_s = " << (1.0 - w_c) << "\n";
  os << "d_max = " << d_max << "\n";
  os << "useful_dim = " << useful_dim << "\n";
  return os.str();
}

std::string DecomposeReport::to_csv() const {
  std::ostringstream os;
  os << "label,dim,dof_weight\n";
  for (std::size_t i = 0; i < 8; ++i) {
    os << subspace_label_name(static_cast<SubspaceLabel>(i)) << "," << dims[i] << ","
       << fmt_double(weights[i]) << "\n";
  }
  os << "d_max," << fmt_double(d_max) << ",\n";
  os << "useful_dim," << useful_dim << ",\n";
  return os.str();
}

DecomposeReport run_decompose(const ExperimentConfig& cfg) {
  cfg.validate();
  const ChannelSet ch =
      cfg.label_dims ? make_structured_channels(*cfg.label_dims, cfg.base_seed)
                     : sample_channel_set(resolved_dims(cfg), cfg.base_seed,
                                          cfg.sensing_ridge);
  const SubspaceDecomposition dec = decompose(ch, cfg.tol);
  const std::vector<double> weights = cfg.weights_or_default();
  const double w_c = weights.empty() ? 0.5 : weights.front();
  const DofReport dof = dof_table(dec, Weights::from_comm(w_c));

  DecomposeReport rep;
  rep.n_t = dec.total_dim();
  rep.w_c = w_c;
  for (std::size_t i = 0; i < 8; ++i) {
    rep.dims[i] = dec.dim(static_cast<SubspaceLabel>(i));
    rep.weights[i] = dof.weight[i];
  }
  rep.d_max = dof.d_max;
  rep.useful_dim = dof.useful_dim;
  return rep;
}

OutputPaths OutputPaths::in_dir(const std::filesystem::path& dir, bool plot) {
  OutputPaths p;
  p.raw_csv = dir / "raw.csv";
  p.aggregate_csv = dir / "aggregate.csv";
  if (plot) p.plot_svg = dir / "region.svg";
  return p;
}

std::string records_to_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  os << kRawHeader << "\n";
  for (const auto& r : records) {
    os << r.trial_seed << ',' << r.method << ',' << fmt_double(r.w_c) << ','
       << fmt_double(r.w_s) << ',' << fmt_double(r.snr_db) << ',' << r.n_streams << ','
       << fmt_double(r.secrecy) << ',' << fmt_double(r.sensing) << ','
       << fmt_double(r.objective) << ',' << r.iters_outer << ',' << r.iters_fp << ','
       << r.iters_sca << ',' << (r.converged ? 1 : 0) << ','
       << /* wall_ms deliberately blank: measured time goes to the aggregate
             file so raw bytes stay reproducible */ "\n";
  }
  return os.str();
}

std::vector<SweepRecord> records_from_csv(const std::string& text) {
  std::vector<SweepRecord> records;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      if (line != kRawHeader) {
        throw InvalidInputError("records_from_csv: unexpected header");
      }
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) fields.push_back(tok);
    while (fields.size() < 14) fields.emplace_back();
    SweepRecord r;
    r.trial_seed = std::stoull(fields[0]);
    r.method = fields[1];
    r.w_c = std::stod(fields[2]);
    r.w_s = std::stod(fields[3]);
    r.snr_db = std::stod(fields[4]);
    r.n_streams = std::stoi(fields[5]);
    r.secrecy = std::stod(fields[6]);
    r.sensing = std::stod(fields[7]);
    r.objective = std::stod(fields[8]);
    r.iters_outer = std::stoi(fields[9]);
    r.iters_fp = std::stol(fields[10]);
    r.iters_sca = std::stol(fields[11]);
    r.converged = fields[12] == "1";
    r.wall_ms = fields[13].empty() ? 0.0 : std::stod(fields[13]);
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

struct GroupKey {
  std::string method;
  double w_c;
  double w_s;
  double snr_db;
  int n_streams;

  bool operator<(const GroupKey& o) const {
    if (method != o.method) return method < o.method;
    if (w_c != o.w_c) return w_c < o.w_c;
    if (snr_db != o.snr_db) return snr_db < o.snr_db;
    return n_streams < o.n_streams;
  }
};

struct Accumulator {
  std::vector<double> secrecy, sensing, objective, wall;
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::string aggregate_csv_text(const std::vector<SweepRecord>& records) {
  std::map<GroupKey, Accumulator> groups;
  for (const auto& r : records) {
    auto& acc = groups[GroupKey{r.method, r.w_c, r.w_s, r.snr_db, r.n_streams}];
    acc.secrecy.push_back(r.secrecy);
    acc.sensing.push_back(r.sensing);
    acc.objective.push_back(r.objective);
    acc.wall.push_back(r.wall_ms);
  }
  std::ostringstream os;
  os << "method,w_c,w_s,snr_db,N_s,trials,R_sec_mean,R_sec_std,R_s_mean,R_s_std,"
        "objective_mean,objective_std,wall_ms_mean,wall_ms_std\n";
  for (const auto& [key, acc] : groups) {
    os << key.method << ',' << fmt_double(key.w_c) << ',' << fmt_double(key.w_s) << ','
       << fmt_double(key.snr_db) << ',' << key.n_streams << ',' << acc.secrecy.size()
       << ',' << fmt_double(mean_of(acc.secrecy)) << ',' << fmt_double(std_of(acc.secrecy))
       << ',' << fmt_double(mean_of(acc.sensing)) << ',' << fmt_double(std_of(acc.sensing))
       << ',' << fmt_double(mean_of(acc.objective)) << ','
       << fmt_double(std_of(acc.objective)) << ',' << fmt_double(mean_of(acc.wall)) << ','
       << fmt_double(std_of(acc.wall)) << "\n";
  }
  return os.str();
}

std::string svg_plot_text(const std::vector<SweepRecord>& records) {
  // Mean operating point per (method, snr, w_c), drawn as polyline plus
  // markers in the (R_s, R_sec) plane.
  std::map<GroupKey, Accumulator> groups;
  for (const auto& r : records) {
    auto& acc = groups[GroupKey{r.method, r.w_c, r.w_s, r.snr_db, r.n_streams}];
    acc.secrecy.push_back(r.secrecy);
    acc.sensing.push_back(r.sensing);
  }
  struct Pt {
    double x, y, w_c;
  };
  std::map<std::string, std::vector<Pt>> series;  // key: method@snr
  double x_max = 1e-9, y_max = 1e-9;
  for (const auto& [key, acc] : groups) {
    std::ostringstream name;
    name << key.method << " @ " << key.snr_db << " dB";
    const double x = mean_of(acc.sensing);
    const double y = mean_of(acc.secrecy);
    series[name.str()].push_back({x, y, key.w_c});
    x_max = std::max(x_max, x);
    y_max = std::max(y_max, y);
  }
  for (auto& [name, pts] : series) {
    std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.w_c < b.w_c; });
  }

  const double width = 720, height = 520, ml = 70, mr = 170, mt = 30, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + pw * x / (1.1 * x_max); };
  auto py = [&](double y) { return mt + ph * (1.0 - y / (1.1 * y_max)); };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf"};
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
     << height << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw << "' y2='"
     << mt + ph << "' stroke='black'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << mt + ph
     << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = 1.1 * x_max * i / 5.0;
    const double fy = 1.1 * y_max * i / 5.0;
    os << "<text x='" << px(fx) << "' y='" << mt + ph + 20
       << "' font-size='11' text-anchor='middle'>" << std::round(fx * 100) / 100
       << "</text>\n";
    os << "<text x='" << ml - 8 << "' y='" << py(fy) + 4
       << "' font-size='11' text-anchor='end'>" << std::round(fy * 100) / 100
       << "</text>\n";
  }
  os << "<text x='" << ml + pw / 2 << "' y='" << height - 12
     << "' font-size='13' text-anchor='middle'>sensing rate R_s [bits]</text>\n";
  os << "<text x='16' y='" << mt + ph / 2
     << "' font-size='13' transform='rotate(-90 16 " << mt + ph / 2
     << ")' text-anchor='middle'>secrecy rate R_sec [bits]</text>\n";

  int ci = 0;
  double legend_y = mt + 10;
  for (const auto& [name, pts] : series) {
    const char* color = kColors[ci % 7];
    std::ostringstream poly;
    for (const auto& p : pts) poly << px(p.x) << ',' << py(p.y) << ' ';
    os << "<polyline points='" << poly.str() << "' fill='none' stroke='" << color
       << "' stroke-width='1.5'/>\n";
    for (const auto& p : pts) {
      os << "<circle cx='" << px(p.x) << "' cy='" << py(p.y) << "' r='2.6' fill='"
         << color << "'/>\n";
    }
    os << "<rect x='" << ml + pw + 12 << "' y='" << legend_y - 9
       << "' width='10' height='10' fill='" << color << "'/>\n";
    os << "<text x='" << ml + pw + 27 << "' y='" << legend_y
       << "' font-size='11'>" << name << "</text>\n";
    legend_y += 18;
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace

void emit_outputs(const std::vector<SweepRecord>& records, const OutputPaths& paths) {
  write_file(paths.raw_csv, records_to_csv(records));
  write_file(paths.aggregate_csv, aggregate_csv_text(records));
  if (paths.plot_svg) {
    write_file(*paths.plot_svg, svg_plot_text(records));
  }
}

}  // namespace mems
