#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssc/error.hpp"
#include "ssc/experiments.hpp"
#include "ssc/io.hpp"
#include "ssc/markov.hpp"
#include "ssc/metrics.hpp"
#include "ssc/spectral.hpp"
#include "ssc/synth.hpp"
#include "ssc/taxi.hpp"

namespace ssc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file " + path);
  return in;
}

/// Runs `write` against the file at `path`, or against `out` when the path is empty or "-".
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write output file " + path);
  write(file);
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

json envelope(const Matrix& m, const char* kind) {
  std::ostringstream s;
  io::write_matrix_json(s, m, kind);
  return json::parse(s.str());
}

Trajectory load_trajectory(const std::string& path, std::optional<std::size_t> p) {
  auto in = open_input(path);
  return io::read_trajectory(in, p);
}

std::optional<std::size_t> optional_p(long long p) {
  if (p == 0) return std::nullopt;
  if (p < 0) throw ParameterError("-p must be positive");
  return static_cast<std::size_t>(p);
}

void report_truth(const std::string& truth_path, const PartitionLabels& estimate, std::ostream& out) {
  if (truth_path.empty()) return;
  auto in = open_input(truth_path);
  const PartitionLabels truth = io::read_partition_csv(in);
  if (truth.size() != estimate.size()) {
    throw DimensionError("--truth has " + std::to_string(truth.size()) + " states, estimate has " +
                         std::to_string(estimate.size()));
  }
  if (truth.num_blocks() != estimate.num_blocks()) {
    throw DimensionError("--truth has " + std::to_string(truth.num_blocks()) +
                         " blocks, estimate has " + std::to_string(estimate.num_blocks()));
  }
  out << "misclassification," << io::format_double(misclassification_rate(truth, estimate)) << '\n';
}

struct Options {
  std::string input;
  std::string output;
  long long p = 0;
  int r = 0;
  long long n = 0;
  double k = 0.0;
  std::uint64_t seed = 0;
  int restarts = 20;
  std::string format = "csv";
  bool with_empirical = false;
  std::string truth;
  bool segments = false;
  double cell_lat = taxi::GridSpec{}.cell_lat;
  double cell_lon = taxi::GridSpec{}.cell_lon;
  std::vector<double> bbox;
  std::size_t min_visits = 200;
  std::string initial = "0";
  std::string method = "aggregate";
  std::string generator = "low_rank";
  double delta = 1.0;
  std::string transition_output;
  std::string truth_output;
  int threads = 0;
  int clock_offset = 0;
  taxi::TripSchema schema;
};

KMeansConfig kmeans_config(const Options& o) {
  KMeansConfig cfg;
  cfg.restarts = o.restarts;
  cfg.seed = o.seed;
  return cfg;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const StochasticMatrix p = StochasticMatrix::from_matrix(io::read_matrix_file(o.input));
  std::size_t n = 0;
  if (o.n > 0) {
    n = static_cast<std::size_t>(o.n);
  } else if (o.k > 0.0) {
    if (o.r < 1) throw ParameterError("-k needs -r to set the trajectory length");
    n = trajectory_length(o.k, static_cast<int>(p.rows()), o.r);
  } else {
    throw ParameterError("simulate needs -n or -k");
  }
  InitialState initial;
  if (o.initial == "stationary") {
    initial = stationary_distribution(p).probs;
  } else {
    StateIndex s = 0;
    try {
      std::size_t used = 0;
      s = static_cast<StateIndex>(std::stol(o.initial, &used));
      if (used != o.initial.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParameterError("--initial must be a state index or \"stationary\"");
    }
    initial = s;
  }
  const Trajectory traj = simulate_trajectory(p, initial, n, o.seed);
  emit(o.output, out, [&](std::ostream& s) { io::write_trajectory(s, traj); });
  return 0;
}

int cmd_estimate(const Options& o, std::ostream& out) {
  const Trajectory traj = load_trajectory(o.input, optional_p(o.p));
  const FrequencyMatrix f_tilde = empirical_frequency(traj);
  const LowRankEstimate est = estimate_low_rank(f_tilde, o.r);
  json j;
  j["p"] = traj.num_states();
  j["r"] = o.r;
  j["transitions"] = traj.transitions();
  j["degenerate_gap"] = est.degenerate_gap;
  j["F_hat"] = envelope(est.F_hat.matrix(), "frequency");
  j["P_hat"] = envelope(est.P_hat.matrix(), "transition");
  json diag;
  try {
    const ChainDiagnostics d = chain_diagnostics(est.P_hat, o.r);
    diag = {{"pi_min", d.pi_min},
            {"pi_max", d.pi_max},
            {"kappa", d.kappa},
            {"r_tilde", d.r_tilde},
            {"sigma_r", d.sigma_r},
            {"sigma_r_plus_1", d.sigma_r_plus_1},
            {"lambda2", d.lambda2 ? json(*d.lambda2) : json(nullptr)},
            {"tau_star", d.tau_star ? json(*d.tau_star) : json(nullptr)}};
  } catch (const Error& e) {
    diag = {{"error", e.what()}};
  }
  j["diagnostics"] = std::move(diag);
  if (o.with_empirical) {
    j["F_tilde"] = envelope(f_tilde.matrix(), "frequency");
    j["P_tilde"] = envelope(empirical_transition(traj).matrix(), "transition");
  }
  emit(o.output, out, [&](std::ostream& s) { s << j.dump(2) << '\n'; });
  return 0;
}

int cmd_subspaces(const Options& o, std::ostream& out) {
  const Trajectory traj = load_trajectory(o.input, optional_p(o.p));
  const LeadingSubspaces sub = leading_subspaces(traj, o.r);
  json j;
  j["p"] = traj.num_states();
  j["r"] = o.r;
  j["degenerate_gap"] = sub.degenerate_gap;
  j["U_F"] = envelope(sub.U_F.basis, "subspace");
  j["V_F"] = envelope(sub.V_F.basis, "subspace");
  j["U_P"] = envelope(sub.U_P.basis, "subspace");
  j["V_P"] = envelope(sub.V_P.basis, "subspace");
  emit(o.output, out, [&](std::ostream& s) { s << j.dump(2) << '\n'; });
  return 0;
}

int cmd_partition(const Options& o, std::ostream& out, std::ostream& err, bool lump) {
  const Trajectory traj = load_trajectory(o.input, optional_p(o.p));
  const KMeansConfig cfg = kmeans_config(o);
  const PartitionLabels labels = lump ? spectral_lumpable_partition(traj, o.r, cfg)
                                      : spectral_state_aggregation(traj, o.r, cfg);
  emit(o.output, out, [&](std::ostream& s) { io::write_partition_csv(s, labels); });
  std::ostringstream report;
  report_truth(o.truth, labels, report);
  // Keep stdout clean for the partition when no output file was given.
  if (!report.str().empty()) {
    if (o.output.empty() || o.output == "-") {
      err << report.str();
    } else {
      out << report.str();
    }
  }
  return 0;
}

int cmd_bench(const Options& o, std::ostream& out) {
  auto in = open_input(o.input);
  std::stringstream text;
  text << in.rdbuf();
  SweepConfig cfg = parse_sweep_config(text.str());
  if (o.threads > 0) cfg.threads = o.threads;
  if (o.output.empty()) throw ParameterError("bench needs --output DIR");
  const fs::path dir = ensure_dir(o.output);
  const SweepResult result = run_sweep(cfg);
  emit((dir / "sweep.csv").string(), out, [&](std::ostream& s) { write_sweep_csv(s, result); });
  emit((dir / "summary.json").string(), out, [&](std::ostream& s) { write_summary_json(s, result); });
  emit((dir / "timings.csv").string(), out, [&](std::ostream& s) { write_timings_csv(s, result); });
  out << "records," << result.records.size() << "\ndegraded," << (result.degraded ? "true" : "false")
      << '\n';
  return result.degraded ? 3 : 0;
}

int cmd_taxi(const Options& o, std::ostream& out) {
  if (o.output.empty()) throw ParameterError("taxi needs --output DIR");
  taxi::PipelineConfig cfg;
  cfg.schema = o.schema;
  cfg.schema.clock_offset_seconds = o.clock_offset;
  cfg.grid.cell_lat = o.cell_lat;
  cfg.grid.cell_lon = o.cell_lon;
  if (!o.bbox.empty()) {
    if (o.bbox.size() != 4) throw ParameterError("--bbox takes lat_min,lat_max,lon_min,lon_max");
    cfg.grid.box = {o.bbox[0], o.bbox[1], o.bbox[2], o.bbox[3]};
  }
  cfg.min_visits = o.min_visits;
  cfg.stratify = o.segments;
  cfg.r = o.r;
  cfg.kmeans = kmeans_config(o);
  if (o.method == "aggregate") {
    cfg.method = taxi::CompressionMethod::Aggregate;
  } else if (o.method == "lump") {
    cfg.method = taxi::CompressionMethod::Lump;
  } else {
    throw ParameterError("--method must be aggregate or lump");
  }
  if (o.format != "csv" && o.format != "geojson") {
    throw ParameterError("taxi --format must be csv or geojson");
  }
  const auto partition_format =
      o.format == "geojson" ? taxi::PartitionFormat::GeoJson : taxi::PartitionFormat::Csv;

  auto in = open_input(o.input);
  const taxi::PipelineResult result = taxi::run_pipeline(in, cfg);
  const fs::path root = ensure_dir(o.output);

  json summary;
  summary["grid"] = {{"lat_min", cfg.grid.box.lat_min},
                     {"lat_max", cfg.grid.box.lat_max},
                     {"lon_min", cfg.grid.box.lon_min},
                     {"lon_max", cfg.grid.box.lon_max},
                     {"cell_lat", cfg.grid.cell_lat},
                     {"cell_lon", cfg.grid.cell_lon},
                     {"n_lat", cfg.grid.n_lat()},
                     {"n_lon", cfg.grid.n_lon()},
                     {"note", "bounding box and cell sizes are configurable defaults, not values "
                              "fixed by the method"}};
  summary["min_visits"] = cfg.min_visits;
  summary["r"] = cfg.r;
  summary["method"] = o.method;
  summary["parse"] = {{"rows_in", result.parse_stats.rows_in},
                      {"parsed", result.parse_stats.parsed},
                      {"dropped_bad", result.parse_stats.dropped_bad}};
  if (result.stratify_stats) {
    summary["stratify"] = {{"trips_in", result.stratify_stats->trips_in},
                           {"assigned", result.stratify_stats->assigned},
                           {"dropped", result.stratify_stats->dropped}};
  }
  json segs = json::array();
  for (const auto& seg : result.segments) {
    const fs::path dir = cfg.stratify ? ensure_dir((root / seg.name).string()) : root;
    emit((dir / "counts.csv").string(), out,
         [&](std::ostream& s) { io::write_matrix_csv(s, seg.counts.counts); });
    emit((dir / "F_tilde.json").string(), out,
         [&](std::ostream& s) { io::write_matrix_json(s, seg.counts.F_tilde.matrix(), "frequency"); });
    emit((dir / "P_tilde.json").string(), out,
         [&](std::ostream& s) { io::write_matrix_json(s, seg.counts.P_tilde.matrix(), "transition"); });
    const char* name = partition_format == taxi::PartitionFormat::Csv ? "partition.csv" : "partition.geojson";
    emit((dir / name).string(), out, [&](std::ostream& s) {
      taxi::export_partition(s, seg.states, cfg.grid, seg.partition, partition_format);
    });
    segs.push_back({{"name", seg.name},
                    {"states", seg.states.size()},
                    {"discretize",
                     {{"trips_in", seg.discretize_stats.trips_in},
                      {"kept", seg.discretize_stats.kept},
                      {"dropped_out_of_box", seg.discretize_stats.dropped_out_of_box}}},
                    {"filter",
                     {{"pairs_in", seg.filter_stats.pairs_in},
                      {"kept", seg.filter_stats.kept},
                      {"dropped", seg.filter_stats.dropped},
                      {"cells_seen", seg.filter_stats.cells_seen},
                      {"cells_kept", seg.filter_stats.cells_kept}}}});
  }
  summary["segments"] = std::move(segs);
  emit((root / "summary.json").string(), out, [&](std::ostream& s) { s << summary.dump(2) << '\n'; });
  return 0;
}

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.p < 1 || o.r < 1) throw ParameterError("generate needs -p and -r");
  const int p = static_cast<int>(o.p);
  GroundTruthChain truth = [&] {
    if (o.generator == "low_rank") return gen_low_rank_chain(p, o.r, o.seed);
    if (o.generator == "imbalanced") return gen_imbalanced_chain(p, o.r, o.delta, o.seed);
    if (o.generator == "aggregatable") return gen_aggregatable_chain(p, o.r, o.seed);
    if (o.generator == "lumpable") return gen_lumpable_chain(p, o.r, o.seed);
    throw ParameterError("--generator must be low_rank, imbalanced, aggregatable or lumpable");
  }();
  emit(o.output, out, [&](std::ostream& s) { io::write_ground_truth_json(s, truth); });
  if (!o.transition_output.empty()) io::write_matrix_file(o.transition_output, truth.P.matrix(), "transition");
  if (!o.truth_output.empty()) {
    if (!truth.partition) throw ParameterError("--truth-output needs a generator with a partition");
    emit(o.truth_output, out, [&](std::ostream& s) { io::write_partition_csv(s, *truth.partition); });
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral state compression for Markov chains"};
  app.require_subcommand(1);
  Options o;

  auto add_io = [&](CLI::App* sub, const char* input_help) {
    sub->add_option("--input,-i", o.input, input_help)->required();
    sub->add_option("--output,-o", o.output, "Output path (stdout when omitted)");
  };
  auto add_kmeans = [&](CLI::App* sub) {
    sub->add_option("--restarts", o.restarts, "k-means restarts")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "k-means seed");
  };

  auto* simulate = app.add_subcommand("simulate", "Sample a trajectory from a transition matrix");
  add_io(simulate, "Transition matrix (.csv or .json)");
  simulate->add_option("-n", o.n, "Number of transitions")->check(CLI::PositiveNumber);
  simulate->add_option("-k", o.k, "Length factor: n = round(k p r log^2 p)")->check(CLI::PositiveNumber);
  simulate->add_option("-r", o.r, "Rank used with -k");
  simulate->add_option("--seed", o.seed, "Random seed");
  simulate->add_option("--initial", o.initial, "Initial state index or \"stationary\"")->capture_default_str();

  auto* estimate = app.add_subcommand("estimate", "Low-rank spectral estimate of F and P");
  add_io(estimate, "Trajectory file");
  estimate->add_option("-p", o.p, "Number of states (default: largest index + 1)");
  estimate->add_option("-r", o.r, "Target rank")->required()->check(CLI::PositiveNumber);
  estimate->add_flag("--with-empirical", o.with_empirical, "Also emit the empirical F~ and P~");

  auto* subspaces = app.add_subcommand("subspaces", "Leading singular subspaces of F~ and P~");
  add_io(subspaces, "Trajectory file");
  subspaces->add_option("-p", o.p, "Number of states");
  subspaces->add_option("-r", o.r, "Subspace dimension")->required()->check(CLI::PositiveNumber);

  auto* aggregate = app.add_subcommand("aggregate", "Spectral state aggregation");
  auto* lump = app.add_subcommand("lump", "Spectral lumpable partition");
  for (auto* sub : {aggregate, lump}) {
    add_io(sub, "Trajectory file");
    sub->add_option("-p", o.p, "Number of states");
    sub->add_option("-r", o.r, "Number of blocks")->required()->check(CLI::PositiveNumber);
    sub->add_option("--truth", o.truth, "Partition CSV to score against");
    add_kmeans(sub);
  }

  auto* bench = app.add_subcommand("bench", "Run a seeded Monte-Carlo sweep");
  bench->add_option("--input,-i", o.input, "Sweep config (JSON)")->required();
  bench->add_option("--output,-o", o.output, "Output directory")->required();
  bench->add_option("--threads", o.threads, "Worker threads (overrides the config)");

  auto* taxi_cmd = app.add_subcommand("taxi", "Trip records to transition data and partitions");
  taxi_cmd->add_option("--input,-i", o.input, "Trip CSV")->required();
  taxi_cmd->add_option("--output,-o", o.output, "Output directory")->required();
  taxi_cmd->add_option("-r", o.r, "Number of blocks")->default_val(2)->check(CLI::PositiveNumber);
  taxi_cmd->add_option("--method", o.method, "aggregate or lump")->capture_default_str();
  taxi_cmd->add_option("--format", o.format, "Partition format: csv or geojson")->capture_default_str();
  taxi_cmd->add_flag("--segments", o.segments, "Split into morning, afternoon and evening");
  taxi_cmd->add_option("--grid-cell-lat", o.cell_lat, "Cell height in degrees")->capture_default_str();
  taxi_cmd->add_option("--grid-cell-lon", o.cell_lon, "Cell width in degrees")->capture_default_str();
  taxi_cmd->add_option("--bbox", o.bbox, "lat_min,lat_max,lon_min,lon_max")->delimiter(',')->expected(4);
  taxi_cmd->add_option("--min-visits", o.min_visits, "Drop cells with fewer visits")->capture_default_str()
      ->check(CLI::PositiveNumber);
  taxi_cmd->add_option("--clock-offset", o.clock_offset, "Seconds added to pickup clock times");
  taxi_cmd->add_option("--col-pickup-time", o.schema.pickup_time, "")->capture_default_str();
  taxi_cmd->add_option("--col-pickup-lat", o.schema.pickup_lat, "")->capture_default_str();
  taxi_cmd->add_option("--col-pickup-lon", o.schema.pickup_lon, "")->capture_default_str();
  taxi_cmd->add_option("--col-dropoff-lat", o.schema.dropoff_lat, "")->capture_default_str();
  taxi_cmd->add_option("--col-dropoff-lon", o.schema.dropoff_lon, "")->capture_default_str();
  add_kmeans(taxi_cmd);

  auto* generate = app.add_subcommand("generate", "Draw a ground-truth chain");
  generate->add_option("--generator", o.generator, "low_rank, imbalanced, aggregatable or lumpable")->capture_default_str();
  generate->add_option("-p", o.p, "Number of states")->required();
  generate->add_option("-r", o.r, "Rank or number of blocks")->required();
  generate->add_option("--delta", o.delta, "Imbalance factor")->capture_default_str();
  generate->add_option("--seed", o.seed, "Random seed");
  generate->add_option("--output,-o", o.output, "Ground-truth bundle (JSON)");
  generate->add_option("--transition-output", o.transition_output, "Write P as a matrix file");
  generate->add_option("--truth-output", o.truth_output, "Write the partition CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(o, out);
    if (*estimate) return cmd_estimate(o, out);
    if (*subspaces) return cmd_subspaces(o, out);
    if (*aggregate) return cmd_partition(o, out, err, false);
    if (*lump) return cmd_partition(o, out, err, true);
    if (*bench) return cmd_bench(o, out);
    if (*taxi_cmd) return cmd_taxi(o, out);
    if (*generate) return cmd_generate(o, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace ssc::cli
