#include "ssc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "ssc/error.hpp"
#include "ssc/io.hpp"
#include "ssc/markov.hpp"
#include "ssc/random.hpp"
#include "ssc/spectral.hpp"
#include "ssc/svd.hpp"
#include "ssc/synth.hpp"

namespace ssc {

namespace {

using nlohmann::json;

constexpr double kDegradedFraction = 0.10;
constexpr const char* kLengthRule = "n = round(k * p * r * log(p)^2)";

const std::set<std::string> kGenerators = {"low_rank", "imbalanced", "aggregatable", "lumpable"};

GroundTruthChain generate(const GeneratorSpec& spec, int p, int r, std::uint64_t seed) {
  if (spec.name == "low_rank") return gen_low_rank_chain(p, r, seed);
  if (spec.name == "imbalanced") return gen_imbalanced_chain(p, r, spec.delta, seed);
  if (spec.name == "aggregatable") return gen_aggregatable_chain(p, r, seed);
  if (spec.name == "lumpable") return gen_lumpable_chain(p, r, seed);
  throw ConfigError("unknown generator \"" + spec.name + "\"");
}

struct NamedLoss {
  std::string estimator;
  LossReport loss;
};

LossReport matrix_losses(const FrequencyMatrix& f_est, const StochasticMatrix& p_est,
                         const GroundTruthChain& truth) {
  LossReport loss;
  loss.l1_total = l1_matrix_distance(f_est.matrix(), truth.F.matrix());
  const auto rows = row_tv(p_est, truth.P);
  loss.avg_row_tv = rows.avg;
  loss.max_row_tv = rows.max;
  return loss;
}

LossReport subspace_loss(const Matrix& est, const Matrix& truth) {
  LossReport loss;
  loss.sin_theta_spectral = sin_theta(est, truth, SinThetaNorm::Spectral);
  loss.sin_theta_frobenius = sin_theta(est, truth, SinThetaNorm::Frobenius);
  return loss;
}

LossReport partition_loss(const PartitionLabels& truth, const PartitionLabels& est) {
  LossReport loss;
  loss.misclassification = misclassification_rate(truth, est);
  return loss;
}

std::vector<NamedLoss> evaluate(const SweepConfig& config, const GroundTruthChain& truth,
                                const Trajectory& traj) {
  const int r = config.r;
  const auto& gen = config.generator.name;
  std::vector<NamedLoss> out;
  if (gen == "aggregatable") {
    out.push_back({"aggregation", partition_loss(*truth.partition,
                                                 spectral_state_aggregation(traj, r, config.kmeans))});
    return out;
  }
  if (gen == "lumpable") {
    out.push_back({"lumpable", partition_loss(*truth.partition,
                                              spectral_lumpable_partition(traj, r, config.kmeans))});
    return out;
  }

  const FrequencyMatrix f_tilde = empirical_frequency(traj);
  const StochasticMatrix p_tilde = empirical_transition(traj);
  out.push_back({"empirical", matrix_losses(f_tilde, p_tilde, truth)});
  const LowRankEstimate est = estimate_low_rank(f_tilde, r);
  out.push_back({"spectral", matrix_losses(est.F_hat, est.P_hat, truth)});

  if (config.subspaces) {
    const auto hat = leading_subspaces(f_tilde.matrix(), p_tilde.matrix(), r);
    const auto exact = leading_subspaces(truth.F.matrix(), truth.P.matrix(), r);
    out.push_back({"UF", subspace_loss(hat.U_F.basis, exact.U_F.basis)});
    out.push_back({"VF", subspace_loss(hat.V_F.basis, exact.V_F.basis)});
    out.push_back({"UP", subspace_loss(hat.U_P.basis, exact.U_P.basis)});
    out.push_back({"VP", subspace_loss(hat.V_P.basis, exact.V_P.basis)});
  }
  return out;
}

std::uint64_t k_bits(double k) { return std::bit_cast<std::uint64_t>(k); }

/// Everything produced for one (p, trial): the chain is shared across k.
std::vector<SweepRecord> run_task(const SweepConfig& config, int p, int trial) {
  std::vector<SweepRecord> out;
  const auto up = static_cast<std::uint64_t>(p);
  const auto ut = static_cast<std::uint64_t>(trial);
  std::optional<GroundTruthChain> truth;
  std::string chain_error;
  try {
    truth = generate(config.generator, p, config.r, derive_seed(config.base_seed, {up, ut}));
  } catch (const std::exception& e) {
    chain_error = e.what();
  }

  for (const double k : config.k_values) {
    SweepRecord base;
    base.p = p;
    base.k = k;
    base.n = trajectory_length(k, p, config.r);
    base.trial = trial;
    base.seed = derive_seed(config.base_seed, {up, k_bits(k), ut});
    if (!truth) {
      base.failed = true;
      base.error = chain_error;
      out.push_back(std::move(base));
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      const InitialState initial = config.initial == InitialMode::Fixed
                                       ? InitialState{config.fixed_state}
                                       : InitialState{truth->pi.probs};
      const Trajectory traj = simulate_trajectory(truth->P, initial, base.n, base.seed);
      auto losses = evaluate(config, *truth, traj);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (auto& named : losses) {
        SweepRecord rec = base;
        rec.estimator = std::move(named.estimator);
        rec.loss = named.loss;
        rec.wall_seconds = secs;
        out.push_back(std::move(rec));
      }
    } catch (const std::exception& e) {
      base.failed = true;
      base.error = e.what();
      base.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.push_back(std::move(base));
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + '"';
}

json config_json(const SweepConfig& c) {
  return json{{"figure", c.figure},
              {"generator", {{"name", c.generator.name}, {"delta", c.generator.delta}}},
              {"p_values", c.p_values},
              {"r", c.r},
              {"k_values", c.k_values},
              {"trials", c.trials},
              {"base_seed", c.base_seed},
              {"initial_state", c.initial == InitialMode::Fixed ? "fixed" : "stationary"},
              {"fixed_state", c.fixed_state},
              {"subspaces", c.subspaces},
              {"restarts", c.kmeans.restarts}};
}

}  // namespace

std::size_t trajectory_length(double k, int p, int r) {
  if (!(k > 0.0) || p < 2 || r < 1) {
    throw ParameterError("trajectory_length: need k > 0, p >= 2, r >= 1");
  }
  const double lp = std::log(static_cast<double>(p));
  return static_cast<std::size_t>(std::llround(k * p * r * lp * lp));
}

void validate_sweep_config(const SweepConfig& c) {
  if (!kGenerators.count(c.generator.name)) {
    throw ConfigError("generator must be one of low_rank, imbalanced, aggregatable, lumpable");
  }
  if (c.generator.name == "imbalanced" && !(c.generator.delta >= 1.0)) {
    throw ConfigError("imbalanced generator needs delta >= 1");
  }
  if (c.p_values.empty()) throw ConfigError("p_values must be nonempty");
  if (c.k_values.empty()) throw ConfigError("k_values must be nonempty");
  if (c.trials < 1) throw ConfigError("trials must be at least 1");
  if (c.r < 1) throw ConfigError("r must be at least 1");
  for (const int p : c.p_values) {
    if (p < 2) throw ConfigError("every p must be at least 2");
    if (c.r > p) throw ConfigError("r must not exceed p");
    if (c.generator.name == "lumpable" && 2 * c.r > p) {
      throw ConfigError("lumpable generator needs r <= p/2");
    }
    if (c.initial == InitialMode::Fixed && (c.fixed_state < 0 || c.fixed_state >= p)) {
      throw ConfigError("fixed_state must be a valid state for every p");
    }
  }
  for (const double k : c.k_values) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("k_values must be positive");
  }
  if (c.kmeans.restarts < 1) throw ConfigError("restarts must be at least 1");
  if (c.threads < 0) throw ConfigError("threads must be nonnegative");
}

SweepConfig parse_sweep_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sweep config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("sweep config: expected a JSON object");
  static const std::set<std::string> known = {
      "figure",    "generator",     "p_values",    "r",         "k_values", "trials",
      "base_seed", "initial_state", "fixed_state", "subspaces", "restarts", "threads"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("sweep config: unknown key \"" + key + "\"");
  }
  SweepConfig c;
  try {
    c.figure = j.value("figure", c.figure);
    if (j.contains("generator")) {
      const auto& g = j["generator"];
      if (g.is_string()) {
        c.generator.name = g.get<std::string>();
      } else {
        c.generator.name = g.at("name").get<std::string>();
        c.generator.delta = g.value("delta", c.generator.delta);
      }
    }
    c.p_values = j.at("p_values").get<std::vector<int>>();
    c.r = j.value("r", c.r);
    c.k_values = j.at("k_values").get<std::vector<double>>();
    c.trials = j.value("trials", c.trials);
    c.base_seed = j.value("base_seed", c.base_seed);
    const auto initial = j.value("initial_state", std::string("stationary"));
    if (initial == "fixed") {
      c.initial = InitialMode::Fixed;
    } else if (initial != "stationary") {
      throw ConfigError("sweep config: initial_state must be \"stationary\" or \"fixed\"");
    }
    c.fixed_state = j.value("fixed_state", c.fixed_state);
    c.subspaces = j.value("subspaces", c.subspaces);
    c.kmeans.restarts = j.value("restarts", c.kmeans.restarts);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep config: ") + e.what());
  }
  validate_sweep_config(c);
  return c;
}

SweepResult run_sweep(const SweepConfig& config) {
  validate_sweep_config(config);
  struct Task {
    int p;
    int trial;
  };
  std::vector<Task> tasks;
  for (const int p : config.p_values)
    for (int t = 0; t < config.trials; ++t) tasks.push_back({p, t});

  std::vector<std::vector<SweepRecord>> results(tasks.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<std::size_t>(
      std::min<std::size_t>(config.threads > 0 ? static_cast<std::size_t>(config.threads) : hw,
                            tasks.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      results[i] = run_task(config, tasks[i].p, tasks[i].trial);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  SweepResult out;
  out.config = config;
  for (auto& chunk : results)
    for (auto& rec : chunk) out.records.push_back(std::move(rec));

  // Order by (p position, k position, trial); estimators keep their emission order.
  auto index_of = [](const auto& values, auto v) {
    return std::find(values.begin(), values.end(), v) - values.begin();
  };
  std::stable_sort(out.records.begin(), out.records.end(), [&](const auto& a, const auto& b) {
    return std::make_tuple(index_of(config.p_values, a.p), index_of(config.k_values, a.k), a.trial) <
           std::make_tuple(index_of(config.p_values, b.p), index_of(config.k_values, b.k), b.trial);
  });

  std::map<std::pair<int, double>, std::set<int>> failures;
  for (const auto& rec : out.records)
    if (rec.failed) failures[{rec.p, rec.k}].insert(rec.trial);
  for (const auto& [cell, trials] : failures) {
    if (static_cast<double>(trials.size()) > kDegradedFraction * config.trials) out.degraded = true;
  }
  return out;
}

double loss_field(const LossReport& loss, std::string_view field) {
  if (field == "l1_total") return loss.l1_total;
  if (field == "avg_row_tv") return loss.avg_row_tv;
  if (field == "max_row_tv") return loss.max_row_tv;
  if (field == "sin_theta_spectral") return loss.sin_theta_spectral;
  if (field == "sin_theta_frobenius") return loss.sin_theta_frobenius;
  if (field == "misclassification") return loss.misclassification;
  throw ParameterError("unknown loss field \"" + std::string(field) + "\"");
}

std::vector<CellSummary> summarize(const SweepResult& result) {
  const auto& c = result.config;
  // Keyed by positions so the output order follows the config, not the map order of doubles.
  std::map<std::tuple<std::ptrdiff_t, std::ptrdiff_t, std::size_t, std::size_t>, CellSummary> acc;
  std::map<std::tuple<std::ptrdiff_t, std::ptrdiff_t, std::size_t, std::size_t>, double> sumsq;
  std::vector<std::string> estimators;
  for (const auto& rec : result.records) {
    if (rec.failed) continue;
    auto est_it = std::find(estimators.begin(), estimators.end(), rec.estimator);
    if (est_it == estimators.end()) est_it = estimators.insert(estimators.end(), rec.estimator);
    const auto ei = static_cast<std::size_t>(est_it - estimators.begin());
    const auto pi = std::find(c.p_values.begin(), c.p_values.end(), rec.p) - c.p_values.begin();
    const auto ki = std::find(c.k_values.begin(), c.k_values.end(), rec.k) - c.k_values.begin();
    for (std::size_t fi = 0; fi < std::size(kLossFields); ++fi) {
      const double v = loss_field(rec.loss, kLossFields[fi]);
      if (std::isnan(v)) continue;
      const auto key = std::make_tuple(pi, ki, ei, fi);
      auto& cell = acc[key];
      if (cell.count == 0) {
        cell.p = rec.p;
        cell.k = rec.k;
        cell.n = rec.n;
        cell.estimator = rec.estimator;
        cell.field = std::string(kLossFields[fi]);
      }
      ++cell.count;
      cell.mean += v;
      sumsq[key] += v * v;
    }
  }
  std::vector<CellSummary> out;
  for (auto& [key, cell] : acc) {
    const double cnt = static_cast<double>(cell.count);
    const double mean = cell.mean / cnt;
    const double var = cell.count > 1 ? std::max(0.0, (sumsq[key] - cnt * mean * mean) / (cnt - 1)) : 0.0;
    cell.mean = mean;
    cell.std_error = std::sqrt(var / cnt);
    out.push_back(cell);
  }
  return out;
}

RateFit fit_rate(std::span<const double> n, std::span<const double> loss) {
  if (n.size() != loss.size()) throw DimensionError("fit_rate: n and loss lengths differ");
  std::set<double> distinct(n.begin(), n.end());
  if (distinct.size() < 4) {
    throw InsufficientDataError("fit_rate: need at least 4 distinct n, got " +
                                std::to_string(distinct.size()));
  }
  const auto m = static_cast<Eigen::Index>(n.size());
  Matrix design(m, 2);
  Vector y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (!(n[ui] > 0.0) || !(loss[ui] > 0.0)) {
      throw ParameterError("fit_rate: n and loss must be positive to take logs");
    }
    design(i, 0) = std::log(n[ui]);
    design(i, 1) = 1.0;
    y(i) = std::log(loss[ui]);
  }
  const Vector coef = design.colPivHouseholderQr().solve(y);
  const Vector resid = y - design * coef;
  return RateFit{coef(0), coef(1), std::sqrt(resid.squaredNorm() / static_cast<double>(m)),
                 n.size()};
}

RateFit fit_rate(const SweepResult& result, std::string_view estimator, std::string_view field,
                 int p) {
  loss_field(LossReport{}, field);
  std::vector<double> ns;
  std::vector<double> means;
  for (const auto& cell : summarize(result)) {
    if (cell.p == p && cell.estimator == estimator && cell.field == field) {
      ns.push_back(static_cast<double>(cell.n));
      means.push_back(cell.mean);
    }
  }
  return fit_rate(ns, means);
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  const auto& c = result.config;
  out << "generator,p,r,k,n,trial,seed,estimator,loss,value,status\n";
  for (const auto& rec : result.records) {
    const std::string prefix = c.generator.name + ',' + std::to_string(rec.p) + ',' +
                               std::to_string(c.r) + ',' + io::format_double(rec.k) + ',' +
                               std::to_string(rec.n) + ',' + std::to_string(rec.trial) + ',' +
                               std::to_string(rec.seed) + ',';
    if (rec.failed) {
      out << prefix << ",,," << csv_field("failed: " + rec.error) << '\n';
      continue;
    }
    for (const auto field : kLossFields) {
      const double v = loss_field(rec.loss, field);
      if (std::isnan(v)) continue;
      out << prefix << rec.estimator << ',' << field << ',' << io::format_double(v) << ",ok\n";
    }
  }
}

void write_timings_csv(std::ostream& out, const SweepResult& result) {
  out << "p,k,n,trial,estimator,wall_seconds\n";
  for (const auto& rec : result.records) {
    out << rec.p << ',' << io::format_double(rec.k) << ',' << rec.n << ',' << rec.trial << ','
        << rec.estimator << ',' << io::format_double(rec.wall_seconds) << '\n';
  }
}

void write_summary_json(std::ostream& out, const SweepResult& result) {
  const auto cells = summarize(result);
  json j;
  j["figure"] = result.config.figure;
  j["config"] = config_json(result.config);
  j["length_rule"] = kLengthRule;
  j["degraded"] = result.degraded;

  json jcells = json::array();
  for (const auto& cell : cells) {
    jcells.push_back({{"p", cell.p},
                      {"k", cell.k},
                      {"n", cell.n},
                      {"estimator", cell.estimator},
                      {"loss", cell.field},
                      {"mean", cell.mean},
                      {"stderr", cell.std_error},
                      {"count", cell.count}});
  }
  j["cells"] = std::move(jcells);

  json failures = json::array();
  for (const auto& rec : result.records) {
    if (rec.failed) {
      failures.push_back({{"p", rec.p}, {"k", rec.k}, {"trial", rec.trial}, {"error", rec.error}});
    }
  }
  j["failures"] = std::move(failures);

  // One fit per (p, estimator, field) present in the cells.
  json fits = json::array();
  std::vector<std::tuple<int, std::string, std::string>> series;
  for (const auto& cell : cells) {
    auto key = std::make_tuple(cell.p, cell.estimator, cell.field);
    if (std::find(series.begin(), series.end(), key) == series.end()) series.push_back(key);
  }
  for (const auto& [p, estimator, field] : series) {
    json fit = {{"p", p}, {"estimator", estimator}, {"loss", field}};
    try {
      const auto r = fit_rate(result, estimator, field, p);
      fit["slope"] = r.slope;
      fit["intercept"] = r.intercept;
      fit["residual"] = r.residual;
      fit["points"] = r.points;
    } catch (const InputError& e) {
      fit["slope"] = nullptr;
      fit["error"] = e.what();
    }
    fits.push_back(std::move(fit));
  }
  j["fits"] = std::move(fits);
  out << j.dump(2) << '\n';
}

}  // namespace ssc
