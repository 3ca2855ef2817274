#include "ssc/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/random.hpp"

namespace ssc {

namespace {

std::vector<std::vector<Eigen::Index>> positive_adjacency(const Matrix& m, bool transpose) {
  const Eigen::Index p = m.rows();
  std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (m(i, j) > 0.0) {
        if (transpose) {
          adj[static_cast<std::size_t>(j)].push_back(i);
        } else {
          adj[static_cast<std::size_t>(i)].push_back(j);
        }
      }
    }
  }
  return adj;
}

std::size_t reachable_count(const std::vector<std::vector<Eigen::Index>>& adj) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count;
}

void require_pairs(const Trajectory& traj, const char* what) {
  if (traj.length() < 2) {
    throw InsufficientDataError(std::string(what) +
                                ": trajectory needs at least 2 states (1 transition)");
  }
}

void require_ergodic(const StochasticMatrix& p, const char* what) {
  if (p.rows() != p.cols()) throw DimensionError(std::string(what) + ": matrix is not square");
  if (!is_irreducible(p.matrix())) {
    throw StructuralError(std::string(what) +
                          ": chain is not irreducible (a proper subset of states is closed)");
  }
}

}  // namespace

bool is_irreducible(const Matrix& m) {
  const auto p = static_cast<std::size_t>(m.rows());
  if (p == 0) return false;
  return reachable_count(positive_adjacency(m, false)) == p &&
         reachable_count(positive_adjacency(m, true)) == p;
}

ValidationReport validate_transition(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("validate_transition: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
  ValidationReport report;
  if (m.rows() == 0) {
    report.reason = "empty matrix";
    return report;
  }
  bool exact = true;
  bool renormalizable = true;
  for (Eigen::Index i = 0; i < m.rows() && renormalizable; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        renormalizable = false;
        report.failing_row = static_cast<std::size_t>(i);
        report.reason = "row " + std::to_string(i) + " has entry " + std::to_string(v) +
                        " outside [0, 1] at column " + std::to_string(j);
        break;
      }
      sum += v;
    }
    if (!renormalizable) break;
    const double err = std::abs(sum - 1.0);
    if (err > kRenormalizeTolerance) {
      renormalizable = false;
      report.failing_row = static_cast<std::size_t>(i);
      report.reason = "row " + std::to_string(i) + " sums to " + std::to_string(sum);
    } else if (err > kRowSumTolerance && exact) {
      exact = false;
      report.failing_row = static_cast<std::size_t>(i);
      report.reason = "row " + std::to_string(i) + " sums to 1 only within 1e-8";
    }
  }
  report.is_renormalizable = renormalizable;
  report.is_stochastic = renormalizable && exact;
  if (report.is_stochastic) {
    report.is_ergodic_class = is_irreducible(m);
    if (!report.is_ergodic_class) {
      report.reason = "a proper subset of states is closed (not irreducible)";
    }
  }
  return report;
}

Matrix transition_counts(const Trajectory& traj) {
  const auto p = static_cast<Eigen::Index>(traj.num_states());
  Matrix counts = Matrix::Zero(p, p);
  const auto s = traj.states();
  for (std::size_t k = 1; k < s.size(); ++k) counts(s[k - 1], s[k]) += 1.0;
  return counts;
}

FrequencyMatrix empirical_frequency(const Trajectory& traj) {
  require_pairs(traj, "empirical_frequency");
  Matrix f = transition_counts(traj);
  f /= static_cast<double>(traj.transitions());
  return FrequencyMatrix::from_matrix(std::move(f));
}

StochasticMatrix empirical_transition(const Trajectory& traj) {
  require_pairs(traj, "empirical_transition");
  Matrix counts = transition_counts(traj);
  const auto p = counts.rows();
  for (Eigen::Index i = 0; i < p; ++i) {
    const double total = counts.row(i).sum();
    if (total > 0.0) {
      counts.row(i) /= total;
    } else {
      counts.row(i).setConstant(1.0 / static_cast<double>(p));
    }
  }
  return StochasticMatrix::from_matrix(std::move(counts));
}

Vector empirical_distribution(const Trajectory& traj) {
  require_pairs(traj, "empirical_distribution");
  Vector pi = Vector::Zero(static_cast<Eigen::Index>(traj.num_states()));
  const auto s = traj.states();
  for (std::size_t k = 1; k < s.size(); ++k) pi(s[k]) += 1.0;
  return pi / static_cast<double>(traj.transitions());
}

StationaryDistribution stationary_distribution(const StochasticMatrix& p) {
  require_ergodic(p, "stationary_distribution");
  const Matrix& pm = p.matrix();
  const Eigen::Index n = pm.rows();
  Vector pi;
  if (n <= kDirectStationaryLimit) {
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Matrix a = pm.transpose() - Matrix::Identity(n, n);
    a.row(n - 1).setOnes();
    Vector b = Vector::Zero(n);
    b(n - 1) = 1.0;
    pi = a.fullPivLu().solve(b);
  } else {
    // Lazy power iteration: (I + P)/2 has the same invariant law and is aperiodic.
    pi = Vector::Constant(n, 1.0 / static_cast<double>(n));
    const Matrix pt = pm.transpose();
    double delta = 1.0;
    constexpr int kMaxIterations = 1'000'000;
    int it = 0;
    for (; it < kMaxIterations && delta > 1e-12; ++it) {
      Vector next = 0.5 * (pi + pt * pi);
      next /= next.sum();
      delta = (next - pi).lpNorm<1>();
      pi.swap(next);
    }
    if (delta > 1e-12) {
      throw ConvergenceError(delta, "stationary_distribution: power iteration did not converge");
    }
  }
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  const double residual = (pm.transpose() * pi - pi).lpNorm<1>();
  if (!(residual < 1e-10)) {
    throw ConvergenceError(residual, "stationary_distribution: residual " +
                                         std::to_string(residual) + " exceeds 1e-10");
  }
  return StationaryDistribution(std::move(pi));
}

FrequencyMatrix frequency_from_transition(const StochasticMatrix& p, const Vector& pi) {
  if (p.rows() != p.cols() || pi.size() != p.rows()) {
    throw DimensionError("frequency_from_transition: P is " + std::to_string(p.rows()) + "x" +
                         std::to_string(p.cols()) + ", pi has length " +
                         std::to_string(pi.size()));
  }
  return FrequencyMatrix::from_matrix(pi.asDiagonal() * p.matrix());
}

double max_row_tv_to(const Matrix& m, const Vector& pi) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    worst = std::max(worst, 0.5 * (m.row(i).transpose() - pi).lpNorm<1>());
  }
  return worst;
}

std::uint64_t mixing_time(const StochasticMatrix& p, double epsilon,
                          const MixingTimeLimits& limits) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ParameterError("mixing_time: epsilon must lie in (0, 1)");
  }
  require_ergodic(p, "mixing_time");
  if (p.rows() > limits.max_states) {
    throw ParameterError("mixing_time: p = " + std::to_string(p.rows()) +
                         " exceeds the dense-power cap " + std::to_string(limits.max_states));
  }
  const Vector pi = stationary_distribution(p).probs;
  const Matrix& pm = p.matrix();

  // d(k) = max-row TV of P^k to pi is nonincreasing in k, so bracket the answer
  // with repeated squaring and then binary-search the bits below the bracket.
  std::vector<Matrix> powers{pm};  // powers[j] = P^(2^j)
  double last = max_row_tv_to(pm, pi);
  if (last <= epsilon) return 1;
  std::uint64_t reach = 1;
  while (true) {
    if (reach >= limits.max_steps) {
      throw NotMixedError(last, "mixing_time: not within " + std::to_string(epsilon) +
                                    " after " + std::to_string(limits.max_steps) +
                                    " steps (distance " + std::to_string(last) + ")");
    }
    powers.push_back(powers.back() * powers.back());
    reach *= 2;
    last = max_row_tv_to(powers.back(), pi);
    if (last <= epsilon) break;
  }
  // Largest k < reach with d(k) > epsilon; answer is k + 1.
  Matrix acc = Matrix::Identity(pm.rows(), pm.cols());
  std::uint64_t k = 0;
  for (std::size_t j = powers.size() - 1; j-- > 0;) {
    Matrix cand = acc * powers[j];
    if (max_row_tv_to(cand, pi) > epsilon) {
      acc = std::move(cand);
      k += std::uint64_t{1} << j;
    }
  }
  const std::uint64_t tau = k + 1;
  if (tau > limits.max_steps) {
    throw NotMixedError(max_row_tv_to(acc, pi),
                        "mixing_time: mixing time exceeds the cap " +
                            std::to_string(limits.max_steps));
  }
  return tau;
}

SpectrumSummary reversible_spectrum(const StochasticMatrix& p) {
  require_ergodic(p, "reversible_spectrum");
  const Vector pi = stationary_distribution(p).probs;
  const Matrix f = pi.asDiagonal() * p.matrix();
  const double violation = (f - f.transpose()).cwiseAbs().maxCoeff();
  if (violation > 1e-10) {
    throw ReversibilityError(violation, "chain is not reversible: detailed balance violated by " +
                                            std::to_string(violation));
  }
  const Vector sq = pi.cwiseSqrt();
  const Vector inv_sq = sq.cwiseInverse();
  Matrix sym = sq.asDiagonal() * p.matrix() * inv_sq.asDiagonal();
  sym = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();  // ascending
  SpectrumSummary out;
  const auto n = ev.size();
  if (n < 2) return out;
  out.lambda2 = ev(n - 2);
  out.lambda_star = std::max(std::abs(ev(n - 2)), std::abs(ev(0)));
  return out;
}

double eigengap_mixing_bound(const StochasticMatrix& p, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ParameterError("eigengap_mixing_bound: epsilon must lie in (0, 1)");
  }
  const auto spec = reversible_spectrum(p);
  if (!(spec.lambda_star < 1.0)) {
    throw NumericalError("eigengap_mixing_bound: chain has no spectral gap");
  }
  const double pi_min = stationary_distribution(p).pi_min;
  return std::log(1.0 / (epsilon * pi_min)) / (1.0 - spec.lambda_star);
}

Trajectory simulate_trajectory(const StochasticMatrix& p, const InitialState& initial,
                               std::size_t transitions, std::uint64_t seed) {
  if (p.rows() != p.cols()) throw DimensionError("simulate_trajectory: P must be square");
  if (transitions < 1) throw ParameterError("simulate_trajectory: n must be at least 1");
  const Eigen::Index n = p.rows();
  const Matrix& pm = p.matrix();

  // Row-wise cumulative sums, row-major for cache-friendly sampling.
  std::vector<double> cum(static_cast<std::size_t>(n * n));
  std::vector<Eigen::Index> last_positive(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      acc += pm(i, j);
      cum[static_cast<std::size_t>(i * n + j)] = acc;
      if (pm(i, j) > 0.0) last_positive[static_cast<std::size_t>(i)] = j;
    }
  }
  Rng rng(seed);
  auto draw_row = [&](Eigen::Index i) -> StateIndex {
    const double u = uniform01(rng);
    const double* first = cum.data() + i * n;
    const double* it = std::upper_bound(first, first + n, u);
    Eigen::Index j = it - first;
    if (j >= n) j = last_positive[static_cast<std::size_t>(i)];
    return static_cast<StateIndex>(j);
  };

  std::vector<StateIndex> states;
  states.reserve(transitions + 1);
  if (const auto* fixed = std::get_if<StateIndex>(&initial)) {
    if (*fixed < 0 || *fixed >= n) {
      throw ParameterError("simulate_trajectory: initial state " + std::to_string(*fixed) +
                           " outside [0, " + std::to_string(n) + ")");
    }
    states.push_back(*fixed);
  } else {
    const Vector& dist = std::get<Vector>(initial);
    if (dist.size() != n || (dist.array() < 0.0).any() || std::abs(dist.sum() - 1.0) > 1e-8) {
      throw ParameterError("simulate_trajectory: initial distribution must be a length-p "
                           "probability vector");
    }
    const double u = uniform01(rng) * dist.sum();
    double acc = 0.0;
    Eigen::Index pick = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (dist(j) > 0.0) pick = j;
      acc += dist(j);
      if (u < acc && dist(j) > 0.0) break;
    }
    states.push_back(static_cast<StateIndex>(pick));
  }
  for (std::size_t t = 0; t < transitions; ++t) states.push_back(draw_row(states.back()));
  return Trajectory(std::move(states), static_cast<std::size_t>(n));
}

ChainDiagnostics chain_diagnostics(const StochasticMatrix& p, int r,
                                   const MixingTimeLimits& limits) {
  if (r < 1 || r > p.rows()) throw ParameterError("chain_diagnostics: r out of range");
  const auto pi = stationary_distribution(p);
  const Matrix f = pi.probs.asDiagonal() * p.matrix();
  const auto pn = static_cast<double>(p.rows());
  ChainDiagnostics d;
  d.pi_min = pi.pi_min;
  d.pi_max = pi.pi_max;
  d.kappa = pn * pn * f.maxCoeff();
  Eigen::BDCSVD<Matrix> svd(f);
  const Vector& sv = svd.singularValues();
  d.sigma_r = sv(r - 1);
  d.sigma_r_plus_1 = r < sv.size() ? sv(r) : 0.0;
  d.r_tilde = d.sigma_r > 0.0 ? f.squaredNorm() / (d.sigma_r * d.sigma_r)
                              : std::numeric_limits<double>::infinity();
  try {
    d.lambda2 = reversible_spectrum(p).lambda2;
  } catch (const ReversibilityError&) {
  }
  if (p.rows() <= limits.max_states) {
    try {
      d.tau_star = mixing_time(p, 0.25, limits);
    } catch (const NotMixedError&) {
    }
  }
  return d;
}

}  // namespace ssc
