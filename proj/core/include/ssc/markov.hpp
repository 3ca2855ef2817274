#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "ssc/types.hpp"

namespace ssc {

struct ValidationReport {
  bool is_square = true;
  /// Every row a probability vector within 1e-12.
  bool is_stochastic = false;
  /// Stochastic after renormalizing rows off by at most 1e-8.
  bool is_renormalizable = false;
  /// Stochastic and irreducible: no proper nonempty closed subset of states.
  bool is_ergodic_class = false;
  std::optional<std::size_t> failing_row;
  std::string reason;
};

/// Throws DimensionError for non-square input; everything else is reported.
ValidationReport validate_transition(const Matrix& m);

/// Strong connectivity of the digraph with an edge i -> j whenever m(i,j) > 0.
bool is_irreducible(const Matrix& m);

/// F~(i,j) = #{k : (X_{k-1}, X_k) = (i, j)} / n with n = length - 1.
FrequencyMatrix empirical_frequency(const Trajectory& traj);

/// Transition counts, p x p.
Matrix transition_counts(const Trajectory& traj);

/// Row-normalized counts; rows with no outgoing observation become uniform 1/p.
StochasticMatrix empirical_transition(const Trajectory& traj);

/// pi~_i = (1/n) #{k in 1..n : X_k = i}.
Vector empirical_distribution(const Trajectory& traj);

/// Dense solve of the stationary equations for p <= this size, power iteration
/// above it.
inline constexpr Eigen::Index kDirectStationaryLimit = 512;

StationaryDistribution stationary_distribution(const StochasticMatrix& p);

/// F = diag(pi) P.
FrequencyMatrix frequency_from_transition(const StochasticMatrix& p, const Vector& pi);

struct MixingTimeLimits {
  Eigen::Index max_states = 2000;
  std::uint64_t max_steps = 1'000'000;
};

/// Worst-row total variation distance max_i (1/2)||row_i(M) - pi||_1.
double max_row_tv_to(const Matrix& m, const Vector& pi);

/// Smallest k >= 1 with max_i (1/2)||(P^k)_i - pi||_1 <= epsilon.
std::uint64_t mixing_time(const StochasticMatrix& p, double epsilon,
                          const MixingTimeLimits& limits = {});

struct SpectrumSummary {
  double lambda2 = 0.0;      ///< second-largest eigenvalue
  double lambda_star = 0.0;  ///< largest |lambda| among the non-unit eigenvalues
};

/// Requires detailed balance within 1e-10; throws ReversibilityError otherwise.
SpectrumSummary reversible_spectrum(const StochasticMatrix& p);

/// (1/(1 - lambda*)) log(1/(epsilon pi_min)), an upper bound on the
/// epsilon-mixing time of a reversible chain.
double eigengap_mixing_bound(const StochasticMatrix& p, double epsilon);

/// Initial state: a fixed index, or a distribution to draw X_0 from.
using InitialState = std::variant<StateIndex, Vector>;

/// X_0, ..., X_n with n = `transitions`.
Trajectory simulate_trajectory(const StochasticMatrix& p, const InitialState& initial,
                               std::size_t transitions, std::uint64_t seed);

struct ChainDiagnostics {
  double pi_min = 0.0;
  double pi_max = 0.0;
  double kappa = 0.0;    ///< p^2 max F_ij
  double r_tilde = 0.0;  ///< ||F||_F^2 / sigma_r(F)^2
  double sigma_r = 0.0;
  double sigma_r_plus_1 = 0.0;
  std::optional<double> lambda2;             ///< reversible chains only
  std::optional<std::uint64_t> tau_star;     ///< tau(1/4); absent if not computable
};

ChainDiagnostics chain_diagnostics(const StochasticMatrix& p, int r,
                                   const MixingTimeLimits& limits = {});

}  // namespace ssc
