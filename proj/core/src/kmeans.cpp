#include "ssc/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ssc/error.hpp"
#include "ssc/random.hpp"

namespace ssc {

namespace {

struct Run {
  std::vector<int> labels;
  Matrix centers;
  double inertia = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  int iterations = 0;
};

Matrix seed_plus_plus(const Matrix& x, int r, Rng& rng) {
  const Eigen::Index m = x.rows();
  Matrix centers(r, x.cols());
  const auto first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m));
  centers.row(0) = x.row(first);
  Vector d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < r; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      pick = m - 1;
      for (Eigen::Index i = 0; i < m; ++i) {
        acc += d2(i);
        if (u < acc && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m));
    }
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

double assign(const Matrix& x, const Matrix& centers, std::vector<int>& labels, Vector& d2) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = (x.row(i) - centers.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    d2(i) = best_d;
    inertia += best_d;
  }
  return inertia;
}

void repair_empty(const Matrix& x, const Matrix& centers, std::vector<int>& labels, Vector& d2,
                  int r) {
  while (true) {
    std::vector<int> sizes(static_cast<std::size_t>(r), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    const auto empty = std::find(sizes.begin(), sizes.end(), 0);
    if (empty == sizes.end()) return;
    const int largest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] != largest) continue;
      const double d = (x.row(i) - centers.row(largest)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    labels[static_cast<std::size_t>(far)] = static_cast<int>(empty - sizes.begin());
    d2(far) = 0.0;
  }
}

Matrix update_centers(const Matrix& x, const std::vector<int>& labels, int r) {
  Matrix centers = Matrix::Zero(r, x.cols());
  std::vector<double> counts(static_cast<std::size_t>(r), 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    centers.row(l) += x.row(i);
    counts[static_cast<std::size_t>(l)] += 1.0;
  }
  for (int c = 0; c < r; ++c) centers.row(c) /= counts[static_cast<std::size_t>(c)];
  return centers;
}

double inertia_of(const Matrix& x, const Matrix& centers, const std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    total += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return total;
}

Run lloyd(const Matrix& x, int r, const KMeansConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  Run run;
  run.centers = seed_plus_plus(x, r, rng);
  run.labels.assign(static_cast<std::size_t>(x.rows()), -1);
  Vector d2(x.rows());
  std::vector<int> previous;
  for (int it = 0; it < config.max_iters; ++it) {
    assign(x, run.centers, run.labels, d2);
    repair_empty(x, run.centers, run.labels, d2, r);
    run.centers = update_centers(x, run.labels, r);
    const double inertia = inertia_of(x, run.centers, run.labels);
    ++run.iterations;
    const bool stable = run.labels == previous;
    const double before = run.history.empty() ? std::numeric_limits<double>::infinity()
                                              : run.history.back();
    run.history.push_back(inertia);
    run.inertia = inertia;
    if (stable || before - inertia <= config.tol * std::max(before, 1e-300)) break;
    previous = run.labels;
  }
  return run;
}

}  // namespace

KMeansResult kmeans_cluster(const Matrix& rows, int r, const KMeansConfig& config) {
  if (config.restarts < 1) throw ParameterError("kmeans: restarts must be at least 1");
  if (config.max_iters < 1) throw ParameterError("kmeans: max_iters must be at least 1");
  if (r < 1) throw ParameterError("kmeans: r must be at least 1");
  if (r > rows.rows()) {
    throw ParameterError("kmeans: r = " + std::to_string(r) + " exceeds the number of points " +
                         std::to_string(rows.rows()));
  }
  if (!rows.allFinite()) throw ParameterError("kmeans: non-finite coordinates");

  Run best;
  for (int restart = 0; restart < config.restarts; ++restart) {
    Run run = lloyd(rows, r, config, derive_seed(config.seed, {static_cast<std::uint64_t>(restart)}));
    if (run.inertia < best.inertia) best = std::move(run);
  }

  PartitionLabels raw(best.labels, r);
  PartitionLabels canon = raw.canonical();
  Matrix centers(r, rows.cols());
  for (std::size_t i = 0; i < raw.size(); ++i) centers.row(canon[i]) = best.centers.row(raw[i]);

  KMeansResult out{std::move(canon), std::move(centers), best.inertia, std::move(best.history),
                   best.iterations};
  return out;
}

}  // namespace ssc
