#include <algorithm>
#include <cmath>
#include <limits>

#include "mql/error.hpp"
#include "mql/learn.hpp"
#include "mql/rng.hpp"

namespace mql {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t j = 0; j < a.size(); ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
  return d;
}

struct Run {
  Matrix centroids;  // standardized
  std::vector<std::size_t> assignment;
  std::vector<double> history;
  double inertia = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

Matrix plus_plus_seeds(const Matrix& z, std::size_t k, Rng& rng) {
  const std::size_t n = z.rows;
  Matrix c(k, z.cols);
  auto set_center = [&](std::size_t ci, std::size_t row) {
    for (std::size_t j = 0; j < z.cols; ++j) c(ci, j) = z(row, j);
  };
  set_center(0, static_cast<std::size_t>(rng.interval(n - 1)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(z.row(i), c.row(0));

  for (std::size_t ci = 1; ci < k; ++ci) {
    double total = 0;
    for (double d : d2) total += d;
    std::size_t pick = n - 1;
    if (total > 0) {
      const double u = rng.uniform() * total;
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > u) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.interval(n - 1));
    }
    set_center(ci, pick);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(z.row(i), c.row(ci)));
  }
  return c;
}

// Nearest centroid with lowest-index tie-break; returns (index, squared distance).
std::pair<std::size_t, double> closest(const Matrix& c, std::span<const double> row) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t ci = 0; ci < c.rows; ++ci) {
    const double d = sq_dist(row, c.row(ci));
    if (d < best_d) {
      best_d = d;
      best = ci;
    }
  }
  return {best, best_d};
}

Run lloyd(const Matrix& z, Matrix centroids, int max_iter) {
  const std::size_t n = z.rows;
  const std::size_t k = centroids.rows;
  Run run;
  run.assignment.assign(n, 0);
  std::vector<double> dist(n);

  auto assign = [&] {
    double inertia = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto [ci, d] = closest(centroids, z.row(i));
      run.assignment[i] = ci;
      dist[i] = d;
      inertia += d;
    }
    return inertia;
  };

  double inertia = assign();
  run.history.push_back(inertia);
  for (int it = 0; it < max_iter; ++it) {
    // update step
    Matrix sums(k, z.cols);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[run.assignment[i]];
      for (std::size_t j = 0; j < z.cols; ++j) sums(run.assignment[i], j) += z(i, j);
    }
    for (std::size_t ci = 0; ci < k; ++ci) {
      if (counts[ci] == 0) continue;
      for (std::size_t j = 0; j < z.cols; ++j) {
        centroids(ci, j) = sums(ci, j) / static_cast<double>(counts[ci]);
      }
    }
    // Empty clusters take over the point currently farthest from its centroid.
    for (std::size_t ci = 0; ci < k; ++ci) {
      if (counts[ci] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (dist[i] > dist[far]) far = i;
      }
      for (std::size_t j = 0; j < z.cols; ++j) centroids(ci, j) = z(far, j);
      dist[far] = 0;
    }

    const std::vector<std::size_t> previous = run.assignment;
    inertia = assign();
    run.history.push_back(inertia);
    run.iterations = it + 1;
    if (run.assignment == previous) break;
  }
  run.centroids = std::move(centroids);
  run.inertia = inertia;
  return run;
}

}  // namespace

KMeansParams fit_kmeans_matrix(const Matrix& x, std::size_t k, const Hyperparameters& hyper) {
  if (k < 1) throw Error(ErrorCode::RangeError, "CLUSTER OF must be at least 1");
  if (x.cols == 0) throw Error(ErrorCode::DegenerateDesign, "k-means needs at least one feature");
  if (k > x.rows) {
    throw Error(ErrorCode::KExceedsRows, "CLUSTER OF " + std::to_string(k) + " exceeds the " +
                                             std::to_string(x.rows) + " available rows");
  }
  KMeansParams p;
  p.standardizer = Standardizer::fit(x);
  const Matrix z = p.standardizer.apply(x);

  Run best;
  const int restarts = std::max(1, hyper.kmeans_restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(hyper.seed, static_cast<std::uint64_t>(r)));
    Run run = lloyd(z, plus_plus_seeds(z, k, rng), std::max(1, hyper.kmeans_max_iter));
    if (run.inertia < best.inertia) best = std::move(run);
  }

  p.centroids.assign(k, std::vector<double>(x.cols, 0.0));
  for (std::size_t ci = 0; ci < k; ++ci) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      p.centroids[ci][j] = best.centroids(ci, j) * p.standardizer.scale[j] + p.standardizer.mean[j];
    }
  }
  double raw = 0;
  for (std::size_t i = 0; i < x.rows; ++i) raw += sq_dist(x.row(i), p.centroids[best.assignment[i]]);
  p.inertia = raw;
  p.inertia_history = std::move(best.history);
  p.iterations = best.iterations;
  return p;
}

std::size_t nearest_centroid(const KMeansParams& p, std::span<const double> row) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t ci = 0; ci < p.centroids.size(); ++ci) {
    double d = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double diff = (row[j] - p.centroids[ci][j]) / p.standardizer.scale[j];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = ci;
    }
  }
  return best;
}

double silhouette_score(const Matrix& x, std::span<const std::size_t> assignment) {
  const std::size_t n = x.rows;
  if (n == 0) return 0;
  const std::size_t k = *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignment) ++sizes[a];
  if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2) return 0;

  double total = 0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) sums[assignment[j]] += std::sqrt(sq_dist(x.row(i), x.row(j)));
    }
    const std::size_t own = assignment[i];
    if (sizes[own] <= 1) continue;  // singleton contributes 0
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double m = std::max(a, b);
    if (m > 0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

}  // namespace mql
