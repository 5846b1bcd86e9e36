#include <algorithm>
#include <cmath>
#include <numeric>

#include "mql/error.hpp"
#include "mql/learn.hpp"

namespace mql {

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  s.mean.assign(x.cols, 0.0);
  s.scale.assign(x.cols, 1.0);
  if (x.rows == 0) return s;
  const auto n = static_cast<double>(x.rows);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double sum = 0;
    for (std::size_t i = 0; i < x.rows; ++i) sum += x(i, j);
    const double mean = sum / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.rows; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
    const double sd = std::sqrt(ss / n);
    s.mean[j] = mean;
    s.scale[j] = sd > 0 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply_row(std::span<const double> row) const {
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) out(i, j) = (x(i, j) - mean[j]) / scale[j];
  }
  return out;
}

double predict_knn_row(const KnnParams& p, std::span<const double> row, MlType type,
                       std::size_t n_classes) {
  const std::vector<double> z = p.standardizer.apply_row(row);
  const std::size_t n = p.points.rows;
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double diff = p.points(i, j) - z[j];
      d += diff * diff;
    }
    dist[i] = {d, i};
  }
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(p.k), n);
  // pair ordering gives the distance-then-row-index tie-break
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  if (type != MlType::Class) {
    double sum = 0;
    for (std::size_t i = 0; i < k; ++i) sum += p.targets[dist[i].second];
    return sum / static_cast<double>(k);
  }

  std::vector<std::size_t> votes(n_classes, 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(p.targets[dist[i].second])];
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  // Among classes sharing the top vote count, the nearest neighbour decides.
  for (std::size_t i = 0; i < k; ++i) {
    const auto c = static_cast<std::size_t>(p.targets[dist[i].second]);
    if (votes[c] == top) return static_cast<double>(c);
  }
  return 0;
}

}  // namespace mql
