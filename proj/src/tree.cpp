#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "mql/error.hpp"
#include "mql/learn.hpp"
#include "mql/rng.hpp"

namespace mql {

int TreeNodes::depth() const {
  if (feature.empty()) return 0;
  std::vector<int> d(feature.size(), 0);
  int best = 0;
  // Children are always appended after their parent.
  for (std::size_t i = 0; i < feature.size(); ++i) {
    if (feature[i] >= 0) {
      d[left[i]] = d[i] + 1;
      d[right[i]] = d[i] + 1;
      best = std::max(best, d[i] + 1);
    }
  }
  return best;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, MlType type, std::size_t n_classes,
              const Hyperparameters& hyper, bool subsample, Rng& rng)
      : x_(x), y_(y), type_(type), n_classes_(n_classes), hyper_(hyper), subsample_(subsample),
        rng_(rng) {}

  TreeNodes build(std::vector<std::size_t> samples) {
    grow(samples, 0);
    return std::move(nodes_);
  }

 private:
  struct Candidate {
    int feature = -1;
    double threshold = 0;
    double gain = 0;
    std::size_t left_count = 0;
  };

  int add_node() {
    nodes_.feature.push_back(-1);
    nodes_.threshold.push_back(0);
    nodes_.left.push_back(-1);
    nodes_.right.push_back(-1);
    nodes_.value.push_back(0);
    return static_cast<int>(nodes_.feature.size() - 1);
  }

  bool classification() const { return type_ == MlType::Class; }

  double leaf_value(const std::vector<std::size_t>& s) const {
    if (!classification()) {
      double sum = 0;
      for (auto i : s) sum += y_[i];
      return s.empty() ? 0.0 : sum / static_cast<double>(s.size());
    }
    std::vector<std::size_t> counts(n_classes_, 0);
    for (auto i : s) ++counts[static_cast<std::size_t>(y_[i])];
    // lowest class index (lexicographically smallest label) wins ties
    return static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }

  bool pure(const std::vector<std::size_t>& s) const {
    for (auto i : s) {
      if (y_[i] != y_[s.front()]) return false;
    }
    return true;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> f(x_.cols);
    std::iota(f.begin(), f.end(), std::size_t{0});
    if (!subsample_ || x_.cols <= 1) return f;
    const auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x_.cols))));
    // partial Fisher-Yates from the front
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng_.interval(f.size() - 1 - i));
      std::swap(f[i], f[j]);
    }
    f.resize(m);
    std::sort(f.begin(), f.end());
    return f;
  }

  Candidate best_split(const std::vector<std::size_t>& s) {
    const std::size_t n = s.size();
    const auto min_leaf = static_cast<std::size_t>(std::max(1, hyper_.min_leaf));
    Candidate best;

    double parent_term = 0;
    std::vector<double> total(classification() ? n_classes_ : 0, 0.0);
    double total_sum = 0;
    if (classification()) {
      for (auto i : s) total[static_cast<std::size_t>(y_[i])] += 1;
      for (double c : total) parent_term += c * c;
      parent_term /= static_cast<double>(n);
    } else {
      for (auto i : s) total_sum += y_[i];
      parent_term = total_sum * total_sum / static_cast<double>(n);
    }
    const double tolerance = 1e-12 * std::max(1.0, std::abs(parent_term));

    std::vector<std::size_t> order(s);
    std::vector<double> left_counts(total.size());
    for (std::size_t f : candidate_features()) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double va = x_(a, f), vb = x_(b, f);
        return va < vb || (va == vb && a < b);
      });
      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      double left_sum = 0;
      double left_sq_counts = 0;  // sum of squared class counts on the left
      double right_sq_counts = parent_term * static_cast<double>(n);

      for (std::size_t i = 1; i < n; ++i) {
        const std::size_t moved = order[i - 1];
        if (classification()) {
          auto c = static_cast<std::size_t>(y_[moved]);
          double lc = left_counts[c];
          double rc = total[c] - lc;
          left_sq_counts += 2 * lc + 1;         // (lc+1)^2 - lc^2
          right_sq_counts -= 2 * rc - 1;        // rc^2 - (rc-1)^2
          left_counts[c] = lc + 1;
        } else {
          left_sum += y_[moved];
        }
        const double lo = x_(order[i - 1], f);
        const double hi = x_(order[i], f);
        if (lo == hi) continue;
        if (i < min_leaf || n - i < min_leaf) continue;

        const auto nl = static_cast<double>(i);
        const auto nr = static_cast<double>(n - i);
        double child_term;
        if (classification()) {
          child_term = left_sq_counts / nl + right_sq_counts / nr;
        } else {
          const double right_sum = total_sum - left_sum;
          child_term = left_sum * left_sum / nl + right_sum * right_sum / nr;
        }
        const double gain = child_term - parent_term;
        if (gain > tolerance && gain > best.gain) {
          double thr = lo + (hi - lo) / 2;
          if (thr >= hi) thr = lo;
          best = {static_cast<int>(f), thr, gain, i};
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& s, int depth) {
    const int node = add_node();
    nodes_.value[node] = leaf_value(s);
    const auto min_leaf = static_cast<std::size_t>(std::max(1, hyper_.min_leaf));
    if (depth >= hyper_.max_depth || s.size() < 2 * min_leaf || pure(s)) return node;

    Candidate c = best_split(s);
    if (c.feature < 0) return node;

    std::vector<std::size_t> left, right;
    for (auto i : s) {
      (x_(i, static_cast<std::size_t>(c.feature)) <= c.threshold ? left : right).push_back(i);
    }
    nodes_.feature[node] = c.feature;
    nodes_.threshold[node] = c.threshold;
    const int l = grow(left, depth + 1);
    nodes_.left[node] = l;
    const int r = grow(right, depth + 1);
    nodes_.right[node] = r;
    return node;
  }

  const Matrix& x_;
  std::span<const double> y_;
  MlType type_;
  std::size_t n_classes_;
  const Hyperparameters& hyper_;
  bool subsample_;
  Rng& rng_;
  TreeNodes nodes_;
};

void check_design(const Matrix& x, std::span<const double> y) {
  if (x.rows == 0 || x.cols == 0) {
    throw Error(ErrorCode::DegenerateDesign, "tree fit needs at least one row and one feature (got " +
                                                 std::to_string(x.rows) + " rows, " +
                                                 std::to_string(x.cols) + " features)");
  }
  if (y.size() != x.rows) throw Error(ErrorCode::DegenerateDesign, "target length mismatch");
}

}  // namespace

TreeNodes fit_tree_matrix(const Matrix& x, std::span<const double> y, MlType type,
                          std::size_t n_classes, const Hyperparameters& hyper,
                          bool subsample_features, std::uint32_t seed) {
  check_design(x, y);
  Rng rng(seed);
  std::vector<std::size_t> samples(x.rows);
  std::iota(samples.begin(), samples.end(), std::size_t{0});
  return TreeBuilder(x, y, type, n_classes, hyper, subsample_features, rng).build(std::move(samples));
}

std::vector<TreeNodes> fit_forest_matrix(const Matrix& x, std::span<const double> y, MlType type,
                                         std::size_t n_classes, const Hyperparameters& hyper) {
  check_design(x, y);
  const auto n_trees = static_cast<std::size_t>(std::max(1, hyper.n_trees));
  std::vector<TreeNodes> trees(n_trees);

  // Each tree draws from its own stream derived from (seed, tree index), so
  // the result does not depend on which thread builds which tree.
  auto build_one = [&](std::size_t t) {
    Rng rng(derive_seed(hyper.seed, t));
    std::vector<std::size_t> samples(x.rows);
    if (hyper.bootstrap) {
      for (auto& s : samples) s = static_cast<std::size_t>(rng.interval(x.rows - 1));
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    trees[t] = TreeBuilder(x, y, type, n_classes, hyper, hyper.subsample_features, rng)
                   .build(std::move(samples));
  };

  const std::size_t workers =
      std::min<std::size_t>(n_trees, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w + 1 < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t; (t = next.fetch_add(1)) < n_trees;) build_one(t);
    });
  }
  for (std::size_t t; (t = next.fetch_add(1)) < n_trees;) build_one(t);
  for (auto& th : pool) th.join();
  return trees;
}

double predict_tree_row(const TreeNodes& tree, std::span<const double> row) {
  int node = 0;
  while (tree.feature[node] >= 0) {
    node = row[static_cast<std::size_t>(tree.feature[node])] <= tree.threshold[node] ? tree.left[node]
                                                                                     : tree.right[node];
  }
  return tree.value[node];
}

}  // namespace mql
