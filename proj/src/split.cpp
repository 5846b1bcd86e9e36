#include <cmath>

#include "mql/error.hpp"
#include "mql/learn.hpp"
#include "mql/rng.hpp"

namespace mql {

std::pair<long long, long long> default_split_counts(std::size_t rows) {
  const auto test = static_cast<long long>(std::ceil(0.2 * static_cast<double>(rows)));
  return {static_cast<long long>(rows) - test, test};
}

Split train_test_split(const Table& t, long long n, long long m, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::RangeError, "TRAIN ON must be at least 1, got " + std::to_string(n));
  if (m < 0) throw Error(ErrorCode::RangeError, "TEST ON must be non-negative, got " + std::to_string(m));
  const auto rows = static_cast<long long>(t.row_count());
  if (n > rows) {
    throw Error(ErrorCode::TrainTooLarge, "TRAIN ON " + std::to_string(n) + " exceeds the " +
                                              std::to_string(rows) + " available rows");
  }
  Split out;
  if (n + m > rows) {
    out.warnings.push_back("TRAIN ON " + std::to_string(n) + " + TEST ON " + std::to_string(m) +
                           " exceeds " + std::to_string(rows) + " rows; test set clamped to " +
                           std::to_string(rows - n));
    m = rows - n;
  }

  Rng rng(static_cast<std::uint32_t>(seed));
  auto perm = rng.permutation(t.row_count());
  std::vector<std::size_t> test(perm.begin(), perm.begin() + m);
  std::vector<std::size_t> train(perm.begin() + m, perm.begin() + m + n);
  out.train = t.take_rows(train);
  out.test = t.take_rows(test);
  out.unused = static_cast<std::size_t>(rows - n - m);
  return out;
}

}  // namespace mql
