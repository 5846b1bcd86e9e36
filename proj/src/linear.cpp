#include <Eigen/Dense>
#include <cmath>

#include "mql/error.hpp"
#include "mql/learn.hpp"

namespace mql {

// Least squares with intercept through the normal equations. Columns are
// centered and scaled to unit norm before forming the Gram matrix; the
// penalty lambda*||coef||^2 is expressed in raw units, so lambda = 0 is plain
// OLS and lambda > 0 matches an unpenalized-intercept ridge fit.
LinearParams fit_linear_matrix(const Matrix& x, std::span<const double> y, double lambda) {
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  if (n == 0 || d == 0) {
    throw Error(ErrorCode::DegenerateDesign,
                "linear fit needs at least one row and one feature (got " + std::to_string(n) +
                    " rows, " + std::to_string(d) + " features)");
  }

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(
      x.data.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::RowVectorXd x_mean = xm.colwise().mean();
  const double y_mean = yv.mean();
  Eigen::MatrixXd z = xm.rowwise() - x_mean;
  const Eigen::VectorXd yc = yv.array() - y_mean;

  Eigen::VectorXd sumsq = z.colwise().squaredNorm().transpose();
  Eigen::VectorXd scale(d);
  for (std::size_t j = 0; j < d; ++j) {
    scale[j] = sumsq[j] > 0 ? std::sqrt(sumsq[j]) : 1.0;
    z.col(j) /= scale[j];
  }
  const Eigen::MatrixXd gram = z.transpose() * z;
  const Eigen::VectorXd rhs = z.transpose() * yc;

  auto solve = [&](double lam) {
    Eigen::MatrixXd g = gram;
    if (lam > 0) {
      for (std::size_t j = 0; j < d; ++j) g(j, j) += lam / (scale[j] * scale[j]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    return std::pair{ldlt, Eigen::VectorXd(ldlt.solve(rhs))};
  };

  LinearParams p;
  p.lambda = lambda;
  auto [ldlt, beta] = solve(lambda);
  // LDLT's rcond estimate can miss exact collinearity, so the condition
  // number comes from the eigenvalues of the (small) standardized Gram matrix.
  Eigen::MatrixXd g = gram;
  if (lambda > 0) {
    for (std::size_t j = 0; j < d; ++j) g(j, j) += lambda / (scale[j] * scale[j]);
  }
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly).eigenvalues();
  const bool singular = !(ev.minCoeff() > ev.maxCoeff() * kSingularRcond);
  if (singular || !(ldlt.rcond() >= kSingularRcond) || !beta.allFinite()) {
    p.lambda = std::max(lambda, kRidgeFallbackLambda);
    p.ridge_fallback = true;
    beta = solve(p.lambda).second;
  }

  p.coef.resize(d);
  double intercept = y_mean;
  for (std::size_t j = 0; j < d; ++j) {
    p.coef[j] = beta[j] / scale[j];
    intercept -= p.coef[j] * x_mean[j];
  }
  p.intercept = intercept;
  return p;
}

double predict_linear_row(const LinearParams& p, std::span<const double> row) {
  double v = p.intercept;
  for (std::size_t j = 0; j < p.coef.size(); ++j) v += p.coef[j] * row[j];
  return v;
}

}  // namespace mql
