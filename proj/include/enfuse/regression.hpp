#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "enfuse/data.hpp"

namespace enfuse {

struct OlsFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
};

/// Least squares with an intercept. Rank-deficient designs get the
/// minimum-norm coefficient vector. Requires n > m.
OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Residual sum of squares of the OLS fit.
double sse_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

inline double soft_threshold(double z, double gamma) noexcept {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

struct EnOptions {
  double tol = 1e-6;     // max absolute coefficient change per sweep
  int max_iter = 10000;  // sweeps
  bool record_history = false;
};

struct ElasticNetFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double alpha = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  /// (1/2N) SSE + lambda * P_alpha(beta) at the returned coefficients.
  double objective = 0.0;
  /// Objective after every sweep, filled when EnOptions::record_history is set.
  std::vector<double> objective_history;

  Index nonzero_count(double threshold = 1e-8) const;
};

/// Sufficient statistics of a design for covariance-mode coordinate descent.
/// All second moments are centered and divided by n.
struct CenteredGram {
  Index n = 0;
  Eigen::VectorXd x_mean;
  double y_mean = 0.0;
  Eigen::MatrixXd xx;  // Xc' Xc / n
  Eigen::VectorXd xy;  // Xc' yc / n
  double yy = 0.0;     // yc' yc / n

  static CenteredGram from(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
};

/// Elastic Net on the design (x, y):
///   min_{b0,b} (1/2N) sum (y - b0 - x b)^2 + lambda * sum ((1-alpha)/2 b_j^2 + alpha |b_j|)
/// solved by cyclic coordinate descent. The intercept is unpenalized.
ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha, double lambda,
                              const EnOptions& options = {});

ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha, double lambda,
                              double tol, int max_iter);

/// Same problem restricted to `subset` columns of a precomputed Gram system.
ElasticNetFit fit_elastic_net(const CenteredGram& gram, std::span<const Index> subset, double alpha,
                              double lambda, const EnOptions& options = {});

/// Smallest lambda at which the Lasso (alpha = 1) returns the null model:
/// max_j |(1/N) sum_i x_ij (y_i - ybar)|.
double lasso_null_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

enum class AdjustedR2Convention {
  n_minus_p,  // 1 - (n-1)/(n-p) (1-r2)
  classical,  // 1 - (n-1)/(n-p-1) (1-r2)
};

struct RegressionMetrics {
  double sse = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
  double r2_adj = 0.0;
  Index n = 0;
  Index p = 0;
};

double adjusted_r2(double r2, Index n, Index p, AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p);

/// Metrics of predictions `fitted` against `y` for a model with p features.
RegressionMetrics metrics_from_predictions(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted, Index p,
                                           AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p);

/// p = number of columns of x.
RegressionMetrics metrics(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const OlsFit& fit,
                          AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p);

/// p = number of nonzero coefficients (|b_j| > 1e-8).
RegressionMetrics metrics(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ElasticNetFit& fit,
                          AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p);

/// Held-out errors of one cross-validation pass.
struct CvResult {
  double rmse = 0.0;               // sqrt(total held-out SSE / n)
  std::vector<double> fold_rmse;   // per-fold held-out RMSE
  std::vector<double> fold_r2;     // per-fold held-out R^2 (against the fold mean)
};

/// Caches per-fold Gram systems over all features so that repeated
/// cross-validation of different feature subsets only touches m x m blocks.
class CrossValidator {
 public:
  CrossValidator(const Dataset& ds, const FoldPlan& folds);

  CvResult elastic_net(std::span<const Index> subset, double alpha, double lambda,
                       const EnOptions& options = {}) const;
  CvResult ols(std::span<const Index> subset) const;
  CvResult intercept_only() const;

  int folds() const noexcept { return static_cast<int>(folds_.size()); }
  Index n() const noexcept { return n_; }

 private:
  struct Fold {
    CenteredGram train;
    Eigen::MatrixXd test_x;
    Eigen::VectorXd test_y;
  };

  template <typename Fitter>
  CvResult run(std::span<const Index> subset, Fitter&& fit) const;

  std::vector<Fold> folds_;
  Index n_ = 0;
};

/// k-fold cross-validated RMSE of an Elastic Net restricted to `subset`.
/// Throws Error(degenerate) for an empty subset.
double rmse_cv(const Dataset& ds, std::span<const Index> subset, double alpha, double lambda,
               const FoldPlan& folds, const EnOptions& options = {});

/// SSE(base) - SSE(base + added) with OLS fits; clamped at 0.
double extra_sum_of_squares(const Dataset& ds, std::span<const Index> base, Index added);

}  // namespace enfuse
