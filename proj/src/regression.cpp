#include "enfuse/regression.hpp"

#include <algorithm>
#include <cmath>

#include "enfuse/error.hpp"

namespace enfuse {
namespace {

void require_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorKind::numeric, "non-finite values in design or response");
}

double penalty(const Eigen::VectorXd& beta, double alpha) {
  return 0.5 * (1.0 - alpha) * beta.squaredNorm() + alpha * beta.lpNorm<1>();
}

Eigen::MatrixXd sub_gram(const Eigen::MatrixXd& xx, std::span<const Index> subset) {
  const auto m = static_cast<Index>(subset.size());
  Eigen::MatrixXd g(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) g(a, b) = xx(subset[static_cast<std::size_t>(a)], subset[static_cast<std::size_t>(b)]);
  }
  return g;
}

Eigen::VectorXd sub_vector(const Eigen::VectorXd& v, std::span<const Index> subset) {
  Eigen::VectorXd out(static_cast<Index>(subset.size()));
  for (std::size_t a = 0; a < subset.size(); ++a) out(static_cast<Index>(a)) = v(subset[a]);
  return out;
}

}  // namespace

OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw Error(ErrorKind::data, "design rows do not match response length");
  if (x.rows() <= x.cols()) throw Error(ErrorKind::data, "insufficient observations");
  require_finite(x, y);
  OlsFit fit;
  const double y_mean = y.mean();
  if (x.cols() == 0) {
    fit.intercept = y_mean;
    fit.coefficients = Eigen::VectorXd(0);
    return fit;
  }
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xc);
  fit.coefficients = cod.solve(yc);
  fit.intercept = y_mean - x_mean.dot(fit.coefficients);
  return fit;
}

double sse_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto fit = fit_ols(x, y);
  const Eigen::VectorXd resid = (y - x * fit.coefficients).array() - fit.intercept;
  return resid.squaredNorm();
}

Index ElasticNetFit::nonzero_count(double threshold) const {
  return static_cast<Index>((coefficients.array().abs() > threshold).count());
}

CenteredGram CenteredGram::from(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  CenteredGram g;
  g.n = x.rows();
  const double inv_n = 1.0 / static_cast<double>(g.n);
  g.x_mean = x.colwise().mean().transpose();
  g.y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - g.x_mean.transpose();
  const Eigen::VectorXd yc = y.array() - g.y_mean;
  g.xx = (xc.transpose() * xc) * inv_n;
  g.xy = (xc.transpose() * yc) * inv_n;
  g.yy = yc.squaredNorm() * inv_n;
  return g;
}

ElasticNetFit fit_elastic_net(const CenteredGram& gram, std::span<const Index> subset, double alpha,
                              double lambda, const EnOptions& options) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::config, "alpha must lie in [0,1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::config, "lambda must be non-negative");
  if (gram.n < 2) throw Error(ErrorKind::data, "elastic net needs at least 2 rows");

  const auto m = static_cast<Index>(subset.size());
  const Eigen::MatrixXd g = sub_gram(gram.xx, subset);
  const Eigen::VectorXd c = sub_vector(gram.xy, subset);
  const double l1 = lambda * alpha;
  const double l2 = lambda * (1.0 - alpha);

  ElasticNetFit fit;
  fit.alpha = alpha;
  fit.lambda = lambda;
  fit.coefficients = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd& beta = fit.coefficients;
  // grad_j = (1/N) x_j' r for the current residual r (centered problem).
  Eigen::VectorXd grad = c;

  auto objective = [&] {
    const double half_mse = 0.5 * std::max(0.0, gram.yy - 2.0 * beta.dot(c) + beta.dot(g * beta));
    return half_mse + lambda * penalty(beta, alpha);
  };

  for (int sweep = 1; sweep <= options.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double denom = g(j, j) + l2;
      const double old = beta(j);
      const double updated = denom > 0.0 ? soft_threshold(grad(j) + g(j, j) * old, l1) / denom : 0.0;
      const double delta = updated - old;
      if (delta != 0.0) {
        beta(j) = updated;
        grad.noalias() -= g.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    fit.iterations = sweep;
    if (options.record_history) fit.objective_history.push_back(objective());
    if (max_change < options.tol) {
      fit.converged = true;
      break;
    }
  }
  if (m == 0) fit.converged = true;
  if (fit.iterations == 0) fit.iterations = 1;

  double dot = 0.0;
  for (Index j = 0; j < m; ++j) dot += gram.x_mean(subset[static_cast<std::size_t>(j)]) * beta(j);
  fit.intercept = gram.y_mean - dot;
  fit.objective = objective();
  if (!std::isfinite(fit.objective)) throw Error(ErrorKind::numeric, "elastic net objective is not finite");
  return fit;
}

ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha, double lambda,
                              const EnOptions& options) {
  if (x.rows() != y.size()) throw Error(ErrorKind::data, "design rows do not match response length");
  if (x.rows() < 2) throw Error(ErrorKind::data, "elastic net needs at least 2 rows");
  require_finite(x, y);
  const auto gram = CenteredGram::from(x, y);
  std::vector<Index> all(static_cast<std::size_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) all[static_cast<std::size_t>(j)] = j;
  return fit_elastic_net(gram, all, alpha, lambda, options);
}

ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha, double lambda,
                              double tol, int max_iter) {
  EnOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return fit_elastic_net(x, y, alpha, lambda, options);
}

double lasso_null_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd yc = y.array() - y.mean();
  return (x.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

double adjusted_r2(double r2, Index n, Index p, AdjustedR2Convention convention) {
  const Index dof = convention == AdjustedR2Convention::n_minus_p ? n - p : n - p - 1;
  if (dof <= 0) throw Error(ErrorKind::data, "adjusted r2 needs more observations than features");
  return 1.0 - (static_cast<double>(n - 1) / static_cast<double>(dof)) * (1.0 - r2);
}

RegressionMetrics metrics_from_predictions(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted, Index p,
                                           AdjustedR2Convention convention) {
  if (y.size() != fitted.size()) throw Error(ErrorKind::data, "prediction length does not match response");
  RegressionMetrics m;
  m.n = y.size();
  m.p = p;
  if (p >= m.n) throw Error(ErrorKind::data, "metrics need p < n");
  const double sst = (y.array() - y.mean()).square().sum();
  if (!(sst > 0.0)) throw Error(ErrorKind::degenerate, "undefined r2");
  m.sse = (y - fitted).squaredNorm();
  m.rmse = std::sqrt(m.sse / static_cast<double>(m.n));
  m.r2 = 1.0 - m.sse / sst;
  m.r2_adj = adjusted_r2(m.r2, m.n, p, convention);
  return m;
}

RegressionMetrics metrics(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const OlsFit& fit,
                          AdjustedR2Convention convention) {
  const Eigen::VectorXd fitted = (x * fit.coefficients).array() + fit.intercept;
  return metrics_from_predictions(y, fitted, x.cols(), convention);
}

RegressionMetrics metrics(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ElasticNetFit& fit,
                          AdjustedR2Convention convention) {
  const Eigen::VectorXd fitted = (x * fit.coefficients).array() + fit.intercept;
  return metrics_from_predictions(y, fitted, fit.nonzero_count(), convention);
}

CrossValidator::CrossValidator(const Dataset& ds, const FoldPlan& folds) : n_(ds.n()) {
  if (folds.n() != ds.n()) throw Error(ErrorKind::data, "fold plan does not match dataset rows");
  folds_.reserve(static_cast<std::size_t>(folds.k));
  for (int f = 0; f < folds.k; ++f) {
    const auto train_rows = folds.in_fold_complement(f);
    const auto test_rows = folds.held_out(f);
    if (test_rows.empty() || train_rows.size() < 2) throw Error(ErrorKind::data, "fold plan has an empty fold");
    Fold fold;
    Eigen::MatrixXd tx(static_cast<Index>(train_rows.size()), ds.p());
    Eigen::VectorXd ty(static_cast<Index>(train_rows.size()));
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      tx.row(static_cast<Index>(i)) = ds.x().row(train_rows[i]);
      ty(static_cast<Index>(i)) = ds.y()(train_rows[i]);
    }
    fold.train = CenteredGram::from(tx, ty);
    fold.test_x.resize(static_cast<Index>(test_rows.size()), ds.p());
    fold.test_y.resize(static_cast<Index>(test_rows.size()));
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      fold.test_x.row(static_cast<Index>(i)) = ds.x().row(test_rows[i]);
      fold.test_y(static_cast<Index>(i)) = ds.y()(test_rows[i]);
    }
    folds_.push_back(std::move(fold));
  }
}

template <typename Fitter>
CvResult CrossValidator::run(std::span<const Index> subset, Fitter&& fit) const {
  CvResult out;
  double total_sse = 0.0;
  for (const auto& fold : folds_) {
    const auto [intercept, beta] = fit(fold.train);
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(fold.test_y.size(), intercept);
    for (std::size_t a = 0; a < subset.size(); ++a) {
      pred.noalias() += fold.test_x.col(subset[a]) * beta(static_cast<Index>(a));
    }
    const double sse = (fold.test_y - pred).squaredNorm();
    const double sst = (fold.test_y.array() - fold.test_y.mean()).square().sum();
    total_sse += sse;
    out.fold_rmse.push_back(std::sqrt(sse / static_cast<double>(fold.test_y.size())));
    out.fold_r2.push_back(sst > 0.0 ? 1.0 - sse / sst : 0.0);
  }
  out.rmse = std::sqrt(total_sse / static_cast<double>(n_));
  return out;
}

CvResult CrossValidator::elastic_net(std::span<const Index> subset, double alpha, double lambda,
                                     const EnOptions& options) const {
  return run(subset, [&](const CenteredGram& g) {
    auto fit = fit_elastic_net(g, subset, alpha, lambda, options);
    return std::pair{fit.intercept, std::move(fit.coefficients)};
  });
}

CvResult CrossValidator::ols(std::span<const Index> subset) const {
  return run(subset, [&](const CenteredGram& g) {
    if (static_cast<Index>(subset.size()) >= g.n) throw Error(ErrorKind::data, "insufficient observations");
    Eigen::VectorXd beta(static_cast<Index>(subset.size()));
    if (!subset.empty()) {
      // pinv(X'X) X'y equals pinv(X) y, so the minimum-norm solution carries over.
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub_gram(g.xx, subset));
      beta = cod.solve(sub_vector(g.xy, subset));
    }
    double dot = 0.0;
    for (std::size_t a = 0; a < subset.size(); ++a) dot += g.x_mean(subset[a]) * beta(static_cast<Index>(a));
    return std::pair{g.y_mean - dot, std::move(beta)};
  });
}

CvResult CrossValidator::intercept_only() const {
  return run({}, [](const CenteredGram& g) { return std::pair{g.y_mean, Eigen::VectorXd(0)}; });
}

double rmse_cv(const Dataset& ds, std::span<const Index> subset, double alpha, double lambda,
               const FoldPlan& folds, const EnOptions& options) {
  if (subset.empty()) throw Error(ErrorKind::degenerate, "degenerate subset");
  return CrossValidator(ds, folds).elastic_net(subset, alpha, lambda, options).rmse;
}

double extra_sum_of_squares(const Dataset& ds, std::span<const Index> base, Index added) {
  if (std::find(base.begin(), base.end(), added) != base.end()) {
    throw Error(ErrorKind::data, "added feature already in base set");
  }
  if (static_cast<Index>(base.size()) + 1 >= ds.n()) throw Error(ErrorKind::data, "insufficient observations");
  std::vector<Index> extended(base.begin(), base.end());
  extended.push_back(added);
  const double reduced = sse_ols(ds.columns(base), ds.y());
  const double full = sse_ols(ds.columns(extended), ds.y());
  return std::max(0.0, reduced - full);
}

}  // namespace enfuse
