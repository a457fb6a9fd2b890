#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "enfuse/data.hpp"
#include "enfuse/mopso.hpp"
#include "enfuse/regression.hpp"

namespace enfuse::fusion {

using mopso::EvaluatedSolution;
using mopso::ParetoArchive;

struct ParetoMemberScore {
  Index member_index = 0;
  double r2_adj = 0.0;
  double weight = 0.0;
  double mse = 0.0;  // OLS residual variance SSE / (n - p - 1)
};

/// ESS of every feature (rows) in every Pareto member (columns). `features`
/// maps rows to dataset columns and is the sorted union of member masks.
struct FeatureScoreMatrix {
  std::vector<Index> features;
  Eigen::MatrixXd ess;
};

/// Members in the order fusion processes them: by cardinality, then rmse,
/// then mask, then lambda. Empty masks are dropped.
std::vector<EvaluatedSolution> canonical_members(std::span<const EvaluatedSolution> members);

/// OLS adjusted R^2 of each member on the training data, negatives clamped to
/// zero, normalized to sum to one. Members need n > p + 1.
std::vector<ParetoMemberScore> member_weights(std::span<const EvaluatedSolution> members, const Dataset& train,
                                              AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p);

/// ess(j, i) = SSE(M_i \ {j}) - SSE(M_i) for j in M_i, zero otherwise.
FeatureScoreMatrix feature_ess_scores(std::span<const EvaluatedSolution> members, const Dataset& train,
                                      std::size_t threads = 1);

/// Score_j = sum_i w_i ess(j, i).
Eigen::VectorXd saw_scores(std::span<const double> weights, const Eigen::MatrixXd& ess);

enum class PolicyKind { partial_f, above_mean, top_k, absolute_threshold };

/// Rule turning scores into the final set:
///   partial-f[:c]          Score_j > F_c(1, df) * pooled residual variance (default, c = 0.9)
///   above-mean             Score_j > mean of the positive scores
///   top-k:K                the K largest positive scores
///   absolute-threshold:T   Score_j > T
struct SelectionPolicy {
  PolicyKind kind = PolicyKind::partial_f;
  std::size_t k = 0;
  double threshold = 0.0;
  double confidence = 0.9;

  std::string name() const;
  static SelectionPolicy parse(const std::string& text);
};

/// Residual scale the partial-f rule compares scores against: the weighted
/// member residual variance and the smallest member residual df.
struct ResidualScale {
  double variance = 0.0;
  double df = 0.0;
};

ResidualScale pooled_residual_scale(std::span<const ParetoMemberScore> scores,
                                    std::span<const EvaluatedSolution> members, Index n);

/// Upper `confidence` quantile of the F(1, df) distribution.
double f_critical(double confidence, double df);

struct Selection {
  std::vector<Index> selected;  // positions in the score vector
  double threshold_used = 0.0;
  bool fallback = false;  // filter came back empty and the argmax was kept
};

/// `scale` is required by the partial-f rule and ignored by the others.
Selection select_final(std::span<const double> scores, const SelectionPolicy& policy,
                       const std::optional<ResidualScale>& scale = std::nullopt);

/// Evaluation of one model refit on the fused feature set.
struct ModelEvaluation {
  std::string model;  // "ols" or "elastic-net"
  double lambda = 0.0;
  RegressionMetrics train;
  CvResult train_cv;
  RegressionMetrics test;
};

struct FusionReport {
  std::vector<EvaluatedSolution> members;  // canonical order
  std::vector<ParetoMemberScore> member_scores;
  FeatureScoreMatrix ess;
  Eigen::VectorXd scores;  // aligned with ess.features
  std::vector<Index> selected;  // dataset feature indices
  double threshold_used = 0.0;
  bool fallback = false;
  SelectionPolicy policy;
  ModelEvaluation ols;
  ModelEvaluation elastic_net;

  const RegressionMetrics& train_metrics() const noexcept { return ols.train; }
  const RegressionMetrics& test_metrics() const noexcept { return ols.test; }
};

struct FuseOptions {
  SelectionPolicy policy{};
  double alpha = 0.5;
  /// Lambda for the Elastic Net refit; the median archive lambda when unset.
  std::optional<double> lambda_eval;
  AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p;
  EnOptions en_options{};
  std::size_t threads = 1;
};

FusionReport fuse(std::span<const EvaluatedSolution> members, const Dataset& train, const Dataset& test,
                  const FoldPlan& folds, const FuseOptions& options = {});

FusionReport fuse(const ParetoArchive& archive, const Dataset& train, const Dataset& test, const FoldPlan& folds,
                  const FuseOptions& options = {});

}  // namespace enfuse::fusion
