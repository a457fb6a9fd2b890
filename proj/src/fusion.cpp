#include "enfuse/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <tuple>

#include <boost/math/distributions/fisher_f.hpp>

#include "enfuse/error.hpp"
#include "enfuse/parallel.hpp"

namespace enfuse::fusion {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ModelEvaluation evaluate_ols(const Dataset& train, const Dataset& test, std::span<const Index> selected,
                             const CrossValidator& cv, AdjustedR2Convention convention) {
  ModelEvaluation out;
  out.model = "ols";
  const Eigen::MatrixXd x_train = train.columns(selected);
  const Eigen::MatrixXd x_test = test.columns(selected);
  const auto fit = fit_ols(x_train, train.y());
  out.train = metrics(x_train, train.y(), fit, convention);
  out.train_cv = cv.ols(selected);
  out.test = metrics(x_test, test.y(), fit, convention);
  return out;
}

ModelEvaluation evaluate_en(const Dataset& train, const Dataset& test, std::span<const Index> selected,
                            const CrossValidator& cv, double alpha, double lambda, const FuseOptions& options) {
  ModelEvaluation out;
  out.model = "elastic-net";
  out.lambda = lambda;
  const Eigen::MatrixXd x_train = train.columns(selected);
  const Eigen::MatrixXd x_test = test.columns(selected);
  const auto fit = fit_elastic_net(x_train, train.y(), alpha, lambda, options.en_options);
  out.train = metrics(x_train, train.y(), fit, options.convention);
  out.train_cv = cv.elastic_net(selected, alpha, lambda, options.en_options);
  out.test = metrics(x_test, test.y(), fit, options.convention);
  return out;
}

}  // namespace

std::vector<EvaluatedSolution> canonical_members(std::span<const EvaluatedSolution> members) {
  std::vector<EvaluatedSolution> out;
  for (const auto& m : members) {
    if (m.cardinality() > 0) out.push_back(m);
  }
  std::sort(out.begin(), out.end(), [](const EvaluatedSolution& a, const EvaluatedSolution& b) {
    return std::tie(a.objectives.cardinality, a.objectives.rmse_cv, a.mask, a.lambda) <
           std::tie(b.objectives.cardinality, b.objectives.rmse_cv, b.mask, b.lambda);
  });
  return out;
}

std::vector<ParetoMemberScore> member_weights(std::span<const EvaluatedSolution> members, const Dataset& train,
                                              AdjustedR2Convention convention) {
  if (members.empty()) throw Error(ErrorKind::degenerate, "empty pareto archive");
  std::vector<ParetoMemberScore> scores;
  double total = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto features = members[i].features();
    if (features.empty()) throw Error(ErrorKind::data, "pareto member with empty mask");
    const Eigen::MatrixXd x = train.columns(features);
    const auto fit = fit_ols(x, train.y());
    const auto m = metrics(x, train.y(), fit, convention);
    const auto df = train.n() - static_cast<Index>(features.size()) - 1;
    if (df < 1) throw Error(ErrorKind::data, "insufficient observations");
    scores.push_back({static_cast<Index>(i), m.r2_adj, 0.0, m.sse / static_cast<double>(df)});
    total += std::max(m.r2_adj, 0.0);
  }
  if (!(total > 0.0)) throw Error(ErrorKind::degenerate, "no informative pareto member");
  for (auto& s : scores) s.weight = std::max(s.r2_adj, 0.0) / total;
  return scores;
}

FeatureScoreMatrix feature_ess_scores(std::span<const EvaluatedSolution> members, const Dataset& train,
                                      std::size_t threads) {
  FeatureScoreMatrix out;
  std::vector<bool> used(static_cast<std::size_t>(train.p()), false);
  for (const auto& m : members) {
    if (static_cast<Index>(m.mask.size()) != train.p()) throw Error(ErrorKind::data, "mask length does not match dataset");
    for (std::size_t j = 0; j < m.mask.size(); ++j) used[j] = used[j] || m.mask[j];
  }
  std::vector<Index> row_of(used.size(), -1);
  for (std::size_t j = 0; j < used.size(); ++j) {
    if (used[j]) {
      row_of[j] = static_cast<Index>(out.features.size());
      out.features.push_back(static_cast<Index>(j));
    }
  }
  out.ess = Eigen::MatrixXd::Zero(static_cast<Index>(out.features.size()), static_cast<Index>(members.size()));

  parallel_for(members.size(), threads, [&](std::size_t i) {
    const auto features = members[i].features();
    if (static_cast<Index>(features.size()) >= train.n()) throw Error(ErrorKind::data, "insufficient observations");
    const double full = sse_ols(train.columns(features), train.y());
    std::vector<Index> reduced;
    for (std::size_t a = 0; a < features.size(); ++a) {
      reduced.clear();
      for (std::size_t b = 0; b < features.size(); ++b) {
        if (b != a) reduced.push_back(features[b]);
      }
      const double ess = sse_ols(train.columns(reduced), train.y()) - full;
      out.ess(row_of[static_cast<std::size_t>(features[a])], static_cast<Index>(i)) = std::max(0.0, ess);
    }
  });
  return out;
}

Eigen::VectorXd saw_scores(std::span<const double> weights, const Eigen::MatrixXd& ess) {
  if (static_cast<Index>(weights.size()) != ess.cols()) throw Error(ErrorKind::data, "weight count does not match members");
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(ess.rows());
  for (Index i = 0; i < ess.cols(); ++i) scores += weights[static_cast<std::size_t>(i)] * ess.col(i);
  return scores;
}

ResidualScale pooled_residual_scale(std::span<const ParetoMemberScore> scores,
                                    std::span<const EvaluatedSolution> members, Index n) {
  ResidualScale out;
  Index widest = 0;
  for (const auto& s : scores) {
    out.variance += s.weight * s.mse;
    widest = std::max(widest, members[static_cast<std::size_t>(s.member_index)].cardinality());
  }
  out.df = static_cast<double>(n - widest - 1);
  return out;
}

double f_critical(double confidence, double df) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error(ErrorKind::config, "confidence must lie in (0,1)");
  if (!(df >= 1.0)) throw Error(ErrorKind::data, "insufficient residual degrees of freedom");
  const boost::math::fisher_f_distribution<double> dist(1.0, df);
  return boost::math::quantile(boost::math::complement(dist, 1.0 - confidence));
}

std::string SelectionPolicy::name() const {
  char buf[64];
  switch (kind) {
    case PolicyKind::partial_f: {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, confidence);
      return "partial-f:" + std::string(buf, end);
    }
    case PolicyKind::above_mean: return "above-mean";
    case PolicyKind::top_k: return "top-k:" + std::to_string(k);
    case PolicyKind::absolute_threshold: {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, threshold);
      return "absolute-threshold:" + std::string(buf, end);
    }
  }
  return "unknown";
}

SelectionPolicy SelectionPolicy::parse(const std::string& text) {
  SelectionPolicy p;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "above-mean" && arg.empty()) {
    p.kind = PolicyKind::above_mean;
    return p;
  }
  try {
    if (head == "partial-f") {
      if (!arg.empty()) p.confidence = std::stod(arg);
      if (!(p.confidence > 0.0 && p.confidence < 1.0)) throw Error(ErrorKind::config, "partial-f confidence must lie in (0,1)");
      return p;
    }
    if (head == "top-k") {
      p.kind = PolicyKind::top_k;
      const long k = std::stol(arg);
      if (k < 1) throw Error(ErrorKind::config, "top-k needs k >= 1");
      p.k = static_cast<std::size_t>(k);
      return p;
    }
    if (head == "absolute-threshold") {
      p.kind = PolicyKind::absolute_threshold;
      p.threshold = std::stod(arg);
      return p;
    }
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorKind::config, "unknown selection policy '" + text + "'");
}

Selection select_final(std::span<const double> scores, const SelectionPolicy& policy,
                       const std::optional<ResidualScale>& scale) {
  if (scores.empty()) throw Error(ErrorKind::degenerate, "all-zero scores");
  if (std::any_of(scores.begin(), scores.end(), [](double s) { return s < 0.0 || !std::isfinite(s); })) {
    throw Error(ErrorKind::data, "scores must be finite and non-negative");
  }
  std::vector<double> positive;
  for (double s : scores) {
    if (s > 0.0) positive.push_back(s);
  }
  if (positive.empty()) throw Error(ErrorKind::degenerate, "all-zero scores");

  Selection out;
  switch (policy.kind) {
    case PolicyKind::partial_f:
      if (!scale) throw Error(ErrorKind::config, "partial-f selection needs a residual scale");
      out.threshold_used = f_critical(policy.confidence, scale->df) * scale->variance;
      break;
    case PolicyKind::above_mean:
      out.threshold_used = std::accumulate(positive.begin(), positive.end(), 0.0) / static_cast<double>(positive.size());
      break;
    case PolicyKind::top_k: {
      // Ties at the cut are broken by position so exactly min(K, #positive) survive.
      std::vector<Index> order;
      for (std::size_t j = 0; j < scores.size(); ++j) {
        if (scores[j] > 0.0) order.push_back(static_cast<Index>(j));
      }
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
      });
      order.resize(std::min(order.size(), policy.k));
      std::sort(order.begin(), order.end());
      out.selected = std::move(order);
      out.threshold_used = scores[static_cast<std::size_t>(out.selected.front())];
      for (Index j : out.selected) out.threshold_used = std::min(out.threshold_used, scores[static_cast<std::size_t>(j)]);
      return out;
    }
    case PolicyKind::absolute_threshold:
      out.threshold_used = policy.threshold;
      break;
  }
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > out.threshold_used) out.selected.push_back(static_cast<Index>(j));
  }
  if (out.selected.empty()) {
    out.fallback = true;
    out.selected.push_back(static_cast<Index>(std::max_element(scores.begin(), scores.end()) - scores.begin()));
  }
  return out;
}

FusionReport fuse(std::span<const EvaluatedSolution> members, const Dataset& train, const Dataset& test,
                  const FoldPlan& folds, const FuseOptions& options) {
  FusionReport report;
  report.policy = options.policy;
  report.members = canonical_members(members);
  if (report.members.empty()) throw Error(ErrorKind::degenerate, "no pareto member with a non-empty mask");

  report.member_scores = member_weights(report.members, train, options.convention);
  report.ess = feature_ess_scores(report.members, train, options.threads);
  std::vector<double> weights;
  for (const auto& s : report.member_scores) weights.push_back(s.weight);
  report.scores = saw_scores(weights, report.ess.ess);

  const auto selection =
      select_final(std::span<const double>(report.scores.data(), static_cast<std::size_t>(report.scores.size())),
                   options.policy, pooled_residual_scale(report.member_scores, report.members, train.n()));
  for (Index row : selection.selected) report.selected.push_back(report.ess.features[static_cast<std::size_t>(row)]);
  report.threshold_used = selection.threshold_used;
  report.fallback = selection.fallback;

  const CrossValidator cv(train, folds);
  std::vector<double> lambdas;
  for (const auto& m : report.members) lambdas.push_back(m.lambda);
  const double lambda = options.lambda_eval.value_or(median(lambdas));
  report.ols = evaluate_ols(train, test, report.selected, cv, options.convention);
  report.elastic_net = evaluate_en(train, test, report.selected, cv, options.alpha, lambda, options);
  return report;
}

FusionReport fuse(const ParetoArchive& archive, const Dataset& train, const Dataset& test, const FoldPlan& folds,
                  const FuseOptions& options) {
  return fuse(archive.members(), train, test, folds, options);
}

}  // namespace enfuse::fusion
