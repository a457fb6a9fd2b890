#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "enfuse/data.hpp"
#include "enfuse/regression.hpp"

namespace enfuse::benchmarks {

/// F = w_r * rmse_cv + w_p * n_selected.
inline double ga_fitness(double rmse_cv, double n_selected, double w_r, double w_p) noexcept {
  return w_r * rmse_cv + w_p * n_selected;
}

struct GaConfig {
  int population_size = 50;
  int generations = 100;
  double crossover_rate = 0.7;
  double mutation_rate = 0.1;  // per bit
  double w_r = 0.5;
  double w_p = 0.5;
  double elite_fraction = 0.10;
  double immigrant_fraction = 0.05;
  double parent_fraction = 0.5;  // truncation pool the parents are drawn from
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct BenchmarkResult {
  std::string method;  // "ga-lr" or "en-grid"
  // Scenario: (w_r, w_p) for ga-lr, lambda for en-grid.
  double w_r = 0.0;
  double w_p = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  std::vector<Index> selected;
  bool degenerate = false;
  RegressionMetrics train;
  CvResult train_cv;
  RegressionMetrics test;
  double wall_time_ms = 0.0;
  double best_fitness = 0.0;
  /// Best fitness after initialization and after each generation (ga-lr only).
  std::vector<double> fitness_history;
};

BenchmarkResult run_ga_lr(const Dataset& train, const Dataset& test, const GaConfig& config, const FoldPlan& folds,
                          AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p);

inline constexpr double kCoefficientZero = 1e-8;

std::vector<BenchmarkResult> run_en_grid(const Dataset& train, const Dataset& test, std::span<const double> lambdas,
                                         double alpha, const FoldPlan& folds, const EnOptions& options = {},
                                         AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p);

}  // namespace enfuse::benchmarks
