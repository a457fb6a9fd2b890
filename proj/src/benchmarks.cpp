#include "enfuse/benchmarks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "enfuse/error.hpp"
#include "enfuse/parallel.hpp"
#include "enfuse/rng.hpp"

namespace enfuse::benchmarks {
namespace {

using Genome = std::vector<char>;

std::vector<Index> genome_features(const Genome& g) {
  std::vector<Index> out;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g[j]) out.push_back(static_cast<Index>(j));
  }
  return out;
}

void repair(Genome& g, Rng& rng) {
  if (std::none_of(g.begin(), g.end(), [](char b) { return b != 0; })) g[rng.index(g.size())] = 1;
}

Genome random_genome(std::size_t p, Rng& rng) {
  Genome g(p);
  for (auto& b : g) b = rng.bernoulli(0.5) ? 1 : 0;
  repair(g, rng);
  return g;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void GaConfig::validate() const {
  if (population_size < 2) throw Error(ErrorKind::config, "population size must be at least 2");
  if (generations < 1) throw Error(ErrorKind::config, "generations must be positive");
  for (double r : {crossover_rate, mutation_rate, elite_fraction, immigrant_fraction, parent_fraction}) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorKind::config, "ga rates and fractions must lie in [0,1]");
  }
  if (!(w_r >= 0.0 && w_p >= 0.0)) throw Error(ErrorKind::config, "ga weights must be non-negative");
  if (w_r == 0.0) throw Error(ErrorKind::config, "ga scenario with w_r = 0 ignores accuracy and is rejected");
}

BenchmarkResult run_ga_lr(const Dataset& train, const Dataset& test, const GaConfig& config, const FoldPlan& folds,
                          AdjustedR2Convention convention) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const CrossValidator cv(train, folds);
  const auto p = static_cast<std::size_t>(train.p());
  const auto pop_size = static_cast<std::size_t>(config.population_size);
  Rng rng(derive_seed(config.seed, "ga"));

  std::map<Genome, double> cache;
  auto evaluate_all = [&](const std::vector<Genome>& pop) {
    std::vector<const Genome*> pending;
    for (const auto& g : pop) {
      if (!cache.contains(g) &&
          std::none_of(pending.begin(), pending.end(), [&](const Genome* q) { return *q == g; })) {
        pending.push_back(&g);
      }
    }
    std::vector<double> fitness(pending.size());
    parallel_for(pending.size(), config.threads, [&](std::size_t i) {
      const auto features = genome_features(*pending[i]);
      fitness[i] = ga_fitness(cv.ols(features).rmse, static_cast<double>(features.size()), config.w_r, config.w_p);
    });
    for (std::size_t i = 0; i < pending.size(); ++i) cache.emplace(*pending[i], fitness[i]);
    std::vector<double> out;
    for (const auto& g : pop) out.push_back(cache.at(g));
    return out;
  };
  auto ranked = [&](const std::vector<Genome>& pop, const std::vector<double>& fit) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (fit[a] != fit[b]) return fit[a] < fit[b];
      return pop[a] < pop[b];
    });
    return order;
  };

  std::vector<Genome> population;
  for (std::size_t i = 0; i < pop_size; ++i) population.push_back(random_genome(p, rng));
  auto fitness = evaluate_all(population);

  const auto n_elite = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.elite_fraction * static_cast<double>(pop_size))));
  const auto n_immigrant = static_cast<std::size_t>(std::lround(config.immigrant_fraction * static_cast<double>(pop_size)));
  const auto n_parents = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(config.parent_fraction * static_cast<double>(pop_size))), 2, pop_size);

  BenchmarkResult result;
  result.method = "ga-lr";
  result.w_r = config.w_r;
  result.w_p = config.w_p;

  auto order = ranked(population, fitness);
  result.fitness_history.push_back(fitness[order.front()]);
  for (int gen = 0; gen < config.generations; ++gen) {
    std::vector<Genome> next;
    next.reserve(pop_size);
    for (std::size_t e = 0; e < n_elite && next.size() < pop_size; ++e) next.push_back(population[order[e]]);
    for (std::size_t m = 0; m < n_immigrant && next.size() < pop_size; ++m) next.push_back(random_genome(p, rng));
    while (next.size() < pop_size) {
      const auto& a = population[order[rng.index(n_parents)]];
      const auto& b = population[order[rng.index(n_parents)]];
      Genome child = a;
      if (rng.bernoulli(config.crossover_rate)) {
        for (std::size_t j = 0; j < p; ++j) child[j] = rng.bernoulli(0.5) ? a[j] : b[j];
      }
      for (auto& bit : child) {
        if (rng.bernoulli(config.mutation_rate)) bit = bit ? 0 : 1;
      }
      repair(child, rng);
      next.push_back(std::move(child));
    }
    population = std::move(next);
    fitness = evaluate_all(population);
    order = ranked(population, fitness);
    result.fitness_history.push_back(fitness[order.front()]);
  }

  const auto& best = population[order.front()];
  result.best_fitness = fitness[order.front()];
  result.selected = genome_features(best);
  const Eigen::MatrixXd x_train = train.columns(result.selected);
  const auto fit = fit_ols(x_train, train.y());
  result.train = metrics(x_train, train.y(), fit, convention);
  result.train_cv = cv.ols(result.selected);
  result.test = metrics(test.columns(result.selected), test.y(), fit, convention);
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

std::vector<BenchmarkResult> run_en_grid(const Dataset& train, const Dataset& test, std::span<const double> lambdas,
                                         double alpha, const FoldPlan& folds, const EnOptions& options,
                                         AdjustedR2Convention convention) {
  if (lambdas.empty()) throw Error(ErrorKind::config, "lambda grid is empty");
  const CrossValidator cv(train, folds);
  std::vector<Index> all(static_cast<std::size_t>(train.p()));
  std::iota(all.begin(), all.end(), Index{0});

  std::vector<BenchmarkResult> rows;
  for (double lambda : lambdas) {
    const auto start = std::chrono::steady_clock::now();
    BenchmarkResult r;
    r.method = "en-grid";
    r.lambda = lambda;
    r.alpha = alpha;
    const auto fit = fit_elastic_net(train.x(), train.y(), alpha, lambda, options);
    for (Index j = 0; j < fit.coefficients.size(); ++j) {
      if (std::abs(fit.coefficients(j)) > kCoefficientZero) r.selected.push_back(j);
    }
    r.degenerate = r.selected.empty();
    r.train = metrics(train.x(), train.y(), fit, convention);
    r.train_cv = cv.elastic_net(all, alpha, lambda, options);
    r.test = metrics(test.x(), test.y(), fit, convention);
    r.wall_time_ms = elapsed_ms(start);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace enfuse::benchmarks
