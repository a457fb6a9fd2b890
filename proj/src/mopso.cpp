#include "enfuse/mopso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "enfuse/error.hpp"
#include "enfuse/parallel.hpp"

namespace enfuse::mopso {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string mask_key(const Mask& mask) {
  std::string key(mask.size(), '0');
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) key[j] = '1';
  }
  return key;
}

bool same_genome(const EvaluatedSolution& a, const EvaluatedSolution& b) {
  if (a.mask != b.mask) return false;
  return lambda_key(a.lambda) == lambda_key(b.lambda) || a.objectives == b.objectives;
}

}  // namespace

bool dominates(const Objectives& a, const Objectives& b) noexcept {
  const bool no_worse = a.rmse_cv <= b.rmse_cv && a.cardinality <= b.cardinality;
  const bool better = a.rmse_cv < b.rmse_cv || a.cardinality < b.cardinality;
  return no_worse && better;
}

std::vector<double> crowding_distances(std::span<const Objectives> front) {
  const std::size_t n = front.size();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  std::vector<std::size_t> order(n);
  for (int objective = 0; objective < 2; ++objective) {
    auto value = [&](std::size_t i) {
      return objective == 0 ? front[i].rmse_cv : front[i].cardinality;
    };
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    const double range = value(order.back()) - value(order.front());
    if (!(range > 0.0)) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      distance[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / range;
    }
  }
  return distance;
}

std::vector<Index> EvaluatedSolution::features() const {
  std::vector<Index> out;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) out.push_back(static_cast<Index>(j));
  }
  return out;
}

std::int64_t lambda_key(double lambda) noexcept {
  return static_cast<std::int64_t>(std::llround(lambda / kLambdaQuantum));
}

ParetoArchive::ParetoArchive(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorKind::config, "archive capacity must be positive");
}

bool ParetoArchive::valid() const {
  if (members_.size() > capacity_) return false;
  for (std::size_t a = 0; a < members_.size(); ++a) {
    for (std::size_t b = 0; b < members_.size(); ++b) {
      if (a == b) continue;
      if (dominates(members_[a].objectives, members_[b].objectives)) return false;
      if (a < b && same_genome(members_[a], members_[b])) return false;
    }
  }
  std::vector<Objectives> objs;
  for (const auto& m : members_) objs.push_back(m.objectives);
  const auto crowd = crowding_distances(objs);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (crowd[i] != members_[i].crowding) return false;
  }
  return true;
}

ParetoArchive ParetoArchive::updated(std::span<const EvaluatedSolution> candidates) const {
  std::vector<EvaluatedSolution> pool = members_;
  for (const auto& c : candidates) {
    const bool duplicate = std::any_of(pool.begin(), pool.end(), [&](const auto& m) { return same_genome(m, c); });
    if (!duplicate) pool.push_back(c);
  }

  std::vector<EvaluatedSolution> front;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const bool dominated = std::any_of(pool.begin(), pool.end(), [&](const auto& other) {
      return dominates(other.objectives, pool[i].objectives);
    });
    if (!dominated) front.push_back(pool[i]);
  }

  std::vector<Objectives> objs;
  auto refresh = [&] {
    objs.clear();
    for (const auto& m : front) objs.push_back(m.objectives);
    return crowding_distances(objs);
  };
  while (front.size() > capacity_) {
    const auto crowd = refresh();
    const auto victim = std::min_element(crowd.begin(), crowd.end()) - crowd.begin();
    front.erase(front.begin() + victim);
  }
  const auto crowd = refresh();
  for (std::size_t i = 0; i < front.size(); ++i) front[i].crowding = crowd[i];

  ParetoArchive out(capacity_);
  out.members_ = std::move(front);
  return out;
}

ParetoArchive update_archive(const ParetoArchive& archive, std::span<const EvaluatedSolution> swarm_evals) {
  return archive.updated(swarm_evals);
}

Coefficients acceleration_coefficients(double t, const MopsoConfig& config) noexcept {
  const double frac = t / static_cast<double>(config.max_iter);
  return {config.c1_initial - frac, config.c2_initial + frac};
}

void MopsoConfig::validate() const {
  if (swarm_size < 1) throw Error(ErrorKind::config, "swarm size must be positive");
  if (archive_size < 1) throw Error(ErrorKind::config, "archive size must be positive");
  if (max_iter < 1) throw Error(ErrorKind::config, "max iterations must be positive");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw Error(ErrorKind::config, "mutation rate must lie in [0,1]");
  if (!(lambda_min >= 0.0 && lambda_max > lambda_min)) throw Error(ErrorKind::config, "lambda range must satisfy 0 <= min < max");
  if (!(v_max > 0.0)) throw Error(ErrorKind::config, "v_max must be positive");
  if (!(inertia < 1.0)) throw Error(ErrorKind::config, "inertia must be below 1");
  const double upper = 4.0 * (1.0 + inertia);
  for (double t : {0.0, static_cast<double>(max_iter)}) {
    const auto c = acceleration_coefficients(t, *this);
    const double sum = c.c1 + c.c2;
    if (!(sum > 0.0 && sum < upper)) {
      throw Error(ErrorKind::config, "acceleration schedule violates the convergence restriction");
    }
  }
}

Decoded decode(const Eigen::VectorXd& position, double lambda_min, double lambda_max) {
  if (position.size() < 1) throw Error(ErrorKind::data, "position must hold at least the lambda gene");
  Decoded d;
  const Index p = position.size() - 1;
  d.mask.resize(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) d.mask[static_cast<std::size_t>(j)] = position(j) >= 0.5;
  d.lambda = lambda_min + position(p) * (lambda_max - lambda_min);
  return d;
}

Evaluator::Evaluator(const Dataset& ds, const FoldPlan& folds, double alpha, EnOptions options)
    : cv_(ds, folds), alpha_(alpha), options_(options), empty_penalty_(cv_.intercept_only().rmse) {}

double Evaluator::quantize(double lambda) const noexcept {
  return static_cast<double>(lambda_key(lambda)) * kLambdaQuantum;
}

Objectives Evaluator::evaluate(const Mask& mask, double lambda) const {
  auto key = std::pair{mask_key(mask), lambda_key(lambda)};
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  std::vector<Index> subset;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) subset.push_back(static_cast<Index>(j));
  }
  Objectives obj;
  obj.cardinality = static_cast<double>(subset.size());
  obj.rmse_cv = subset.empty() ? empty_penalty_ : cv_.elastic_net(subset, alpha_, quantize(lambda), options_).rmse;
  if (!std::isfinite(obj.rmse_cv)) throw Error(ErrorKind::numeric, "non-finite cross-validated rmse");
  std::lock_guard lock(mutex_);
  cache_.emplace(std::move(key), obj);
  return obj;
}

std::size_t Evaluator::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

Objectives evaluate(const Dataset& ds, const Mask& mask, double lambda, const FoldPlan& folds, double alpha,
                    const EnOptions& options) {
  return Evaluator(ds, folds, alpha, options).evaluate(mask, lambda);
}

Particle update_pbest(Particle particle, const Objectives& new_eval, Rng& rng) {
  bool replace = false;
  if (dominates(new_eval, particle.pbest_objectives)) {
    replace = true;
  } else if (!dominates(particle.pbest_objectives, new_eval)) {
    replace = rng.bernoulli(0.5);
  }
  if (replace) {
    particle.pbest_position = particle.position;
    particle.pbest_objectives = new_eval;
  }
  return particle;
}

const EvaluatedSolution& select_gbest(const ParetoArchive& archive, Rng& rng) {
  const auto& members = archive.members();
  if (members.empty()) throw Error(ErrorKind::data, "cannot select a leader from an empty archive");
  if (members.size() == 1) return members.front();
  const auto a = static_cast<std::size_t>(rng.index(members.size()));
  auto b = static_cast<std::size_t>(rng.index(members.size() - 1));
  if (b >= a) ++b;
  const double ca = members[a].crowding;
  const double cb = members[b].crowding;
  if (ca > cb) return members[a];
  if (cb > ca) return members[b];
  return rng.bernoulli(0.5) ? members[a] : members[b];
}

Particle advance(Particle particle, const Eigen::VectorXd& gbest_position, double inertia, Coefficients c,
                 const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, double v_max) {
  auto& x = particle.position;
  auto& v = particle.velocity;
  for (Index j = 0; j < x.size(); ++j) {
    double vj = inertia * v(j) + r1(j) * c.c1 * (particle.pbest_position(j) - x(j)) +
                r2(j) * c.c2 * (gbest_position(j) - x(j));
    vj = std::clamp(vj, -v_max, v_max);
    v(j) = vj;
    x(j) = std::clamp(x(j) + vj, 0.0, 1.0);
  }
  return particle;
}

Particle velocity_position_update(Particle particle, const Eigen::VectorXd& gbest_position, int iteration,
                                  const MopsoConfig& config, Rng& rng) {
  const Index dim = particle.position.size();
  Eigen::VectorXd r1(dim);
  Eigen::VectorXd r2(dim);
  for (Index j = 0; j < dim; ++j) {
    r1(j) = rng.uniform();
    r2(j) = rng.uniform();
  }
  return advance(std::move(particle), gbest_position, config.inertia,
                 acceleration_coefficients(iteration, config), r1, r2, config.v_max);
}

MutationOutcome hop(Particle& particle, Rng& rng) {
  MutationOutcome out{MutationKind::hop, 0};
  const Index dim = particle.position.size();
  const double per_coordinate = 1.0 / static_cast<double>(dim);
  for (Index j = 0; j < dim; ++j) {
    if (rng.bernoulli(per_coordinate)) {
      particle.position(j) = rng.uniform();
      ++out.jumped;
    }
  }
  return out;
}

MutationOutcome mutate(Particle& particle, double rate, Rng& rng) {
  if (!rng.bernoulli(rate)) return {};
  if (rng.bernoulli(0.5)) {
    particle.velocity.setZero();
    return {MutationKind::reset, 0};
  }
  return hop(particle, rng);
}

RunResult run(const Dataset& ds, const MopsoConfig& config, const FoldPlan& folds, double alpha,
              const std::function<void(const IterationView&)>& observer) {
  config.validate();
  const Evaluator evaluator(ds, folds, alpha, config.en_options);
  const Index dim = ds.p() + 1;
  const auto swarm_size = static_cast<std::size_t>(config.swarm_size);

  std::vector<Rng> streams;
  std::vector<Particle> swarm(swarm_size);
  for (std::size_t i = 0; i < swarm_size; ++i) {
    streams.emplace_back(derive_seed(config.seed, "mopso.particle", i));
    auto& particle = swarm[i];
    particle.position.resize(dim);
    for (Index j = 0; j < dim; ++j) particle.position(j) = streams[i].uniform();
    particle.velocity = Eigen::VectorXd::Zero(dim);
  }

  RunResult result{ParetoArchive(static_cast<std::size_t>(config.archive_size)), 0.0, 0};
  std::vector<EvaluatedSolution> evals(swarm_size);
  for (int t = 0; t < config.max_iter; ++t) {
    parallel_for(swarm_size, config.threads, [&](std::size_t i) {
      const auto decoded = decode(swarm[i].position, config.lambda_min, config.lambda_max);
      auto& e = evals[i];
      e.mask = decoded.mask;
      e.lambda = evaluator.quantize(decoded.lambda);
      e.objectives = evaluator.evaluate(decoded.mask, decoded.lambda);
      e.position = swarm[i].position;
      e.crowding = 0.0;
    });
    if (t == 0) {
      result.initial_best_rmse = std::min_element(evals.begin(), evals.end(), [](const auto& a, const auto& b) {
                                   return a.objectives.rmse_cv < b.objectives.rmse_cv;
                                 })->objectives.rmse_cv;
    }

    result.archive = update_archive(result.archive, evals);

    for (std::size_t i = 0; i < swarm_size; ++i) {
      auto& particle = swarm[i];
      auto& rng = streams[i];
      if (t == 0) {
        particle.pbest_position = particle.position;
        particle.pbest_objectives = evals[i].objectives;
      } else {
        particle = update_pbest(std::move(particle), evals[i].objectives, rng);
      }
      const auto& leader = select_gbest(result.archive, rng);
      particle = velocity_position_update(std::move(particle), leader.position, t, config, rng);
      mutate(particle, config.mutation_rate, rng);
    }

    if (observer) observer(IterationView{t, result.archive, swarm, evals});
  }
  result.distinct_evaluations = evaluator.cache_size();
  return result;
}

}  // namespace enfuse::mopso
