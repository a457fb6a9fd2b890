#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "enfuse/data.hpp"
#include "enfuse/regression.hpp"
#include "enfuse/rng.hpp"

namespace enfuse::mopso {

/// Both objectives are minimized. Cardinality is stored as a real so the
/// dominance and crowding machinery also works on arbitrary 2-D fronts.
struct Objectives {
  double rmse_cv = 0.0;
  double cardinality = 0.0;

  friend bool operator==(const Objectives&, const Objectives&) = default;
};

/// a <= b componentwise and a < b in at least one component.
bool dominates(const Objectives& a, const Objectives& b) noexcept;

/// Two-objective crowding distance. Boundary points of either objective get
/// +inf; an objective with zero range contributes nothing.
std::vector<double> crowding_distances(std::span<const Objectives> front);

using Mask = std::vector<bool>;

struct EvaluatedSolution {
  Mask mask;
  double lambda = 0.0;
  Objectives objectives;
  double crowding = 0.0;
  /// Continuous genome the solution was decoded from; feeds the Gbest term.
  Eigen::VectorXd position;

  Index cardinality() const noexcept { return static_cast<Index>(objectives.cardinality); }
  std::vector<Index> features() const;
};

/// lambda keys are compared after rounding to this grid.
inline constexpr double kLambdaQuantum = 1e-4;
std::int64_t lambda_key(double lambda) noexcept;

class ParetoArchive {
 public:
  explicit ParetoArchive(std::size_t capacity = 20);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const std::vector<EvaluatedSolution>& members() const noexcept { return members_; }

  /// True when no member dominates another, the capacity bound holds, no two
  /// members share (mask, lambda key), and crowding values are current.
  bool valid() const;

  /// Non-dominated subset of (members + candidates), truncated to capacity by
  /// repeatedly dropping the least-crowded member.
  ParetoArchive updated(std::span<const EvaluatedSolution> candidates) const;

 private:
  std::size_t capacity_;
  std::vector<EvaluatedSolution> members_;
};

ParetoArchive update_archive(const ParetoArchive& archive, std::span<const EvaluatedSolution> swarm_evals);

struct MopsoConfig {
  int swarm_size = 35;
  int archive_size = 20;
  int max_iter = 80;
  double inertia = 0.4;
  /// c1(t) = c1_initial - t/T_max, c2(t) = c2_initial + t/T_max.
  double c1_initial = 2.5;
  double c2_initial = 0.5;
  double mutation_rate = 0.1;
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  double v_max = 0.2;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  EnOptions en_options{};

  /// Throws Error(config) on an invalid setting, including a schedule that
  /// leaves the stability region w < 1, 0 < c1(t) + c2(t) < 4 (1 + w).
  void validate() const;
};

struct Coefficients {
  double c1 = 0.0;
  double c2 = 0.0;
};

Coefficients acceleration_coefficients(double t, const MopsoConfig& config) noexcept;

struct Particle {
  Eigen::VectorXd position;
  Eigen::VectorXd velocity;
  Eigen::VectorXd pbest_position;
  Objectives pbest_objectives;
};

struct Decoded {
  Mask mask;
  double lambda = 0.0;
};

/// mask_j = position_j >= 0.5; lambda = lambda_min + position_p (lambda_max - lambda_min).
Decoded decode(const Eigen::VectorXd& position, double lambda_min = 0.0, double lambda_max = 1.0);

/// Fitness evaluator with a (mask, lambda key) memo. Thread-safe.
///
/// The Elastic Net is fit at the quantized lambda so a cached value is a pure
/// function of its key regardless of which thread filled it.
class Evaluator {
 public:
  Evaluator(const Dataset& ds, const FoldPlan& folds, double alpha, EnOptions options = {});

  Objectives evaluate(const Mask& mask, double lambda) const;
  double quantize(double lambda) const noexcept;
  std::size_t cache_size() const;

 private:
  CrossValidator cv_;
  double alpha_;
  EnOptions options_;
  double empty_penalty_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::string, std::int64_t>, Objectives> cache_;
};

Objectives evaluate(const Dataset& ds, const Mask& mask, double lambda, const FoldPlan& folds, double alpha,
                    const EnOptions& options = {});

/// Pbest replaced on domination by the new evaluation, kept when it dominates
/// the new evaluation, replaced with probability 0.5 otherwise. The candidate
/// position is particle.position.
Particle update_pbest(Particle particle, const Objectives& new_eval, Rng& rng);

/// Binary tournament on crowding distance (ties broken uniformly).
const EvaluatedSolution& select_gbest(const ParetoArchive& archive, Rng& rng);

/// Velocity/position step with explicit random factors r1, r2 (one per coordinate).
Particle advance(Particle particle, const Eigen::VectorXd& gbest_position, double inertia, Coefficients c,
                 const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, double v_max);

Particle velocity_position_update(Particle particle, const Eigen::VectorXd& gbest_position, int iteration,
                                  const MopsoConfig& config, Rng& rng);

enum class MutationKind { none, reset, hop };

struct MutationOutcome {
  MutationKind kind = MutationKind::none;
  int jumped = 0;  // coordinates redrawn by a hop
};

/// With probability `rate`: reset (zero velocity) or hop (each coordinate
/// redrawn with probability 1/(p+1)), chosen with equal odds.
MutationOutcome mutate(Particle& particle, double rate, Rng& rng);
MutationOutcome hop(Particle& particle, Rng& rng);

struct IterationView {
  int iteration;
  const ParetoArchive& archive;
  std::span<const Particle> swarm;
  std::span<const EvaluatedSolution> evaluations;
};

struct RunResult {
  ParetoArchive archive;
  double initial_best_rmse = 0.0;
  std::size_t distinct_evaluations = 0;
};

RunResult run(const Dataset& ds, const MopsoConfig& config, const FoldPlan& folds, double alpha,
              const std::function<void(const IterationView&)>& observer = {});

}  // namespace enfuse::mopso
