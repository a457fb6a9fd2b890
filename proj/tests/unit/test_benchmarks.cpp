#include <random>

#include <gtest/gtest.h>

#include "enfuse/benchmarks.hpp"
#include "enfuse/error.hpp"
#include "enfuse/synth.hpp"
#include "support.hpp"

using namespace enfuse;
using namespace enfuse::benchmarks;
using namespace enfuse::testing;

namespace {

std::pair<Dataset, Dataset> planted(std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.seed = seed;
  return preprocess_split(synth::to_raw_table(synth::generate(spec)), 0.7, seed);
}

}  // namespace

TEST(GaFitness, Examples) {
  EXPECT_DOUBLE_EQ(ga_fitness(10, 4, 0.5, 0.5), 7.0);
  EXPECT_DOUBLE_EQ(ga_fitness(3.25, 17, 1.0, 0.0), 3.25);
}

TEST(GaConfig, Validation) {
  GaConfig c;
  EXPECT_NO_THROW(c.validate());
  c.w_r = 0.0;
  c.w_p = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = GaConfig{};
  c.population_size = 1;
  EXPECT_THROW(c.validate(), Error);
  c = GaConfig{};
  c.mutation_rate = 1.5;
  EXPECT_THROW(c.validate(), Error);
}

TEST(GaLr, SingleExactFeature) {
  std::mt19937_64 gen(1);
  const auto x = uniform_matrix(60, 8, gen);
  const Eigen::VectorXd y = (3.0 + 5.0 * x.col(4).array()).matrix();
  const auto ds = unit_dataset(x, y);
  GaConfig c;
  c.population_size = 30;
  c.generations = 40;
  c.seed = 2;
  const auto r = run_ga_lr(ds, ds, c, make_folds(60, 10, 1));
  EXPECT_EQ(r.selected, std::vector<Index>{4});
  EXPECT_NEAR(r.best_fitness, 0.5, 1e-6);
}

TEST(GaLr, HistoryNonIncreasingAndDeterministic) {
  const auto [train, test] = planted(3);
  const auto folds = make_folds(train.n(), 10, 3);
  GaConfig c;
  c.population_size = 20;
  c.generations = 25;
  c.seed = 5;
  const auto a = run_ga_lr(train, test, c, folds);
  ASSERT_EQ(a.fitness_history.size(), 26u);
  for (std::size_t g = 1; g < a.fitness_history.size(); ++g) {
    EXPECT_LE(a.fitness_history[g], a.fitness_history[g - 1]);
  }
  EXPECT_DOUBLE_EQ(a.best_fitness, a.fitness_history.back());
  c.threads = 3;
  const auto b = run_ga_lr(train, test, c, folds);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.fitness_history, b.fitness_history);
}

TEST(GaLr, AccuracyOnlySelectsMore) {
  int larger_or_equal = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto [train, test] = planted(seed);
    const auto folds = make_folds(train.n(), 10, seed);
    GaConfig c;
    c.population_size = 30;
    c.generations = 30;
    c.seed = seed;
    c.w_r = 1.0;
    c.w_p = 0.0;
    const auto accuracy = run_ga_lr(train, test, c, folds);
    c.w_r = 0.3;
    c.w_p = 0.7;
    const auto sparse = run_ga_lr(train, test, c, folds);
    larger_or_equal += accuracy.selected.size() >= sparse.selected.size();
  }
  EXPECT_GE(larger_or_equal, 4);
}

TEST(EnGrid, ZeroLambdaKeepsAll) {
  const auto [train, test] = planted(4);
  const auto rows = run_en_grid(train, test, std::vector<double>{0.0}, 0.5, make_folds(train.n(), 10, 4));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(static_cast<Index>(rows[0].selected.size()), train.p());
  EXPECT_FALSE(rows[0].degenerate);
}

TEST(EnGrid, HugeLambdaIsDegenerate) {
  const auto [train, test] = planted(5);
  const auto rows = run_en_grid(train, test, std::vector<double>{1e6}, 0.5, make_folds(train.n(), 10, 5));
  EXPECT_TRUE(rows[0].selected.empty());
  EXPECT_TRUE(rows[0].degenerate);
}

TEST(EnGrid, CountNonIncreasingInLambda) {
  const auto [train, test] = planted(6);
  const std::vector<double> grid{0.0, 0.25, 0.5, 1.0};
  const auto rows = run_en_grid(train, test, grid, 0.5, make_folds(train.n(), 10, 6));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].selected.size(), rows[i - 1].selected.size());
}

TEST(EnGrid, EmptyGridRejected) {
  const auto [train, test] = planted(7);
  EXPECT_THROW(run_en_grid(train, test, std::vector<double>{}, 0.5, make_folds(train.n(), 10, 7)), Error);
}
