// Acceptance run: prints one line per criterion and exits non-zero when a
// hard criterion fails. Criterion 6 is soft and never changes the exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "enfuse/benchmarks.hpp"
#include "enfuse/cli.hpp"
#include "enfuse/error.hpp"
#include "enfuse/mopso.hpp"
#include "enfuse/regression.hpp"
#include "enfuse/rng.hpp"
#include "enfuse/stats.hpp"
#include "enfuse/synth.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace enfuse;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const fs::path& path) { return json::parse(read_file(path)); }

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("enfuse_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Loads a shipped config with the environment overrides cleared.
cli::PipelineConfig shipped_config(const std::string& name) {
  ::unsetenv("ENFUSE_SEED");
  ::unsetenv("ENFUSE_OUT");
  return cli::load_config(fs::path(ENFUSE_CONFIG_DIR) / name);
}

std::pair<Dataset, Dataset> config_split(const cli::PipelineConfig& config) {
  const auto schema = load_schema(config.schema);
  return preprocess_split(load_csv(config.csv, schema), config.train_fraction, config.seed);
}

// 1. Elastic Net against closed forms.
Outcome en_solver() {
  const auto start = Clock::now();
  std::mt19937_64 gen(101);
  std::uniform_int_distribution<int> cols(1, 6);
  std::uniform_real_distribution<double> lambda_dist(0.05, 2.0);
  double ols_err = 0.0;
  double ridge_err = 0.0;
  int null_nonzero = 0;
  EnOptions tight;
  tight.tol = 1e-12;
  tight.max_iter = 100000;
  for (int problem = 0; problem < 100; ++problem) {
    const Index n = 30;
    const Index m = cols(gen);
    const Eigen::MatrixXd x = testing::random_matrix(n, m, gen);
    const Eigen::VectorXd y = x * testing::random_vector(m, gen) + testing::random_vector(n, gen);

    const Eigen::VectorXd oracle = testing::normal_equations(x, y);
    const auto ols = fit_elastic_net(x, y, 0.5, 0.0, tight);
    ols_err = std::max(ols_err, (ols.coefficients - oracle.tail(m)).cwiseAbs().maxCoeff());
    ols_err = std::max(ols_err, std::abs(ols.intercept - oracle(0)));

    const double lambda = lambda_dist(gen);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd xc = x.rowwise() - mean;
    const Eigen::VectorXd yc = y.array() - y.mean();
    const Eigen::MatrixXd a = xc.transpose() * xc / static_cast<double>(n) + lambda * Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd ridge_oracle = a.ldlt().solve(xc.transpose() * yc / static_cast<double>(n));
    const auto ridge = fit_elastic_net(x, y, 0.0, lambda, tight);
    ridge_err = std::max(ridge_err, (ridge.coefficients - ridge_oracle).cwiseAbs().maxCoeff());

    const double null_lambda = lasso_null_lambda(x, y);
    const auto lasso = fit_elastic_net(x, y, 1.0, null_lambda * 1.001 + 1e-12);
    null_nonzero += (lasso.coefficients.array() != 0.0).count() > 0;
  }
  const double elapsed = seconds_since(start);
  const bool pass = ols_err <= 1e-6 && ridge_err <= 1e-6 && null_nonzero == 0 && elapsed < 5.0;
  return {pass, "max |ols err| " + fmt(ols_err) + ", max |ridge err| " + fmt(ridge_err) + ", non-null lasso fits " +
                    std::to_string(null_nonzero) + ", " + fmt(elapsed, 3) + " s"};
}

// 2. Extra sum of squares against two explicit OLS solves.
Outcome ess_nesting() {
  std::mt19937_64 gen(202);
  double min_ess = std::numeric_limits<double>::infinity();
  double max_err = 0.0;
  for (int design = 0; design < 20; ++design) {
    const Eigen::MatrixXd x = testing::uniform_matrix(50, 10, gen);
    const Eigen::VectorXd y = x * testing::random_vector(10, gen) + testing::random_vector(50, gen);
    const auto ds = testing::unit_dataset(x, y);
    for (int draw = 0; draw < 50; ++draw) {
      std::vector<Index> order(10);
      std::iota(order.begin(), order.end(), Index{0});
      std::shuffle(order.begin(), order.end(), gen);
      const auto base_size = static_cast<std::size_t>(gen() % 10);
      std::vector<Index> base(order.begin(), order.begin() + static_cast<long>(base_size));
      const Index added = order[base_size];
      const double ess = extra_sum_of_squares(ds, base, added);
      std::vector<Index> full = base;
      full.push_back(added);
      const double oracle = testing::ols_sse(testing::take_columns(x, base), y) -
                            testing::ols_sse(testing::take_columns(x, full), y);
      min_ess = std::min(min_ess, ess);
      max_err = std::max(max_err, std::abs(ess - oracle));
    }
  }
  const bool pass = min_ess >= -1e-9 && max_err <= 1e-8;
  return {pass, "1000 draws, min ESS " + fmt(min_ess) + ", max |ESS - oracle| " + fmt(max_err)};
}

// Independent check: no member dominates another (written without dominates()).
bool mutually_non_dominated(const mopso::ParetoArchive& archive) {
  const auto& ms = archive.members();
  for (const auto& a : ms) {
    for (const auto& b : ms) {
      if (&a == &b) continue;
      const auto& oa = a.objectives;
      const auto& ob = b.objectives;
      const bool no_worse = oa.rmse_cv <= ob.rmse_cv && oa.cardinality <= ob.cardinality;
      const bool better = oa.rmse_cv < ob.rmse_cv || oa.cardinality < ob.cardinality;
      if (no_worse && better) return false;
    }
  }
  return true;
}

// 3. Archive invariants under fuzzing and the three-point crowding case.
Outcome crowding_dominance() {
  std::mt19937_64 gen(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int calls = 12000;
  int violations = 0;
  std::size_t largest = 0;
  mopso::ParetoArchive archive(10);
  for (int call = 0; call < calls; ++call) {
    if (call % 1000 == 0) archive = mopso::ParetoArchive(5 + static_cast<std::size_t>(call / 1000) % 16);
    std::vector<mopso::EvaluatedSolution> batch(1 + gen() % 8);
    for (auto& s : batch) {
      const int dim = 12;
      s.mask.assign(dim, false);
      int count = 0;
      for (int j = 0; j < dim; ++j) {
        s.mask[static_cast<std::size_t>(j)] = u(gen) < 0.4;
        count += s.mask[static_cast<std::size_t>(j)];
      }
      s.lambda = std::round(u(gen) * 20.0) / 20.0;
      // Mix integer cardinalities with continuous second objectives to force truncation.
      const double second = call % 2 == 0 ? static_cast<double>(count) : u(gen) * 12.0;
      s.objectives = {std::round(u(gen) * 200.0) / 200.0 + 0.1 * (12.0 - second) / 12.0, second};
      s.position = Eigen::VectorXd::Zero(dim + 1);
    }
    archive = mopso::update_archive(archive, batch);
    largest = std::max(largest, archive.size());
    if (!archive.valid() || !mutually_non_dominated(archive) || archive.size() > archive.capacity()) ++violations;
  }
  const std::vector<mopso::Objectives> front{{0.0, 1.0}, {0.5, 0.5}, {1.0, 0.0}};
  const auto crowd = mopso::crowding_distances(front);
  const double inf = std::numeric_limits<double>::infinity();
  const bool exact = crowd.size() == 3 && crowd[0] == inf && crowd[1] == 2.0 && crowd[2] == inf;
  return {violations == 0 && exact,
          std::to_string(calls) + " fuzzed updates, " + std::to_string(violations) + " violations, largest archive " +
              std::to_string(largest) + ", crowding (" + fmt(crowd[0]) + ", " + fmt(crowd[1]) + ", " + fmt(crowd[2]) +
              ")"};
}

// 4. Planted recovery through synth + run with the shipped planted settings.
Outcome planted_recovery() {
  const auto start = Clock::now();
  const auto base = shipped_config("planted.ini");
  int recovered = 0;
  int ranked = 0;
  std::ostringstream misses;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto dir = scratch_dir("planted_" + std::to_string(seed));
    synth::SynthSpec spec;
    spec.seed = seed;
    const auto files = cli::cmd_synth(spec, dir);
    auto config = base;
    config.csv = dir / "data.csv";
    config.schema = dir / "schema.txt";
    config.seed = seed;
    config.output = dir / "out";
    cli::cmd_run(config);

    const auto truth = read_json(dir / "truth.json");
    const auto fusion = read_json(config.output / "fusion.json");
    std::set<std::string> informative;
    for (const auto& name : truth["informative"]) informative.insert(name.get<std::string>());
    std::set<std::string> selected;
    for (const auto& name : fusion["selected_names"]) selected.insert(name.get<std::string>());
    int hits = 0;
    for (const auto& name : selected) hits += informative.count(name) > 0;
    const int noise = static_cast<int>(selected.size()) - hits;
    const bool ok = hits == static_cast<int>(informative.size()) && noise <= 3;
    recovered += ok;

    // Ranking: every informative feature scores above every noise feature.
    double worst_informative = std::numeric_limits<double>::infinity();
    double best_noise = 0.0;
    for (const auto& s : fusion["scores"]) {
      const double score = s["score"].get<double>();
      if (informative.count(s["name"].get<std::string>())) {
        worst_informative = std::min(worst_informative, score);
      } else {
        best_noise = std::max(best_noise, score);
      }
    }
    int scored_informative = 0;
    for (const auto& s : fusion["scores"]) scored_informative += informative.count(s["name"].get<std::string>()) > 0;
    ranked += scored_informative == static_cast<int>(informative.size()) && worst_informative > best_noise;
    if (!ok) misses << " s" << seed << "(" << hits << "/5," << noise << " noise)";
  }
  const double elapsed = seconds_since(start);
  const bool pass = recovered >= 18 && elapsed < 600.0;
  std::string detail = std::to_string(recovered) + "/20 runs recover the planted set, informative ranked first in " +
                       std::to_string(ranked) + "/20, " + fmt(elapsed, 4) + " s";
  if (!misses.str().empty()) detail += "; misses:" + misses.str();
  return {pass, detail};
}

// 5. Elastic Net grid count non-increasing on the residential stand-in.
Outcome en_grid_trend() {
  const auto config = shipped_config("house_standin.ini");
  const auto [train, test] = config_split(config);
  const auto folds = make_folds(train.n(), config.folds, config.seed);
  const auto rows = benchmarks::run_en_grid(train, test, config.en_lambdas, config.alpha, folds, config.en);
  bool monotone = true;
  std::string counts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) {
      monotone = monotone && rows[i].selected.size() <= rows[i - 1].selected.size();
      counts += ", ";
    }
    counts += std::to_string(rows[i].selected.size());
  }
  return {monotone && rows.size() == 4, "counts over lambda {0, 0.25, 0.5, 1}: " + counts};
}

// 6. Residential band (soft).
Outcome residential_band() {
  auto config = shipped_config("house_standin.ini");
  config.output = scratch_dir("house");
  cli::cmd_run(config);
  const auto fusion = read_json(config.output / "fusion.json");
  const auto pareto = read_json(config.output / "pareto.json");
  const double train_adj = fusion["metrics"]["ols"]["train"]["r2_adj"].get<double>();
  const double test_adj = fusion["metrics"]["ols"]["test"]["r2_adj"].get<double>();
  long lo = std::numeric_limits<long>::max();
  long hi = 0;
  for (const auto& m : pareto["members"]) {
    const long card = m["n_features"].get<long>();
    lo = std::min(lo, card);
    hi = std::max(hi, card);
  }
  const bool span = lo > 0 ? hi >= 2 * lo : hi > 0;
  const bool pass = train_adj >= 0.96 && std::abs(test_adj - train_adj) <= 0.02 && span;
  return {pass, "train r2_adj " + fmt(train_adj) + ", test r2_adj " + fmt(test_adj) + ", archive cardinality " +
                    std::to_string(lo) + ".." + std::to_string(hi) + ", " +
                    std::to_string(fusion["selected"].size()) + " fused features"};
}

// Enumerates all 2^n sign assignments of ranks 1..n.
double enumerated_p(const std::vector<double>& d, stats::Alternative alt) {
  std::vector<std::pair<double, int>> ranked;
  for (double v : d) {
    if (v != 0.0) ranked.push_back({std::abs(v), v > 0.0});
  }
  std::sort(ranked.begin(), ranked.end());
  const std::size_t n = ranked.size();
  long observed = 0;
  for (std::size_t r = 0; r < n; ++r) observed += ranked[r].second ? static_cast<long>(r + 1) : 0;
  long le = 0;
  long ge = 0;
  const long count = 1L << n;
  for (long mask = 0; mask < count; ++mask) {
    long w = 0;
    for (std::size_t r = 0; r < n; ++r) w += (mask >> r) & 1 ? static_cast<long>(r + 1) : 0;
    le += w <= observed;
    ge += w >= observed;
  }
  const double p_le = static_cast<double>(le) / static_cast<double>(count);
  const double p_ge = static_cast<double>(ge) / static_cast<double>(count);
  switch (alt) {
    case stats::Alternative::a_less: return p_le;
    case stats::Alternative::a_greater: return p_ge;
    case stats::Alternative::two_sided: return std::min(1.0, 2.0 * std::min(p_le, p_ge));
  }
  return 0.0;
}

// 7. Exact Wilcoxon p-values, including effective n below the sample length.
Outcome wilcoxon_exact() {
  std::mt19937_64 gen(707);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  int mismatches = 0;
  for (int length = 5; length <= 12; ++length) {
    for (int zeros = 0; zeros < length; ++zeros) {
      for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> a(static_cast<std::size_t>(length));
        std::vector<double> b(static_cast<std::size_t>(length));
        std::vector<double> d(static_cast<std::size_t>(length));
        const double shift = u(gen);
        for (int i = 0; i < length; ++i) {
          const auto k = static_cast<std::size_t>(i);
          a[k] = u(gen);
          b[k] = i < zeros ? a[k] : u(gen) + 0.5 * shift;
          d[k] = a[k] - b[k];
        }
        for (auto alt : {stats::Alternative::a_less, stats::Alternative::a_greater, stats::Alternative::two_sided}) {
          const auto r = stats::wilcoxon_signed_rank({"a", "b", a, b}, alt);
          ++checked;
          mismatches += !(r.exact && r.p_value == enumerated_p(d, alt));
        }
      }
    }
  }
  const auto six = stats::wilcoxon_signed_rank({"a", "b", {1, 2, 3, 4, 5, 6}, {2, 4, 6, 8, 10, 12}},
                                               stats::Alternative::a_less);
  const bool pass = mismatches == 0 && six.p_value == 0.015625;
  return {pass, std::to_string(checked) + " p-values, " + std::to_string(mismatches) +
                    " differ from enumeration; n=6 ordered case p = " + fmt(six.p_value, 8)};
}

int run_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = "env -u ENFUSE_SEED -u ENFUSE_OUT " + std::string(ENFUSE_BINARY) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// Every file under `a` has a byte-identical twin under `b` and vice versa.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::set<fs::path> names;
  for (const auto& root : {a, b}) {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root));
    }
  }
  if (names.empty()) {
    why = "no output files";
    return false;
  }
  for (const auto& name : names) {
    if (!fs::exists(a / name) || !fs::exists(b / name) || read_file(a / name) != read_file(b / name)) {
      why = name.string() + " differs";
      return false;
    }
  }
  return true;
}

// 8. Byte-identical outputs across repeated invocations of each subcommand.
Outcome determinism() {
  const auto root = scratch_dir("determinism");
  const std::string config = (fs::path(ENFUSE_CONFIG_DIR) / "planted.ini").string();
  const auto log = root / "log.txt";
  std::vector<std::string> failures;
  auto check = [&](const std::string& label, const std::function<std::string(const fs::path&)>& args_for) {
    const auto a = root / (label + "_a");
    const auto b = root / (label + "_b");
    fs::create_directories(a);
    fs::create_directories(b);
    if (run_binary(args_for(a), log) != 0 || run_binary(args_for(b), log) != 0) {
      failures.push_back(label + " exited non-zero: " + read_file(log));
      return;
    }
    std::string why;
    if (!same_tree(a, b, why)) failures.push_back(label + ": " + why);
  };

  check("synth", [](const fs::path& d) { return "synth --seed 11 --out " + d.string(); });
  check("run_t1", [&](const fs::path& d) { return "run --config " + config + " --seed 11 --threads 1 --out " + d.string(); });
  check("run_t4", [&](const fs::path& d) { return "run --config " + config + " --seed 11 --threads 4 --out " + d.string(); });
  check("benchmark_t1",
        [&](const fs::path& d) { return "benchmark --config " + config + " --seed 11 --threads 1 --out " + d.string(); });
  check("benchmark_t4",
        [&](const fs::path& d) { return "benchmark --config " + config + " --seed 11 --threads 4 --out " + d.string(); });

  std::string why;
  if (failures.empty() && !same_tree(root / "run_t1_a", root / "run_t4_a", why)) failures.push_back("run threads 1 vs 4: " + why);
  if (failures.empty() && !same_tree(root / "benchmark_t1_a", root / "benchmark_t4_a", why)) {
    failures.push_back("benchmark threads 1 vs 4: " + why);
  }
  if (failures.empty()) {
    const std::string reports =
        (root / "run_t4_a" / "fusion.json").string() + " " + (root / "benchmark_t4_a" / "benchmarks.json").string();
    check("compare", [&](const fs::path& d) {
      return "compare " + reports + " --metric fold_rmse --metric test_rmse --out " + d.string();
    });
  }
  if (!failures.empty()) return {false, failures.front()};
  return {true, "synth, run, benchmark and compare byte-identical on repeat; run and benchmark identical at 1 and 4 threads"};
}

// 9. GA-LR behaviour across 20 seeds on planted data.
Outcome ga_behaviour() {
  const auto base = shipped_config("planted.ini");
  int monotone_runs = 0;
  int larger = 0;
  std::ostringstream sizes;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    synth::SynthSpec spec;
    spec.seed = seed;
    const auto [train, test] = preprocess_split(synth::to_raw_table(synth::generate(spec)), base.train_fraction, seed);
    const auto folds = make_folds(train.n(), base.folds, seed);
    std::vector<std::size_t> selected;
    for (const auto& [scenario, w] : std::vector<std::pair<std::size_t, std::pair<double, double>>>{{3, {1.0, 0.0}}, {0, {0.3, 0.7}}}) {
      auto ga = base.ga;
      ga.w_r = w.first;
      ga.w_p = w.second;
      ga.seed = derive_seed(seed, "ga", scenario);
      const auto r = benchmarks::run_ga_lr(train, test, ga, folds, base.convention);
      bool monotone = true;
      for (std::size_t g = 1; g < r.fitness_history.size(); ++g) monotone = monotone && r.fitness_history[g] <= r.fitness_history[g - 1];
      monotone_runs += monotone;
      selected.push_back(r.selected.size());
    }
    larger += selected[0] >= selected[1];
    sizes << (seed > 1 ? " " : "") << selected[0] << "/" << selected[1];
  }
  const bool pass = monotone_runs == 40 && larger >= 18;
  return {pass, std::to_string(monotone_runs) + "/40 runs with non-increasing best fitness; (1,0) >= (0.3,0.7) in " +
                    std::to_string(larger) + "/20 seeds; sizes " + sizes.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    bool soft;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, false, en_solver},          {2, false, ess_nesting},      {3, false, crowding_dominance},
      {4, false, planted_recovery},   {5, false, en_grid_trend},    {6, true, residential_band},
      {7, false, wilcoxon_exact},     {8, false, determinism},      {9, false, ga_behaviour},
  };
  int hard_failures = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass && !c.soft) ++hard_failures;
    std::cout << "criterion " << c.number << ": " << (outcome.pass ? "PASS" : "FAIL") << (c.soft ? " (soft)" : "")
              << " " << outcome.detail << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / ("enfuse_acceptance_" + std::to_string(::getpid())));
  return hard_failures == 0 ? 0 : 1;
}
