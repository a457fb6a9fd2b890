#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "enfuse/cli.hpp"
#include "enfuse/error.hpp"
#include "enfuse/report.hpp"
#include "enfuse/rng.hpp"
#include "enfuse/schema_check.hpp"

namespace enfuse::cli {
namespace {

using nlohmann::json;

void write_validated(const std::filesystem::path& path, const json& doc, std::string_view schema_name, Written& written) {
  const auto problems = schema::validate(doc, schema::shipped(schema_name));
  if (!problems.empty()) {
    throw Error(ErrorKind::schema, path.filename().string() + " fails the " + std::string(schema_name) + " schema: " + problems.front());
  }
  report::write_text(path, doc.dump(2) + "\n");
  written.push_back(path);
}

void write_plain(const std::filesystem::path& path, const std::string& text, Written& written) {
  report::write_text(path, text);
  written.push_back(path);
}

struct Prepared {
  Dataset train;
  Dataset test;
  FoldPlan folds;
};

Prepared prepare(const PipelineConfig& config) {
  const auto raw = load_csv(config.csv, load_schema(config.schema));
  auto [train, test] = preprocess_split(raw, config.train_fraction, config.seed);
  auto folds = make_folds(train.n(), config.folds, config.seed);
  return {std::move(train), std::move(test), std::move(folds)};
}

}  // namespace

Written cmd_run(const PipelineConfig& config) {
  config.validate();
  const auto data = prepare(config);

  auto mopso_config = config.mopso;
  mopso_config.seed = derive_seed(config.seed, "mopso");
  mopso_config.threads = config.threads;
  mopso_config.en_options = config.en;
  const auto result = mopso::run(data.train, mopso_config, data.folds, config.alpha);

  fusion::FuseOptions options;
  options.policy = config.policy;
  options.alpha = config.alpha;
  options.lambda_eval = config.lambda_eval;
  options.convention = config.convention;
  options.en_options = config.en;
  options.threads = config.threads;
  const auto fused = fusion::fuse(result.archive, data.train, data.test, data.folds, options);

  const report::RunInfo info{config.label, config.seed};
  std::filesystem::create_directories(config.output);
  Written written;
  write_validated(config.output / "pareto.json", report::pareto_json(result.archive, data.train, info), "pareto", written);
  write_validated(config.output / "fusion.json", report::fusion_json(fused, data.train, info), "fusion", written);
  write_plain(config.output / "pareto_front.csv", report::pareto_front_csv(result.archive), written);
  return written;
}

Written cmd_benchmark(const PipelineConfig& config, bool include_timings) {
  config.validate();
  const auto data = prepare(config);

  std::vector<benchmarks::BenchmarkResult> rows;
  for (std::size_t i = 0; i < config.scenarios.size(); ++i) {
    auto ga = config.ga;
    ga.w_r = config.scenarios[i].w_r;
    ga.w_p = config.scenarios[i].w_p;
    ga.seed = derive_seed(config.seed, "ga", i);
    ga.threads = config.threads;
    rows.push_back(benchmarks::run_ga_lr(data.train, data.test, ga, data.folds, config.convention));
  }
  auto grid = benchmarks::run_en_grid(data.train, data.test, config.en_lambdas, config.alpha, data.folds, config.en,
                                      config.convention);
  rows.insert(rows.end(), grid.begin(), grid.end());

  const report::RunInfo info{config.label, config.seed};
  std::filesystem::create_directories(config.output);
  Written written;
  write_validated(config.output / "benchmarks.json", report::benchmarks_json(rows, data.train, info, include_timings),
                  "benchmarks", written);
  return written;
}

Written cmd_compare(const std::vector<std::filesystem::path>& reports, const std::vector<std::string>& metrics,
                    const std::string& alternative, const std::filesystem::path& out_dir) {
  if (reports.empty()) throw Error(ErrorKind::config, "no reports given");
  std::vector<json> docs;
  for (const auto& path : reports) docs.push_back(report::read_json(path));
  const auto rows = report::compare_reports(docs, metrics, alternative);

  std::filesystem::create_directories(out_dir);
  Written written;
  write_plain(out_dir / "wilcoxon.csv", report::comparison_csv(rows), written);
  write_validated(out_dir / "wilcoxon.json", report::comparison_json(rows), "wilcoxon", written);
  return written;
}

Written cmd_synth(const synth::SynthSpec& spec, const std::filesystem::path& out_dir) {
  const auto data = synth::generate(spec);
  std::filesystem::create_directories(out_dir);
  Written written;
  write_plain(out_dir / "data.csv", synth::to_csv(data), written);
  write_plain(out_dir / "schema.txt", synth::to_schema(data), written);
  write_validated(out_dir / "truth.json", report::truth_json(spec, data), "truth", written);
  return written;
}

int main(int argc, char** argv) {
  CLI::App app{"Elastic Net MOPSO feature selection with Pareto fusion"};
  app.require_subcommand(1);

  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> threads;
  bool timings = false;

  auto add_pipeline_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "INI configuration file")->required();
    cmd->add_option("--seed", seed, "master seed (overrides the file and ENFUSE_SEED)");
    cmd->add_option("--out", out, "output directory (overrides the file and ENFUSE_OUT)");
    cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "MOPSO-EN search and fusion; writes pareto.json, fusion.json, pareto_front.csv");
  add_pipeline_flags(run);
  auto* bench = app.add_subcommand("benchmark", "GA-LR scenarios and the Elastic Net lambda grid; writes benchmarks.json");
  add_pipeline_flags(bench);
  bench->add_flag("--timings", timings, "record wall-clock times (makes output non-reproducible)");

  std::vector<std::filesystem::path> report_paths;
  std::vector<std::string> metrics;
  std::string alternative = "proposed-better";
  std::filesystem::path compare_out = ".";
  auto* compare = app.add_subcommand("compare", "Wilcoxon signed-rank tests between methods; writes wilcoxon.csv/json");
  compare->add_option("reports", report_paths, "fusion.json and benchmarks.json files")->required()->check(CLI::ExistingFile);
  compare->add_option("--metric", metrics, "metric name, repeatable (default fold_rmse)");
  compare->add_option("--alternative", alternative, "proposed-better, two-sided, a-less or a-greater");
  compare->add_option("--out", compare_out, "output directory");

  synth::SynthSpec spec;
  std::filesystem::path synth_out = "synth";
  auto* synth_cmd = app.add_subcommand("synth", "planted linear dataset; writes data.csv, schema.txt, truth.json");
  synth_cmd->add_option("--n", spec.n, "rows");
  synth_cmd->add_option("--informative", spec.informative, "informative columns");
  synth_cmd->add_option("--noise", spec.noise, "noise columns");
  synth_cmd->add_option("--noise-sigma", spec.noise_sigma, "response noise standard deviation");
  synth_cmd->add_option("--coef-min", spec.coef_min, "smallest coefficient magnitude");
  synth_cmd->add_option("--coef-max", spec.coef_max, "largest coefficient magnitude");
  synth_cmd->add_option("--intercept", spec.intercept, "intercept");
  synth_cmd->add_option("--factors", spec.factors, "shared latent factors");
  synth_cmd->add_option("--factor-weight", spec.factor_weight, "latent share of each column, in [0,1)");
  synth_cmd->add_option("--seed", spec.seed, "seed");
  synth_cmd->add_option("--out", synth_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  }

  try {
    Written written;
    if (run->parsed() || bench->parsed()) {
      auto config = load_config(config_path);
      apply_overrides(config, {seed, out, threads});
      config.validate();
      written = run->parsed() ? cmd_run(config) : cmd_benchmark(config, timings);
    } else if (compare->parsed()) {
      if (metrics.empty()) metrics.push_back("fold_rmse");
      written = cmd_compare(report_paths, metrics, alternative, compare_out);
    } else {
      written = cmd_synth(spec, synth_out);
    }
    for (const auto& path : written) std::cout << path.string() << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: schema: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace enfuse::cli
