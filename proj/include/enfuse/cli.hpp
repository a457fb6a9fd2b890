#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "enfuse/benchmarks.hpp"
#include "enfuse/fusion.hpp"
#include "enfuse/mopso.hpp"
#include "enfuse/regression.hpp"
#include "enfuse/synth.hpp"

namespace enfuse::cli {

struct Scenario {
  double w_r = 0.0;
  double w_p = 0.0;
};

/// Everything a run or benchmark needs, read from an INI file.
///
/// Module seeds are derived from the master seed:
///   split  derive_seed(seed, "split")      folds  derive_seed(seed, "folds")
///   mopso  derive_seed(seed, "mopso")      ga     derive_seed(seed, "ga", scenario index)
/// The split and folds derivations happen inside the data module.
struct PipelineConfig {
  std::filesystem::path csv;
  std::filesystem::path schema;
  std::string label;  // dataset name written into reports; defaults to the csv stem
  double train_fraction = 0.7;

  std::uint64_t seed = 0;
  int folds = 10;
  double alpha = 0.5;
  AdjustedR2Convention convention = AdjustedR2Convention::n_minus_p;
  std::filesystem::path output = "out";
  std::size_t threads = 1;

  mopso::MopsoConfig mopso{};
  fusion::SelectionPolicy policy{};
  std::optional<double> lambda_eval;

  benchmarks::GaConfig ga{};
  std::vector<Scenario> scenarios{{0.3, 0.7}, {0.5, 0.5}, {0.7, 0.3}, {1.0, 0.0}};
  std::vector<double> en_lambdas{0.0, 0.25, 0.5, 1.0};

  EnOptions en{};

  /// Throws Error(config) when any nested setting is invalid.
  void validate() const;
};

/// Parses INI text. Relative data paths resolve against `base_dir`.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Reads the file, applies ENFUSE_SEED / ENFUSE_OUT overrides and validates.
PipelineConfig load_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
  std::optional<std::size_t> threads;
};

/// Command-line flags win over environment variables, which win over the file.
void apply_overrides(PipelineConfig& config, const Overrides& overrides);

/// Paths written by a subcommand, in write order.
using Written = std::vector<std::filesystem::path>;

Written cmd_run(const PipelineConfig& config);
Written cmd_benchmark(const PipelineConfig& config, bool include_timings = false);
Written cmd_compare(const std::vector<std::filesystem::path>& reports, const std::vector<std::string>& metrics,
                    const std::string& alternative, const std::filesystem::path& out_dir);
Written cmd_synth(const synth::SynthSpec& spec, const std::filesystem::path& out_dir);

/// Parses argv, dispatches, prints `error: <kind>: <message>` on failure.
int main(int argc, char** argv);

}  // namespace enfuse::cli
