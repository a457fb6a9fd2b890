#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "enfuse/benchmarks.hpp"
#include "enfuse/fusion.hpp"
#include "enfuse/mopso.hpp"
#include "enfuse/stats.hpp"
#include "enfuse/synth.hpp"

namespace enfuse::report {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kProposedMethod = "mopso-en-fusion";

/// Identifies the run a report came from; used to pair reports in `compare`.
struct RunInfo {
  std::string dataset;
  std::uint64_t seed = 0;
};

json pareto_json(const mopso::ParetoArchive& archive, const Dataset& train, const RunInfo& info);
json fusion_json(const fusion::FusionReport& report, const Dataset& train, const RunInfo& info);
json benchmarks_json(const std::vector<benchmarks::BenchmarkResult>& rows, const Dataset& train,
                     const RunInfo& info, bool include_timings = false);
json truth_json(const synth::SynthSpec& spec, const synth::SynthData& data);

/// Two columns, rmse_cv and n_features, one row per archive member sorted by
/// n_features.
std::string pareto_front_csv(const mopso::ParetoArchive& archive);

/// One comparison between the proposed method and a competitor.
struct ComparisonRow {
  std::string dataset;
  std::string metric;
  std::string method_a;
  std::string method_b;
  std::string alternative;
  int n = 0;
  bool defined = false;
  double statistic = 0.0;
  double p_value = 0.0;
  std::string note;
};

/// Pairs the proposed method's rows with every other method found in the
/// reports, per dataset and metric. Metrics prefixed with "fold_" pair
/// cross-validation folds (concatenated over seeds); other metrics pair seeds.
std::vector<ComparisonRow> compare_reports(const std::vector<json>& reports, const std::vector<std::string>& metrics,
                                           const std::string& alternative);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
json comparison_json(const std::vector<ComparisonRow>& rows);

/// Shortest round-trip decimal form, as used in every CSV the tool writes.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
json read_json(const std::filesystem::path& path);

}  // namespace enfuse::report
