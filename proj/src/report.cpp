#include "enfuse/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "enfuse/error.hpp"

namespace enfuse::report {
namespace {

json header(const char* schema, const RunInfo& info) {
  return json{{"schema", schema}, {"schema_version", kSchemaVersion}, {"dataset", info.dataset}, {"seed", info.seed}};
}

json names_of(const Dataset& ds, const std::vector<Index>& features) {
  json out = json::array();
  for (Index j : features) out.push_back(ds.feature_names()[static_cast<std::size_t>(j)]);
  return out;
}

json metrics_json(const RegressionMetrics& m) {
  return json{{"sse", m.sse}, {"rmse", m.rmse}, {"r2", m.r2}, {"r2_adj", m.r2_adj}, {"n", m.n}, {"p", m.p}};
}

json train_json(const RegressionMetrics& m, const CvResult& cv) {
  json j = metrics_json(m);
  j["rmse_cv"] = cv.rmse;
  j["fold_rmse"] = cv.fold_rmse;
  j["fold_r2"] = cv.fold_r2;
  return j;
}

json crowding_json(double c) { return std::isinf(c) ? json("inf") : json(c); }

json method_row(const std::string& method, const std::string& scenario, const RegressionMetrics& train,
                const CvResult& cv, const RegressionMetrics& test) {
  return json{{"method", method},
              {"scenario", scenario},
              {"metrics",
               {{"train_rmse_cv", cv.rmse},
                {"train_r2_adj", train.r2_adj},
                {"test_rmse", test.rmse},
                {"test_r2_adj", test.r2_adj},
                {"fold_rmse", cv.fold_rmse},
                {"fold_r2", cv.fold_r2}}}};
}

json model_json(const fusion::ModelEvaluation& m) {
  return json{{"model", m.model}, {"lambda", m.lambda}, {"train", train_json(m.train, m.train_cv)}, {"test", metrics_json(m.test)}};
}

bool lower_is_better(const std::string& metric) { return metric.find("rmse") != std::string::npos; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(ErrorKind::numeric, "cannot format number");
  return std::string(buf, end);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    throw Error(ErrorKind::schema, "malformed json in " + path.string());
  }
}

json pareto_json(const mopso::ParetoArchive& archive, const Dataset& train, const RunInfo& info) {
  json j = header("enfuse.pareto", info);
  j["n_features"] = train.p();
  j["feature_names"] = train.feature_names();
  j["archive_capacity"] = archive.capacity();
  json members = json::array();
  for (const auto& m : archive.members()) {
    const auto features = m.features();
    members.push_back({{"features", features},
                       {"feature_names", names_of(train, features)},
                       {"lambda", m.lambda},
                       {"rmse_cv", m.objectives.rmse_cv},
                       {"n_features", m.cardinality()},
                       {"crowding", crowding_json(m.crowding)},
                       {"position", std::vector<double>(m.position.data(), m.position.data() + m.position.size())}});
  }
  j["members"] = std::move(members);
  return j;
}

json fusion_json(const fusion::FusionReport& report, const Dataset& train, const RunInfo& info) {
  json j = header("enfuse.fusion", info);
  j["policy"] = report.policy.name();
  j["threshold"] = report.threshold_used;
  j["fallback"] = report.fallback;

  json members = json::array();
  for (std::size_t i = 0; i < report.member_scores.size(); ++i) {
    const auto& s = report.member_scores[i];
    const auto& m = report.members[static_cast<std::size_t>(s.member_index)];
    members.push_back({{"member", s.member_index},
                       {"features", m.features()},
                       {"lambda", m.lambda},
                       {"rmse_cv", m.objectives.rmse_cv},
                       {"n_features", m.cardinality()},
                       {"r2_adj", s.r2_adj},
                       {"weight", s.weight},
                       {"mse", s.mse}});
  }
  j["member_scores"] = std::move(members);

  json triplets = json::array();
  for (Index r = 0; r < report.ess.ess.rows(); ++r) {
    for (Index c = 0; c < report.ess.ess.cols(); ++c) {
      const double v = report.ess.ess(r, c);
      if (v != 0.0) triplets.push_back({{"feature", report.ess.features[static_cast<std::size_t>(r)]}, {"member", c}, {"ess", v}});
    }
  }
  j["ess_matrix"] = {{"features", report.ess.features}, {"n_members", report.ess.ess.cols()}, {"triplets", std::move(triplets)}};

  json scores = json::array();
  for (std::size_t r = 0; r < report.ess.features.size(); ++r) {
    const Index f = report.ess.features[r];
    scores.push_back({{"feature", f}, {"name", train.feature_names()[static_cast<std::size_t>(f)]}, {"score", report.scores(static_cast<Index>(r))}});
  }
  j["scores"] = std::move(scores);
  j["selected"] = report.selected;
  j["selected_names"] = names_of(train, report.selected);
  j["metrics"] = {{"ols", model_json(report.ols)}, {"elastic_net", model_json(report.elastic_net)}};
  j["method_rows"] = json::array({
      method_row(kProposedMethod, "ols", report.ols.train, report.ols.train_cv, report.ols.test),
      method_row(kProposedMethod, "elastic-net", report.elastic_net.train, report.elastic_net.train_cv, report.elastic_net.test),
  });
  return j;
}

json benchmarks_json(const std::vector<benchmarks::BenchmarkResult>& rows, const Dataset& train, const RunInfo& info,
                     bool include_timings) {
  json j = header("enfuse.benchmarks", info);
  json out_rows = json::array();
  json method_rows = json::array();
  for (const auto& r : rows) {
    json row;
    row["method"] = r.method;
    std::string scenario;
    if (r.method == "ga-lr") {
      row["scenario"] = {{"w_r", r.w_r}, {"w_p", r.w_p}};
      scenario = "w_r=" + format_double(r.w_r) + ",w_p=" + format_double(r.w_p);
      row["best_fitness"] = r.best_fitness;
      row["fitness_history"] = r.fitness_history;
    } else {
      row["scenario"] = {{"lambda", r.lambda}, {"alpha", r.alpha}};
      scenario = "lambda=" + format_double(r.lambda);
    }
    row["selected"] = r.selected;
    row["selected_names"] = names_of(train, r.selected);
    row["n_selected"] = r.selected.size();
    row["degenerate"] = r.degenerate;
    row["train"] = train_json(r.train, r.train_cv);
    row["test"] = metrics_json(r.test);
    if (include_timings) row["wall_time_ms"] = r.wall_time_ms;
    out_rows.push_back(std::move(row));
    if (!r.degenerate) method_rows.push_back(method_row(r.method, scenario, r.train, r.train_cv, r.test));
  }
  j["rows"] = std::move(out_rows);
  j["method_rows"] = std::move(method_rows);
  return j;
}

json truth_json(const synth::SynthSpec& spec, const synth::SynthData& data) {
  json coefficients = json::object();
  json informative_names = json::array();
  for (Index j : data.informative) {
    const auto& name = data.names[static_cast<std::size_t>(j)];
    informative_names.push_back(name);
    coefficients[name] = data.coefficients[static_cast<std::size_t>(j)];
  }
  return json{{"schema", "enfuse.truth"},
              {"schema_version", kSchemaVersion},
              {"seed", spec.seed},
              {"n", spec.n},
              {"response", data.response},
              {"feature_names", data.names},
              {"informative", informative_names},
              {"informative_indices", data.informative},
              {"coefficients", coefficients},
              {"intercept", spec.intercept},
              {"noise_sigma", spec.noise_sigma},
              {"factors", spec.factors},
              {"factor_weight", spec.factor_weight}};
}

std::string pareto_front_csv(const mopso::ParetoArchive& archive) {
  std::vector<const mopso::EvaluatedSolution*> members;
  for (const auto& m : archive.members()) members.push_back(&m);
  std::stable_sort(members.begin(), members.end(), [](const auto* a, const auto* b) {
    if (a->objectives.cardinality != b->objectives.cardinality) return a->objectives.cardinality < b->objectives.cardinality;
    return a->objectives.rmse_cv < b->objectives.rmse_cv;
  });
  std::string s = "rmse_cv,n_features\n";
  for (const auto* m : members) s += format_double(m->objectives.rmse_cv) + "," + std::to_string(m->cardinality()) + "\n";
  return s;
}

std::vector<ComparisonRow> compare_reports(const std::vector<json>& reports, const std::vector<std::string>& metrics,
                                           const std::string& alternative) {
  if (metrics.empty()) throw Error(ErrorKind::config, "no metric requested");
  // dataset -> method -> seed -> representative row metrics
  std::map<std::string, std::map<std::string, std::map<std::uint64_t, json>>> table;
  for (const auto& r : reports) {
    if (!r.contains("method_rows") || !r.contains("dataset") || !r.contains("seed")) {
      throw Error(ErrorKind::schema, "report lacks method_rows, dataset or seed");
    }
    const auto dataset = r.at("dataset").get<std::string>();
    const auto seed = r.at("seed").get<std::uint64_t>();
    for (const auto& row : r.at("method_rows")) {
      const auto method = row.at("method").get<std::string>();
      auto& slot = table[dataset][method][seed];
      // Representative row per (method, seed): lowest cross-validated rmse.
      if (slot.is_null() ||
          row.at("metrics").at("train_rmse_cv").get<double>() < slot.at("train_rmse_cv").get<double>()) {
        slot = row.at("metrics");
      }
    }
  }

  std::vector<ComparisonRow> out;
  for (const auto& [dataset, methods] : table) {
    const auto proposed = methods.find(kProposedMethod);
    if (proposed == methods.end()) throw Error(ErrorKind::schema, "no " + std::string(kProposedMethod) + " rows for dataset " + dataset);
    for (const auto& metric : metrics) {
      for (const auto& [method, seeds] : methods) {
        if (method == kProposedMethod) continue;
        ComparisonRow row;
        row.dataset = dataset;
        row.metric = metric;
        row.method_a = kProposedMethod;
        row.method_b = method;
        stats::Alternative alt;
        if (alternative == "proposed-better") {
          alt = lower_is_better(metric) ? stats::Alternative::a_less : stats::Alternative::a_greater;
        } else {
          alt = stats::parse_alternative(alternative);
        }
        row.alternative = stats::to_string(alt);

        stats::PairedSample sample{kProposedMethod, method, {}, {}};
        const bool per_fold = metric.rfind("fold_", 0) == 0;
        for (const auto& [seed, a_metrics] : proposed->second) {
          const auto b_it = seeds.find(seed);
          if (b_it == seeds.end()) continue;
          const auto& b_metrics = b_it->second;
          if (!a_metrics.contains(metric) || !b_metrics.contains(metric)) {
            throw Error(ErrorKind::schema, "metric " + metric + " missing from reports");
          }
          if (per_fold) {
            const auto a = a_metrics.at(metric).get<std::vector<double>>();
            const auto b = b_metrics.at(metric).get<std::vector<double>>();
            if (a.size() != b.size()) throw Error(ErrorKind::schema, "unpaired fold counts for " + metric);
            sample.values_a.insert(sample.values_a.end(), a.begin(), a.end());
            sample.values_b.insert(sample.values_b.end(), b.begin(), b.end());
          } else {
            sample.values_a.push_back(a_metrics.at(metric).get<double>());
            sample.values_b.push_back(b_metrics.at(metric).get<double>());
          }
        }
        row.n = static_cast<int>(sample.values_a.size());
        try {
          const auto result = stats::wilcoxon_signed_rank(sample, alt);
          row.defined = true;
          row.statistic = result.statistic;
          row.p_value = result.p_value;
        } catch (const Error& e) {
          row.note = e.what();
        }
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string s = "dataset,metric,method_a,method_b,alternative,n,statistic,p_value,decision,note\n";
  for (const auto& r : rows) {
    s += r.dataset + "," + r.metric + "," + r.method_a + "," + r.method_b + "," + r.alternative + "," + std::to_string(r.n) + ",";
    if (r.defined) {
      s += format_double(r.statistic) + "," + format_double(r.p_value) + "," + (stats::reject(r.p_value) ? "reject" : "accept");
    } else {
      s += ",,undefined";
    }
    s += "," + r.note + "\n";
  }
  return s;
}

json comparison_json(const std::vector<ComparisonRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json row{{"dataset", r.dataset}, {"metric", r.metric}, {"method_a", r.method_a}, {"method_b", r.method_b},
             {"alternative", r.alternative}, {"n", r.n}, {"confidence", stats::kConfidence}};
    if (r.defined) {
      row["statistic"] = r.statistic;
      row["p_value"] = r.p_value;
      row["decision"] = stats::reject(r.p_value) ? "reject" : "accept";
    } else {
      row["statistic"] = nullptr;
      row["p_value"] = nullptr;
      row["decision"] = "undefined";
      row["note"] = r.note;
    }
    out.push_back(std::move(row));
  }
  return json{{"schema", "enfuse.wilcoxon"}, {"schema_version", kSchemaVersion}, {"comparisons", std::move(out)}};
}

}  // namespace enfuse::report
