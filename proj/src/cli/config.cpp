#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "enfuse/cli.hpp"
#include "enfuse/error.hpp"

namespace enfuse::cli {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const auto s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::config, key + ": expected a number, got '" + raw + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& raw) {
  const auto s = trim(raw);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::config, key + ": expected an integer, got '" + raw + "'");
  }
  return v;
}

std::uint64_t to_seed(const std::string& key, const std::string& raw) {
  const auto s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::config, key + ": expected an unsigned 64-bit seed, got '" + raw + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const auto s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorKind::config, key + ": expected true or false");
}

/// Reads keys of one section and rejects unknown ones.
class Section {
 public:
  Section(const pt::ptree& root, std::string name, std::set<std::string> known) : name_(std::move(name)) {
    if (const auto child = root.get_child_optional(name_)) {
      tree_ = *child;
      for (const auto& [key, value] : tree_) {
        if (!known.count(key)) throw Error(ErrorKind::config, "unknown key [" + name_ + "] " + key);
      }
    }
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '\0'))) return trim(*v);
    return std::nullopt;
  }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  void read(const std::string& key, double& out) const {
    if (auto v = raw(key)) out = to_double(where(key), *v);
  }
  void read(const std::string& key, int& out) const {
    if (auto v = raw(key)) out = static_cast<int>(to_integer(where(key), *v));
  }
  void read(const std::string& key, std::size_t& out) const {
    if (auto v = raw(key)) {
      const auto n = to_integer(where(key), *v);
      if (n < 0) throw Error(ErrorKind::config, where(key) + " must be non-negative");
      out = static_cast<std::size_t>(n);
    }
  }
  void read(const std::string& key, std::string& out) const {
    if (auto v = raw(key)) out = *v;
  }

 private:
  std::string name_;
  pt::ptree tree_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& raw) {
  std::filesystem::path p(raw);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

void PipelineConfig::validate() const {
  if (csv.empty()) throw Error(ErrorKind::config, "[data] csv is required");
  if (schema.empty()) throw Error(ErrorKind::config, "[data] schema is required");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error(ErrorKind::config, "train_fraction must lie in (0,1)");
  if (folds < 2) throw Error(ErrorKind::config, "folds must be at least 2");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::config, "alpha must lie in [0,1]");
  if (threads < 1) throw Error(ErrorKind::config, "threads must be at least 1");
  if (!(en.tol > 0.0) || en.max_iter < 1) throw Error(ErrorKind::config, "[en] tol must be positive and max_iter at least 1");
  if (lambda_eval && !(*lambda_eval >= 0.0)) throw Error(ErrorKind::config, "lambda_eval must be non-negative");
  mopso.validate();
  if (scenarios.empty()) throw Error(ErrorKind::config, "[ga] scenarios is empty");
  for (const auto& s : scenarios) {
    auto ga_copy = ga;
    ga_copy.w_r = s.w_r;
    ga_copy.w_p = s.w_p;
    ga_copy.validate();
  }
  if (en_lambdas.empty()) throw Error(ErrorKind::config, "[en_grid] lambdas is empty");
  for (double l : en_lambdas) {
    if (!(l >= 0.0)) throw Error(ErrorKind::config, "[en_grid] lambdas must be non-negative");
  }
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, section] : root) {
    static const std::set<std::string> sections{"data", "pipeline", "mopso", "fusion", "ga", "en_grid", "en"};
    if (!sections.count(name)) throw Error(ErrorKind::config, "unknown section [" + name + "]");
    if (section.empty() && !section.data().empty()) throw Error(ErrorKind::config, "key outside a section: " + name);
  }

  PipelineConfig c;

  const Section data(root, "data", {"csv", "schema", "train_fraction", "label"});
  if (auto v = data.raw("csv")) c.csv = resolve(base_dir, *v);
  if (auto v = data.raw("schema")) c.schema = resolve(base_dir, *v);
  data.read("train_fraction", c.train_fraction);
  data.read("label", c.label);
  if (c.label.empty()) c.label = c.csv.stem().string();

  const Section pipeline(root, "pipeline", {"seed", "folds", "alpha", "adjusted_r2", "output", "threads"});
  if (auto v = pipeline.raw("seed")) c.seed = to_seed(pipeline.where("seed"), *v);
  pipeline.read("folds", c.folds);
  pipeline.read("alpha", c.alpha);
  if (auto v = pipeline.raw("adjusted_r2")) {
    if (*v == "n-minus-p") {
      c.convention = AdjustedR2Convention::n_minus_p;
    } else if (*v == "classical") {
      c.convention = AdjustedR2Convention::classical;
    } else {
      throw Error(ErrorKind::config, "[pipeline] adjusted_r2 must be n-minus-p or classical");
    }
  }
  if (auto v = pipeline.raw("output")) c.output = resolve(base_dir, *v);
  else c.output = resolve(base_dir, "out");
  pipeline.read("threads", c.threads);

  const Section mopso(root, "mopso", {"swarm_size", "archive_size", "max_iter", "inertia", "c1_initial", "c2_initial",
                                      "mutation_rate", "lambda_min", "lambda_max", "v_max"});
  mopso.read("swarm_size", c.mopso.swarm_size);
  mopso.read("archive_size", c.mopso.archive_size);
  mopso.read("max_iter", c.mopso.max_iter);
  mopso.read("inertia", c.mopso.inertia);
  mopso.read("c1_initial", c.mopso.c1_initial);
  mopso.read("c2_initial", c.mopso.c2_initial);
  mopso.read("mutation_rate", c.mopso.mutation_rate);
  mopso.read("lambda_min", c.mopso.lambda_min);
  mopso.read("lambda_max", c.mopso.lambda_max);
  mopso.read("v_max", c.mopso.v_max);

  const Section fusion(root, "fusion", {"policy", "lambda_eval"});
  if (auto v = fusion.raw("policy")) {
    try {
      c.policy = fusion::SelectionPolicy::parse(*v);
    } catch (const Error& e) {
      throw Error(ErrorKind::config, std::string("[fusion] policy: ") + e.what());
    }
  }
  if (auto v = fusion.raw("lambda_eval")) c.lambda_eval = to_double(fusion.where("lambda_eval"), *v);

  const Section ga(root, "ga", {"population_size", "generations", "crossover_rate", "mutation_rate", "elite_fraction",
                                "immigrant_fraction", "parent_fraction", "scenarios"});
  ga.read("population_size", c.ga.population_size);
  ga.read("generations", c.ga.generations);
  ga.read("crossover_rate", c.ga.crossover_rate);
  ga.read("mutation_rate", c.ga.mutation_rate);
  ga.read("elite_fraction", c.ga.elite_fraction);
  ga.read("immigrant_fraction", c.ga.immigrant_fraction);
  ga.read("parent_fraction", c.ga.parent_fraction);
  if (auto v = ga.raw("scenarios")) {
    c.scenarios.clear();
    for (const auto& item : split_list(*v)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw Error(ErrorKind::config, "[ga] scenarios: expected w_r:w_p, got '" + item + "'");
      c.scenarios.push_back({to_double(ga.where("scenarios"), item.substr(0, colon)),
                             to_double(ga.where("scenarios"), item.substr(colon + 1))});
    }
  }

  const Section grid(root, "en_grid", {"lambdas"});
  if (auto v = grid.raw("lambdas")) {
    c.en_lambdas.clear();
    for (const auto& item : split_list(*v)) c.en_lambdas.push_back(to_double(grid.where("lambdas"), item));
  }

  const Section en(root, "en", {"tol", "max_iter", "record_history"});
  en.read("tol", c.en.tol);
  en.read("max_iter", c.en.max_iter);
  if (auto v = en.raw("record_history")) c.en.record_history = to_bool(en.where("record_history"), *v);

  c.mopso.en_options = c.en;
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "missing file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto config = parse_config(buf.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());

  Overrides env;
  if (const char* s = std::getenv("ENFUSE_SEED"); s && *s) env.seed = to_seed("ENFUSE_SEED", s);
  if (const char* s = std::getenv("ENFUSE_OUT"); s && *s) env.output = s;
  apply_overrides(config, env);
  config.validate();
  return config;
}

void apply_overrides(PipelineConfig& config, const Overrides& overrides) {
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.output) config.output = *overrides.output;
  if (overrides.threads) config.threads = *overrides.threads;
}

}  // namespace enfuse::cli
