#include "enfuse/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "enfuse/error.hpp"
#include "enfuse/rng.hpp"

namespace enfuse {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// RFC 4180 style: quoted fields may contain commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        field.clear();
        record.clear();
        any = false;
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw Error(ErrorKind::schema, "unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::optional<double> parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct ExpandedTable {
  Eigen::MatrixXd x;  // unscaled
  Eigen::VectorXd y;
  std::vector<std::string> names;
};

ExpandedTable clean_and_expand(const RawTable& raw) {
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& row = raw.rows[r];
    const bool complete = std::none_of(row.begin(), row.end(), [](const RawValue& v) {
      return std::holds_alternative<std::monostate>(v);
    });
    if (complete) kept.push_back(r);
  }
  if (kept.empty()) throw Error(ErrorKind::data, "zero rows remain after dropping missing values");

  const std::size_t response_col = raw.column_index(raw.response);

  struct Source {
    std::size_t column;
    std::optional<std::string> level;  // set for one-hot indicators
  };
  std::vector<Source> sources;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    if (c == response_col) continue;
    const auto& col = raw.columns[c];
    if (col.kind == ColumnKind::numeric) {
      sources.push_back({c, std::nullopt});
      names.push_back(col.name);
      continue;
    }
    std::set<std::string> levels;
    for (auto r : kept) levels.insert(std::get<std::string>(raw.rows[r][c]));
    for (const auto& level : levels) {
      sources.push_back({c, level});
      names.push_back(col.name + "=" + level);
    }
  }
  if (sources.empty()) throw Error(ErrorKind::data, "zero feature columns");

  ExpandedTable out;
  const auto n = static_cast<Index>(kept.size());
  out.x.resize(n, static_cast<Index>(sources.size()));
  out.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = raw.rows[kept[static_cast<std::size_t>(i)]];
    out.y(i) = std::get<double>(row[response_col]);
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const auto& src = sources[j];
      const auto& cell = row[src.column];
      out.x(i, static_cast<Index>(j)) =
          src.level ? (std::get<std::string>(cell) == *src.level ? 1.0 : 0.0) : std::get<double>(cell);
    }
  }
  out.names = std::move(names);
  return out;
}

std::vector<ColumnScaling> fit_scaling(const Eigen::MatrixXd& x) {
  std::vector<ColumnScaling> s(static_cast<std::size_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) s[static_cast<std::size_t>(j)] = {x.col(j).minCoeff(), x.col(j).maxCoeff()};
  return s;
}

Eigen::MatrixXd apply_scaling(const Eigen::MatrixXd& x, const std::vector<ColumnScaling>& s) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const auto& cs = s[static_cast<std::size_t>(j)];
    for (Index i = 0; i < x.rows(); ++i) out(i, j) = cs.scale(x(i, j));
  }
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, std::span<const Index> rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, std::span<const Index> rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

}  // namespace

Schema parse_schema(const std::string& text) {
  Schema schema;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::schema, "schema line " + std::to_string(lineno) + " lacks '='");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "response") {
      schema.response = value;
    } else if (value == "numeric") {
      schema.kinds[key] = ColumnKind::numeric;
    } else if (value == "categorical") {
      schema.kinds[key] = ColumnKind::categorical;
    } else {
      throw Error(ErrorKind::schema, "unknown column kind '" + value + "' for " + key);
    }
  }
  if (schema.response.empty()) throw Error(ErrorKind::schema, "schema declares no response column");
  return schema;
}

Schema load_schema(const std::filesystem::path& path) { return parse_schema(read_file(path)); }

std::size_t RawTable::missing_count() const {
  std::size_t count = 0;
  for (const auto& row : rows) {
    count += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](const RawValue& v) {
      return std::holds_alternative<std::monostate>(v);
    }));
  }
  return count;
}

std::size_t RawTable::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].name == name) return c;
  }
  throw Error(ErrorKind::schema, "column absent: " + name);
}

RawTable parse_csv(const std::string& text, const std::map<std::string, ColumnKind>& schema,
                   const std::string& response) {
  auto records = split_csv(text);
  if (records.empty()) throw Error(ErrorKind::schema, "missing header row");

  RawTable table;
  table.response = response;
  for (const auto& raw_name : records.front()) {
    const std::string name = trim(raw_name);
    const auto it = schema.find(name);
    if (it == schema.end()) throw Error(ErrorKind::schema, "header/schema mismatch: column " + name + " not in schema");
    table.columns.push_back({name, it->second});
  }
  if (table.columns.size() != schema.size()) {
    throw Error(ErrorKind::schema, "header/schema mismatch: schema lists columns absent from header");
  }
  const auto response_it =
      std::find_if(table.columns.begin(), table.columns.end(), [&](const Column& c) { return c.name == response; });
  if (response_it == table.columns.end()) throw Error(ErrorKind::schema, "response column absent");
  if (response_it->kind != ColumnKind::numeric) throw Error(ErrorKind::schema, "response column is categorical");

  const std::size_t width = table.columns.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.size() != width) {
      throw Error(ErrorKind::schema, "row " + std::to_string(r + 1) + " has " + std::to_string(rec.size()) +
                                         " cells, expected " + std::to_string(width));
    }
    std::vector<RawValue> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (table.columns[c].kind == ColumnKind::numeric) {
        if (auto v = parse_double(rec[c])) row[c] = *v;
      } else {
        std::string level = trim(rec[c]);
        if (!level.empty()) row[c] = std::move(level);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const std::map<std::string, ColumnKind>& schema,
                  const std::string& response) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "missing file " + path.string());
  return parse_csv(read_file(path), schema, response);
}

RawTable load_csv(const std::filesystem::path& path, const Schema& schema) {
  return load_csv(path, schema.kinds, schema.response);
}

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<std::string> feature_names,
                 std::vector<ColumnScaling> scaling, std::string response_name, bool unit_range)
    : x_(std::move(x)),
      y_(std::move(y)),
      names_(std::move(feature_names)),
      scaling_(std::move(scaling)),
      response_(std::move(response_name)) {
  if (x_.rows() < 2) throw Error(ErrorKind::data, "dataset needs at least 2 rows");
  if (x_.cols() < 1) throw Error(ErrorKind::data, "dataset needs at least 1 feature");
  if (y_.size() != x_.rows()) throw Error(ErrorKind::data, "response length does not match rows");
  if (names_.size() != static_cast<std::size_t>(x_.cols()) || scaling_.size() != names_.size()) {
    throw Error(ErrorKind::data, "feature metadata does not match columns");
  }
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
    throw Error(ErrorKind::data, "feature names are not unique");
  }
  if (!x_.allFinite() || !y_.allFinite()) throw Error(ErrorKind::numeric, "non-finite values in dataset");
  if (unit_range && (x_.minCoeff() < 0.0 || x_.maxCoeff() > 1.0)) {
    throw Error(ErrorKind::data, "scaled features outside [0,1]");
  }
}

Dataset Dataset::select_rows(std::span<const Index> rows) const {
  return Dataset(take_rows(x_, rows), take_rows(y_, rows), names_, scaling_, response_, false);
}

Eigen::MatrixXd Dataset::columns(std::span<const Index> features) const {
  Eigen::MatrixXd out(x_.rows(), static_cast<Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) out.col(static_cast<Index>(j)) = x_.col(features[j]);
  return out;
}

Dataset preprocess(const RawTable& raw) {
  auto t = clean_and_expand(raw);
  auto scaling = fit_scaling(t.x);
  auto x = apply_scaling(t.x, scaling);
  return Dataset(std::move(x), std::move(t.y), std::move(t.names), std::move(scaling), raw.response);
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double train_fraction,
                                                               std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::config, "train fraction must lie in (0,1)");
  }
  const auto n_train = static_cast<Index>(std::floor(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) throw Error(ErrorKind::data, "split leaves an empty side");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(derive_seed(seed, "split"));
  shuffle(perm, rng);
  std::vector<Index> train(perm.begin(), perm.begin() + n_train);
  std::vector<Index> test(perm.begin() + n_train, perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  auto [train, test] = split_indices(ds.n(), train_fraction, seed);
  return {ds.select_rows(train), ds.select_rows(test)};
}

std::pair<Dataset, Dataset> preprocess_split(const RawTable& raw, double train_fraction, std::uint64_t seed) {
  auto t = clean_and_expand(raw);
  auto [train_rows, test_rows] = split_indices(t.x.rows(), train_fraction, seed);
  const Eigen::MatrixXd x_train = take_rows(t.x, train_rows);
  const Eigen::MatrixXd x_test = take_rows(t.x, test_rows);
  auto scaling = fit_scaling(x_train);
  Dataset train(apply_scaling(x_train, scaling), take_rows(t.y, train_rows), t.names, scaling, raw.response);
  Dataset test(apply_scaling(x_test, scaling), take_rows(t.y, test_rows), t.names, scaling, raw.response, false);
  return {std::move(train), std::move(test)};
}

std::vector<Index> FoldPlan::held_out(int fold) const {
  std::vector<Index> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) rows.push_back(static_cast<Index>(i));
  }
  return rows;
}

std::vector<Index> FoldPlan::in_fold_complement(int fold) const {
  std::vector<Index> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) rows.push_back(static_cast<Index>(i));
  }
  return rows;
}

FoldPlan make_folds(Index n, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::config, "fold count must be at least 2");
  if (static_cast<Index>(k) > n) throw Error(ErrorKind::config, "fold count exceeds rows");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(derive_seed(seed, "folds"));
  shuffle(perm, rng);
  FoldPlan plan;
  plan.k = k;
  plan.assignments.resize(static_cast<std::size_t>(n));
  for (std::size_t pos = 0; pos < perm.size(); ++pos) {
    plan.assignments[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return plan;
}

}  // namespace enfuse
