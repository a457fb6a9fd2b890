#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace enfuse {

using Index = Eigen::Index;

enum class ColumnKind { numeric, categorical };

struct Column {
  std::string name;
  ColumnKind kind;
};

/// Column kinds plus the response column name, as read from a schema file.
struct Schema {
  std::map<std::string, ColumnKind> kinds;
  std::string response;
};

/// Parses `name = numeric|categorical` lines and one `response = <name>` line.
/// Blank lines and lines starting with '#' are ignored.
Schema parse_schema(const std::string& text);
Schema load_schema(const std::filesystem::path& path);

/// monostate marks a missing cell.
using RawValue = std::variant<std::monostate, double, std::string>;

struct RawTable {
  std::vector<Column> columns;
  std::vector<std::vector<RawValue>> rows;
  std::string response;

  std::size_t missing_count() const;
  std::size_t column_index(const std::string& name) const;
};

RawTable load_csv(const std::filesystem::path& path, const std::map<std::string, ColumnKind>& schema,
                  const std::string& response);
RawTable load_csv(const std::filesystem::path& path, const Schema& schema);
RawTable parse_csv(const std::string& text, const std::map<std::string, ColumnKind>& schema,
                   const std::string& response);

struct ColumnScaling {
  double min = 0.0;
  double max = 0.0;

  double scale(double v) const noexcept { return max > min ? (v - min) / (max - min) : 0.0; }
  double unscale(double s) const noexcept { return min + s * (max - min); }
};

/// Feature matrix in min-max units with the response kept in original units.
///
/// Datasets built by preprocess() hold X in [0,1]. Held-out rows transformed
/// with training-split statistics may fall outside that range; such datasets
/// are built with `unit_range = false`.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<std::string> feature_names,
          std::vector<ColumnScaling> scaling, std::string response_name, bool unit_range = true);

  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::vector<ColumnScaling>& scaling() const noexcept { return scaling_; }
  const std::string& response_name() const noexcept { return response_; }

  Dataset select_rows(std::span<const Index> rows) const;

  /// Dense copy of the selected feature columns.
  Eigen::MatrixXd columns(std::span<const Index> features) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<std::string> names_;
  std::vector<ColumnScaling> scaling_;
  std::string response_;
};

/// Drop rows with missing cells, one-hot expand categoricals (levels sorted
/// lexicographically), min-max scale features. The response is not scaled.
Dataset preprocess(const RawTable& raw);

/// Same cleaning and expansion as preprocess(), then a seeded row split with
/// scaling statistics taken from the training rows only.
std::pair<Dataset, Dataset> preprocess_split(const RawTable& raw, double train_fraction,
                                             std::uint64_t seed);

/// Row indices of the seeded split: training rows first (floor(f*n) of them).
std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double train_fraction,
                                                               std::uint64_t seed);

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;

  Index n() const noexcept { return static_cast<Index>(assignments.size()); }
  std::vector<Index> held_out(int fold) const;
  std::vector<Index> in_fold_complement(int fold) const;
};

FoldPlan make_folds(Index n, int k, std::uint64_t seed);

}  // namespace enfuse
