#include "enfuse/synth.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "enfuse/error.hpp"
#include "enfuse/report.hpp"
#include "enfuse/rng.hpp"

namespace enfuse::synth {

void SynthSpec::validate() const {
  if (informative < 0 || noise < 0 || informative + noise < 1) {
    throw Error(ErrorKind::config, "synth needs at least one feature column");
  }
  if (n < 2 || n <= informative + noise) throw Error(ErrorKind::config, "synth needs more rows than features");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::config, "noise sigma must be non-negative");
  if (!(coef_min > 0.0 && coef_max >= coef_min)) throw Error(ErrorKind::config, "coefficient range must satisfy 0 < min <= max");
  if (factors < 0) throw Error(ErrorKind::config, "factor count must be non-negative");
  if (!(factor_weight >= 0.0 && factor_weight < 1.0)) throw Error(ErrorKind::config, "factor weight must lie in [0,1)");
  if (factors == 0 && factor_weight > 0.0) throw Error(ErrorKind::config, "factor weight needs at least one factor");
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "synth"));
  const int p = spec.informative + spec.noise;
  const Index n = spec.n;

  SynthData out;
  const int width = static_cast<int>(std::to_string(p).size());
  for (int j = 0; j < p; ++j) {
    std::string digits = std::to_string(j + 1);
    out.names.push_back("x" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits);
  }

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  shuffle(order, rng);
  out.informative.assign(order.begin(), order.begin() + spec.informative);
  std::sort(out.informative.begin(), out.informative.end());
  out.coefficients.assign(static_cast<std::size_t>(p), 0.0);
  for (Index j : out.informative) {
    const double magnitude = rng.uniform(spec.coef_min, spec.coef_max);
    out.coefficients[static_cast<std::size_t>(j)] = rng.bernoulli(0.5) ? magnitude : -magnitude;
  }

  Eigen::MatrixXd loadings = Eigen::MatrixXd::Zero(p, spec.factors);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < spec.factors; ++k) loadings(j, k) = rng.normal();
    const double norm = loadings.row(j).norm();
    if (norm > 0.0) loadings.row(j) /= norm;
  }
  const double own = std::sqrt(1.0 - spec.factor_weight * spec.factor_weight);

  Eigen::MatrixXd z(n, p);
  Eigen::VectorXd factor(spec.factors);
  out.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (int k = 0; k < spec.factors; ++k) factor(k) = rng.normal();
    for (int j = 0; j < p; ++j) {
      const double shared = spec.factors > 0 ? loadings.row(j).dot(factor) : 0.0;
      z(i, j) = spec.factor_weight * shared + own * rng.normal();
    }
    double yi = spec.intercept;
    for (int j = 0; j < p; ++j) yi += out.coefficients[static_cast<std::size_t>(j)] * z(i, j);
    out.y(i) = yi + spec.noise_sigma * rng.normal();
  }
  out.x = (z.array() * 10.0 + 50.0).matrix();
  return out;
}

std::string to_csv(const SynthData& data) {
  std::string s;
  for (const auto& name : data.names) s += name + ",";
  s += data.response + "\n";
  for (Index i = 0; i < data.x.rows(); ++i) {
    for (Index j = 0; j < data.x.cols(); ++j) s += report::format_double(data.x(i, j)) + ",";
    s += report::format_double(data.y(i)) + "\n";
  }
  return s;
}

std::string to_schema(const SynthData& data) {
  std::string s = "# generated by enfuse synth\n";
  for (const auto& name : data.names) s += name + " = numeric\n";
  s += data.response + " = numeric\n";
  s += "response = " + data.response + "\n";
  return s;
}

SynthFiles write(const SynthSpec& spec, const std::filesystem::path& dir) {
  const auto data = generate(spec);
  std::filesystem::create_directories(dir);
  SynthFiles files{dir / "data.csv", dir / "schema.txt", dir / "truth.json"};
  report::write_text(files.csv, to_csv(data));
  report::write_text(files.schema, to_schema(data));
  report::write_text(files.truth, report::truth_json(spec, data).dump(2) + "\n");
  return files;
}

RawTable to_raw_table(const SynthData& data) {
  RawTable t;
  for (const auto& name : data.names) t.columns.push_back({name, ColumnKind::numeric});
  t.columns.push_back({data.response, ColumnKind::numeric});
  t.response = data.response;
  for (Index i = 0; i < data.x.rows(); ++i) {
    std::vector<RawValue> row;
    for (Index j = 0; j < data.x.cols(); ++j) row.emplace_back(data.x(i, j));
    row.emplace_back(data.y(i));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace enfuse::synth
