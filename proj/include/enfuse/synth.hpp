#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "enfuse/data.hpp"

namespace enfuse::synth {

/// Linear model with planted informative columns:
///   y = intercept + sum_{j informative} b_j z_j + noise_sigma * e
/// where z are standard normal (optionally sharing latent factors) and b_j
/// has magnitude in [coef_min, coef_max] with a random sign. Raw feature
/// values are written as 50 + 10 z.
struct SynthSpec {
  Index n = 200;
  int informative = 5;
  int noise = 20;
  double noise_sigma = 1.0;
  double coef_min = 1.0;
  double coef_max = 3.0;
  double intercept = 10.0;
  int factors = 0;             // latent factors shared by all columns
  double factor_weight = 0.0;  // in [0,1): loading share of the latent part
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  std::vector<std::string> names;   // feature columns, CSV order
  std::vector<Index> informative;   // indices into names
  std::vector<double> coefficients; // per column, zero for noise
  Eigen::MatrixXd x;                // raw feature values
  Eigen::VectorXd y;
  std::string response = "y";
};

SynthData generate(const SynthSpec& spec);

std::string to_csv(const SynthData& data);
std::string to_schema(const SynthData& data);

struct SynthFiles {
  std::filesystem::path csv;
  std::filesystem::path schema;
  std::filesystem::path truth;
};

/// Writes data.csv, schema.txt and truth.json into `dir`.
SynthFiles write(const SynthSpec& spec, const std::filesystem::path& dir);

/// Parsed dataset of a generated table (no file round trip).
RawTable to_raw_table(const SynthData& data);

}  // namespace enfuse::synth
