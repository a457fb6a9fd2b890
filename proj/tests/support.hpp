#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "enfuse/data.hpp"

namespace enfuse::testing {

inline Eigen::MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(gen);
  return m;
}

inline Eigen::VectorXd random_vector(Index n, std::mt19937_64& gen) {
  return random_matrix(n, 1, gen).col(0);
}

// Explicit normal equations [1 X]'[1 X] b = [1 X]' y via LU.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  return (a.transpose() * a).partialPivLu().solve(a.transpose() * y);
}

inline double ols_sse(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  const Eigen::VectorXd b = a.completeOrthogonalDecomposition().solve(y);
  return (y - a * b).squaredNorm();
}

inline Eigen::MatrixXd take_columns(const Eigen::MatrixXd& x, const std::vector<Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = x.col(cols[j]);
  return out;
}

// Dataset with columns already in [0,1]; names x1..xp.
inline Dataset unit_dataset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool unit_range = true) {
  std::vector<std::string> names;
  for (Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  std::vector<ColumnScaling> scaling(static_cast<std::size_t>(x.cols()), ColumnScaling{0.0, 1.0});
  return Dataset(x, y, names, scaling, "y", unit_range);
}

inline Eigen::MatrixXd uniform_matrix(Index rows, Index cols, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(gen);
  return m;
}

}  // namespace enfuse::testing
