#pragma once

#include <string>
#include <vector>

namespace enfuse::stats {

struct PairedSample {
  std::string label_a;
  std::string label_b;
  std::vector<double> values_a;
  std::vector<double> values_b;
};

/// Direction of the alternative hypothesis for the differences a - b.
enum class Alternative { two_sided, a_less, a_greater };

std::string to_string(Alternative alternative);
Alternative parse_alternative(const std::string& text);

struct WilcoxonResult {
  double statistic = 0.0;  // W+, the rank sum of positive differences
  double p_value = 1.0;
  int n_effective = 0;     // pairs left after dropping zero differences
  bool exact = false;
};

/// Effective sample sizes up to this bound use the exact null distribution.
inline constexpr int kExactLimit = 12;

/// Paired Wilcoxon signed-rank test. Zero differences are dropped, tied
/// |differences| share their average rank. Exact null distribution for
/// n_effective <= 12, otherwise the normal approximation with tie and
/// continuity corrections.
///
/// Throws Error(degenerate, "identical samples") when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample, Alternative alternative);

/// Average ranks of |d| (1-based), doubled so ties stay integral.
std::vector<long> doubled_abs_ranks(const std::vector<double>& differences);

inline constexpr double kConfidence = 0.9;

/// Reject the null hypothesis iff p < 1 - confidence.
inline bool reject(double p_value, double confidence = kConfidence) noexcept { return p_value < 1.0 - confidence; }

}  // namespace enfuse::stats
