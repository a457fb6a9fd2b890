#include "enfuse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "enfuse/error.hpp"

namespace enfuse::stats {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::string to_string(Alternative alternative) {
  switch (alternative) {
    case Alternative::two_sided: return "two-sided";
    case Alternative::a_less: return "a-less";
    case Alternative::a_greater: return "a-greater";
  }
  return "unknown";
}

Alternative parse_alternative(const std::string& text) {
  if (text == "two-sided") return Alternative::two_sided;
  if (text == "a-less" || text == "less") return Alternative::a_less;
  if (text == "a-greater" || text == "greater") return Alternative::a_greater;
  throw Error(ErrorKind::config, "unknown alternative '" + text + "'");
}

std::vector<long> doubled_abs_ranks(const std::vector<double>& differences) {
  const std::size_t n = differences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(differences[a]) < std::abs(differences[b]);
  });
  std::vector<long> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(differences[order[j + 1]]) == std::abs(differences[order[i]])) ++j;
    // positions i..j (0-based) hold ranks i+1..j+1; doubled average = i + j + 2
    const auto doubled = static_cast<long>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    i = j + 1;
  }
  return ranks;
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample, Alternative alternative) {
  if (sample.values_a.size() != sample.values_b.size()) throw Error(ErrorKind::data, "paired samples differ in length");
  if (sample.values_a.size() < 5) throw Error(ErrorKind::data, "paired samples need at least 5 pairs");

  std::vector<double> d;
  for (std::size_t i = 0; i < sample.values_a.size(); ++i) {
    const double diff = sample.values_a[i] - sample.values_b[i];
    if (!std::isfinite(diff)) throw Error(ErrorKind::numeric, "non-finite paired value");
    if (diff != 0.0) d.push_back(diff);
  }
  if (d.empty()) throw Error(ErrorKind::degenerate, "identical samples");

  const auto ranks = doubled_abs_ranks(d);
  const int n = static_cast<int>(d.size());
  long w2 = 0;  // doubled W+
  for (int i = 0; i < n; ++i) {
    if (d[static_cast<std::size_t>(i)] > 0.0) w2 += ranks[static_cast<std::size_t>(i)];
  }

  WilcoxonResult out;
  out.statistic = static_cast<double>(w2) / 2.0;
  out.n_effective = n;

  if (n <= kExactLimit) {
    // Null distribution of the doubled positive-rank sum: each rank enters
    // with a random sign, so convolve one rank at a time.
    const long total = std::accumulate(ranks.begin(), ranks.end(), 0L);
    std::vector<std::uint64_t> count(static_cast<std::size_t>(total) + 1, 0);
    count[0] = 1;
    long reach = 0;
    for (long r : ranks) {
      for (long s = reach; s >= 0; --s) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
      reach += r;
    }
    std::uint64_t at_most = 0;
    std::uint64_t at_least = 0;
    for (long s = 0; s <= total; ++s) {
      if (s <= w2) at_most += count[static_cast<std::size_t>(s)];
      if (s >= w2) at_least += count[static_cast<std::size_t>(s)];
    }
    const double denom = std::ldexp(1.0, n);
    const double p_less = static_cast<double>(at_most) / denom;
    const double p_greater = static_cast<double>(at_least) / denom;
    out.exact = true;
    switch (alternative) {
      case Alternative::a_less: out.p_value = p_less; break;
      case Alternative::a_greater: out.p_value = p_greater; break;
      case Alternative::two_sided: out.p_value = std::min(1.0, 2.0 * std::min(p_less, p_greater)); break;
    }
    return out;
  }

  const double nn = n;
  const double mean = nn * (nn + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    std::vector<long> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
  }
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double sd = std::sqrt(variance);
  const double w = out.statistic;
  switch (alternative) {
    case Alternative::a_less: out.p_value = normal_cdf((w - mean + 0.5) / sd); break;
    case Alternative::a_greater: out.p_value = normal_cdf(-(w - mean - 0.5) / sd); break;
    case Alternative::two_sided: {
      const double z = std::max(0.0, std::abs(w - mean) - 0.5) / sd;
      out.p_value = 2.0 * normal_cdf(-z);
      break;
    }
  }
  out.p_value = std::clamp(out.p_value, std::numeric_limits<double>::min(), 1.0);
  return out;
}

}  // namespace enfuse::stats
