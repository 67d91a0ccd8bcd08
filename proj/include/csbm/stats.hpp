#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace csbm {

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

// Wilson score interval for a binomial proportion (default z for 95%).
inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                      double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Pearson statistic for observed counts against expected probabilities.
// Cells with zero expectation must have zero observations.
inline double chi_square_stat(const std::vector<std::uint64_t>& observed,
                              const std::vector<double>& expected_prob) {
  if (observed.size() != expected_prob.size()) {
    throw std::invalid_argument("chi_square_stat: size mismatch");
  }
  std::uint64_t total = 0;
  for (auto count : observed) total += count;
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = expected_prob[i] * static_cast<double>(total);
    if (expected <= 0.0) {
      if (observed[i] != 0) throw std::invalid_argument("chi_square_stat: mass on null cell");
      continue;
    }
    const double delta = static_cast<double>(observed[i]) - expected;
    stat += delta * delta / expected;
  }
  return stat;
}

// Two-sample homogeneity statistic over matched category counts.
inline double chi_square_two_sample(const std::vector<std::uint64_t>& first,
                                    const std::vector<std::uint64_t>& second) {
  if (first.size() != second.size()) {
    throw std::invalid_argument("chi_square_two_sample: size mismatch");
  }
  double n1 = 0.0, n2 = 0.0;
  for (auto c : first) n1 += static_cast<double>(c);
  for (auto c : second) n2 += static_cast<double>(c);
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const double pooled = (static_cast<double>(first[i]) + static_cast<double>(second[i])) / (n1 + n2);
    if (pooled == 0.0) continue;
    const double e1 = n1 * pooled;
    const double e2 = n2 * pooled;
    const double d1 = static_cast<double>(first[i]) - e1;
    const double d2 = static_cast<double>(second[i]) - e2;
    stat += d1 * d1 / e1 + d2 * d2 / e2;
  }
  return stat;
}

// 99th percentile of the chi-square distribution for small df.
inline double chi_square_crit99(int df) {
  static const double table[] = {6.634896601021213,  9.21034037197618,  11.344866730144373,
                                 13.276704135987622, 15.08627246938899, 16.811893829770927,
                                 18.475306906582357, 20.090235029663233, 21.665994333461924,
                                 23.209251158954356};
  if (df < 1 || df > 10) throw std::invalid_argument("chi_square_crit99: df out of table range");
  return table[df - 1];
}

// Streaming mean / variance / fourth central moment, for moment checks.
class MomentAccumulator {
 public:
  void add(double x) {
    ++count_;
    sum_ += x;
    sum2_ += x * x;
    sum3_ += x * x * x;
    sum4_ += x * x * x * x;
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return sum_ / count_; }

  double variance() const {
    const double m = mean();
    return sum2_ / count_ - m * m;
  }

  double fourth_central() const {
    const double m = mean();
    return sum4_ / count_ - 4.0 * m * sum3_ / count_ + 6.0 * m * m * sum2_ / count_ -
           3.0 * m * m * m * m;
  }

  MomentAccumulator& operator+=(const MomentAccumulator& other) {
    count_ += other.count_;
    sum_ += other.sum_;
    sum2_ += other.sum2_;
    sum3_ += other.sum3_;
    sum4_ += other.sum4_;
    return *this;
  }

 private:
  std::uint64_t count_ = 0;
  double sum_ = 0.0;
  double sum2_ = 0.0;
  double sum3_ = 0.0;
  double sum4_ = 0.0;
};

}  // namespace csbm
