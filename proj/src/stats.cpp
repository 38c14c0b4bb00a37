#include "qarg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace qarg {

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double bernoulli_sigma(double p, std::size_t trials) {
  if (trials == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

double z_score(double observed, double p, std::size_t trials) {
  const double sigma = bernoulli_sigma(p, trials);
  const double diff = observed - p;
  if (sigma == 0.0) {
    if (std::abs(diff) < 1e-15) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return diff / sigma;
}

double binomial_pmf(std::size_t n, std::size_t i, double p) {
  if (i > n) return 0.0;
  if (p <= 0.0) return i == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return i == n ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  const double ii = static_cast<double>(i);
  const double log_choose = std::lgamma(nn + 1.0) - std::lgamma(ii + 1.0) - std::lgamma(nn - ii + 1.0);
  return std::exp(log_choose + ii * std::log(p) + (nn - ii) * std::log1p(-p));
}

double binomial_tail(std::size_t n, double p, std::size_t m) {
  if (m == 0) return 1.0;
  if (m > n) return 0.0;
  double acc = 0.0;
  for (std::size_t i = m; i <= n; ++i) acc += binomial_pmf(n, i, p);
  return std::min(1.0, acc);
}

double total_variation(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double acc = 0.0;
  for (const auto& k : keys) {
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    acc += std::abs((ia == a.end() ? 0.0 : ia->second) - (ib == b.end() ? 0.0 : ib->second));
  }
  return 0.5 * acc;
}

}  // namespace qarg
