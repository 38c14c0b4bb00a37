#pragma once

#include <cstddef>
#include <map>
#include <string>

namespace qarg {

struct Interval {
  double lo;
  double hi;
};

/// Wilson score interval for `successes` out of `trials` at normal quantile z.
/// Returns [0, 1] when trials == 0.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

/// Standard deviation of the mean of `trials` Bernoulli(p) draws.
double bernoulli_sigma(double p, std::size_t trials);

/// (observed - p) / bernoulli_sigma(p, trials). When the sigma is zero the
/// score is 0 for an exact match and +-infinity otherwise.
double z_score(double observed, double p, std::size_t trials);

/// P[Bin(n, p) = i].
double binomial_pmf(std::size_t n, std::size_t i, double p);
/// P[Bin(n, p) >= m].
double binomial_tail(std::size_t n, double p, std::size_t m);

/// Half the L1 distance; keys missing from one side count as probability 0.
double total_variation(const std::map<std::string, double>& a, const std::map<std::string, double>& b);

}  // namespace qarg
