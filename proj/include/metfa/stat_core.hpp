#ifndef METFA_STAT_CORE_HPP
#define METFA_STAT_CORE_HPP

// Exact binomial machinery behind the median tests.
//
// Every test reduces to the counting variable ct_j(h), the number of sampled
// explanations whose score for feature j is >= h. Under "median == h" that
// count is Binomial(N, 1/2); the one-sided bounds maximize each summand over
// the admissible success probability.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace metfa {

enum class Sided { kOne, kTwo };

// Level and threshold of one run of the median tests.
struct TestConfig {
  double alpha = 0.05;
  double threshold_h = 0.5;
  // Variance of the Gaussian tie-break perturbation (0 disables it).
  double tie_break_variance = 1e-6;
  std::uint64_t seed = 0;

  // Throws DomainError unless 0 < alpha < 1 and tie_break_variance >= 0.
  void validate() const;
};

// A probability clamped to [0, 1].
class PValue {
 public:
  explicit PValue(double v);
  double value() const { return value_; }
  bool rejects_at(double alpha) const { return value_ < alpha; }

 private:
  double value_;
};

// Order-statistic ranks (1-based) bounding the median confidence interval.
struct ConfidenceIndices {
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::size_t n = 0;
  double alpha = 0.0;
};

// Sum_{i=k}^{n} C(n,i) p^i (1-p)^(n-i), with 0^0 = 1.
double binom_tail_geq(std::size_t n, std::size_t k, double p);

// p-value of H0: median <= h after observing ct(h) = k out of n. Small values
// mean the median is significantly above h.
PValue pvalue_median_leq(std::size_t n, std::size_t k);

// p-value of H0: median >= h. Equals pvalue_median_leq(n, n - k).
PValue pvalue_median_geq(std::size_t n, std::size_t k);

// Two-sided p-value of H0: median == h.
PValue pvalue_median_eq(std::size_t n, std::size_t k);

// Largest k1 whose lower binomial(n, 1/2) tail is <= alpha / 2, k2 = n - k1.
// Throws InsufficientSamples when even k1 = 0 violates the bound.
ConfidenceIndices confidence_indices(std::size_t n, double alpha);

// Smallest N at which the test can reject at level alpha:
// ceil(-log2 alpha), plus one for the two-sided test.
std::size_t min_samples(double alpha, Sided sided);

// Upper alpha/2 quantile of the standard normal, e.g. 1.959964 at 0.05.
double normal_upper_quantile(double tail_probability);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Asymptotic interval around the sample mean: mean -/+ z_{alpha/2} * se,
// where se is the jackknife standard error of the mean.
Interval smoothgrad_asymptotic_ci(std::span<const double> samples, double alpha);

// Jackknife standard error of the sample mean.
double jackknife_standard_error(std::span<const double> samples);

}  // namespace metfa

#endif  // METFA_STAT_CORE_HPP
