#include "metfa/stat_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "metfa/errors.hpp"

namespace metfa {
namespace {

// Up to this n every C(n, i) fits in 64 bits and every cumulative sum in 128.
constexpr std::size_t kExactLimit = 64;

__extension__ using u128 = unsigned __int128;

std::vector<u128> exact_binomial_row(std::size_t n) {
  std::vector<u128> row(n + 1);
  row[0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    // C(n, i+1) = C(n, i) * (n - i) / (i + 1); the product stays below 2^70.
    row[i + 1] = row[i] * (n - i) / (i + 1);
  }
  return row;
}

double log_binomial(std::size_t n, std::size_t i) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
         std::lgamma(static_cast<double>(n - i) + 1.0);
}

// C(n,i) p^i (1-p)^(n-i) with 0^0 = 1.
double binomial_term(std::size_t n, std::size_t i, double p) {
  const double q = 1.0 - p;
  if (n <= kExactLimit) {
    static thread_local std::size_t cached_n = std::numeric_limits<std::size_t>::max();
    static thread_local std::vector<u128> cached_row;
    if (cached_n != n) {
      cached_row = exact_binomial_row(n);
      cached_n = n;
    }
    return static_cast<double>(cached_row[i]) * std::pow(p, static_cast<double>(i)) *
           std::pow(q, static_cast<double>(n - i));
  }
  if ((p == 0.0 && i > 0) || (q == 0.0 && i < n)) return 0.0;
  double log_term = log_binomial(n, i);
  if (i > 0) log_term += static_cast<double>(i) * std::log(p);
  if (i < n) log_term += static_cast<double>(n - i) * std::log1p(-p);
  return std::exp(log_term);
}

void check_count(std::size_t n, std::size_t k) {
  if (n == 0) throw DomainError("sample count must be at least 1");
  if (k > n) {
    throw DomainError("observed count " + std::to_string(k) + " exceeds sample count " +
                      std::to_string(n));
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

// Sum over [lo, hi] of 0.5^n C(n, i), summed from the small end.
double half_binomial_mass(std::size_t n, std::size_t lo, std::size_t hi) {
  if (lo > hi) return 0.0;
  if (n <= kExactLimit) {
    const auto row = exact_binomial_row(n);
    u128 total = 0;
    for (std::size_t i = lo; i <= hi; ++i) total += row[i];
    // total <= 2^64 here, so the conversion rounds once.
    return std::ldexp(static_cast<double>(total), -static_cast<int>(n));
  }
  double total = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) total += binomial_term(n, i, 0.5);
  return total;
}

}  // namespace

void TestConfig::validate() const {
  check_alpha(alpha);
  if (!(tie_break_variance >= 0.0) || !std::isfinite(tie_break_variance)) {
    throw DomainError("tie-break variance must be a nonnegative finite number");
  }
  if (!std::isfinite(threshold_h)) throw DomainError("threshold must be finite");
}

PValue::PValue(double v) : value_(std::clamp(v, 0.0, 1.0)) {}

double binom_tail_geq(std::size_t n, std::size_t k, double p) {
  if (k > n) throw DomainError("k out of range for binom_tail_geq");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
  double total = 0.0;
  for (std::size_t i = n + 1; i-- > k;) total += binomial_term(n, i, p);
  return total;
}

PValue pvalue_median_leq(std::size_t n, std::size_t k) {
  check_count(n, k);
  const double dn = static_cast<double>(n);
  double total = 0.0;
  // Terms shrink toward i = n, so accumulate from the top down.
  for (std::size_t i = n + 1; i-- > k;) {
    const double p_star = std::min(0.5, static_cast<double>(i) / dn);
    total += binomial_term(n, i, p_star);
  }
  return PValue(total);
}

PValue pvalue_median_geq(std::size_t n, std::size_t k) {
  check_count(n, k);
  return pvalue_median_leq(n, n - k);
}

PValue pvalue_median_eq(std::size_t n, std::size_t k) {
  check_count(n, k);
  const std::size_t low = std::min(k, n - k);
  const std::size_t high = std::max(k, n - k);
  if (low + 1 >= high) {
    // {0..low} and {high..n} cover every index.
    return PValue(1.0);
  }
  return PValue(half_binomial_mass(n, 0, low) + half_binomial_mass(n, high, n));
}

ConfidenceIndices confidence_indices(std::size_t n, double alpha) {
  check_alpha(alpha);
  if (n == 0) throw DomainError("sample count must be at least 1");
  const double half_alpha = alpha / 2.0;

  std::size_t count = 0;  // number of k satisfying the tail bound
  if (n <= kExactLimit) {
    // Compare integer tail sums against floor(alpha/2 * 2^n) exactly.
    const auto row = exact_binomial_row(n);
    const double scaled = std::floor(std::ldexp(half_alpha, static_cast<int>(n)));
    const u128 budget = static_cast<u128>(scaled);
    u128 cumulative = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      cumulative += row[k];
      if (cumulative > budget) break;
      ++count;
    }
  } else {
    double cumulative = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      cumulative += binomial_term(n, k, 0.5);
      if (cumulative > half_alpha) break;
      ++count;
    }
  }
  if (count == 0) {
    const std::size_t required = min_samples(alpha, Sided::kTwo);
    throw InsufficientSamples(n, required,
                              "need at least " + std::to_string(required) +
                                  " samples for a two-sided interval at alpha=" +
                                  std::to_string(alpha) + ", got " + std::to_string(n));
  }
  ConfidenceIndices out;
  out.k1 = count - 1;
  out.k2 = n - out.k1;
  out.n = n;
  out.alpha = alpha;
  return out;
}

std::size_t min_samples(double alpha, Sided sided) {
  check_alpha(alpha);
  // Smallest N with 0.5^N <= alpha, i.e. ceil(-log2 alpha), without log2 rounding.
  std::size_t n = 1;
  while (std::ldexp(1.0, -static_cast<int>(n)) > alpha) ++n;
  return sided == Sided::kOne ? n : n + 1;
}

double normal_upper_quantile(double tail_probability) {
  if (!(tail_probability > 0.0 && tail_probability < 1.0)) {
    throw DomainError("tail probability must lie in (0, 1)");
  }
  // Acklam's rational approximation of the inverse normal CDF.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  const double p = 1.0 - tail_probability;  // lower-tail probability
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(tail_probability));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  return x;
}

double jackknife_standard_error(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw DomainError("jackknife needs at least 2 samples");
  double total = 0.0;
  for (double x : samples) total += x;
  const double dn = static_cast<double>(n);

  std::vector<double> leave_one_out(n);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    leave_one_out[i] = (total - samples[i]) / (dn - 1.0);
    loo_mean += leave_one_out[i];
  }
  loo_mean /= dn;
  double ss = 0.0;
  for (double v : leave_one_out) ss += (v - loo_mean) * (v - loo_mean);
  return std::sqrt((dn - 1.0) / dn * ss);
}

Interval smoothgrad_asymptotic_ci(std::span<const double> samples, double alpha) {
  check_alpha(alpha);
  if (samples.size() < 2) throw DomainError("asymptotic interval needs at least 2 samples");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(samples.size());
  const double se = jackknife_standard_error(samples);
  const double z = normal_upper_quantile(alpha / 2.0);
  return {mean - z * se, mean + z * se};
}

}  // namespace metfa
