#ifndef IDIOMSPACE_STATISTICS_HPP
#define IDIOMSPACE_STATISTICS_HPP

#include <cstddef>
#include <span>

namespace idiomspace::analysis {

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

/// Two-sided p-value of Student's t with `df` degrees of freedom.
double two_sided_p(double t, double df);

/// Welch's unequal-variance t-test, Welch-Satterthwaite df. Positive t means
/// mean(a) > mean(b). Throws DegenerateError when both samples are constant.
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

/// One-sample t-test of the differences against zero, df = n - 1. All-zero
/// differences give t = 0, p = 1; constant non-zero differences throw
/// DegenerateError.
TTest paired_t_test(std::span<const double> diffs);

struct Correlation {
  double r = 0.0;
  double df = 0.0;  // n - 2
  double p = 1.0;
};

/// Pearson r with the t-transform p-value. Throws DegenerateError on constant
/// input and ContractError on fewer than 3 pairs or unequal lengths.
Correlation pearson(std::span<const double> x, std::span<const double> y);

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided, slope == 0
  std::size_t n = 0;
};

/// Ordinary least squares of y on x with an intercept.
Regression ols(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);

}  // namespace idiomspace::analysis

#endif  // IDIOMSPACE_STATISTICS_HPP
