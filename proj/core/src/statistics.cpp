#include "idiomspace/statistics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "idiomspace/errors.hpp"

namespace idiomspace::analysis {

namespace {

struct Moments {
  double mean = 0.0;
  double ss = 0.0;  // sum of squared deviations
  std::size_t n = 0;
};

Moments moments(std::span<const double> x) {
  Moments m;
  m.n = x.size();
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(m.n);
  for (double v : x) m.ss += (v - m.mean) * (v - m.mean);
  return m;
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw InsufficientDataError("mean of an empty sample");
  return moments(x).mean;
}

double two_sided_p(double t, double df) {
  if (std::isnan(t) || !(df > 0.0)) throw DegenerateError("p-value needs a finite t and df > 0");
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return std::min(1.0, std::max(0.0, p));
}

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InsufficientDataError("Welch t-test needs at least two values per sample");
  }
  const auto ma = moments(a);
  const auto mb = moments(b);
  const double va = ma.ss / static_cast<double>(ma.n - 1);
  const double vb = mb.ss / static_cast<double>(mb.n - 1);
  const double qa = va / static_cast<double>(ma.n);
  const double qb = vb / static_cast<double>(mb.n);
  if (qa + qb == 0.0) throw DegenerateError("Welch t-test on two constant samples");
  TTest out;
  out.t = (ma.mean - mb.mean) / std::sqrt(qa + qb);
  out.df = (qa + qb) * (qa + qb) /
           (qa * qa / static_cast<double>(ma.n - 1) + qb * qb / static_cast<double>(mb.n - 1));
  out.p = two_sided_p(out.t, out.df);
  return out;
}

TTest paired_t_test(std::span<const double> diffs) {
  if (diffs.size() < 2) throw InsufficientDataError("paired t-test needs at least two differences");
  const auto m = moments(diffs);
  TTest out;
  out.df = static_cast<double>(m.n - 1);
  if (m.ss == 0.0) {
    if (m.mean == 0.0) return out;  // t = 0, p = 1
    throw DegenerateError("paired t-test on constant non-zero differences");
  }
  const double sd = std::sqrt(m.ss / out.df);
  out.t = m.mean / (sd / std::sqrt(static_cast<double>(m.n)));
  out.p = two_sided_p(out.t, out.df);
  return out;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("pearson: samples differ in length");
  if (x.size() < 3) throw ContractError("pearson needs at least three pairs");
  const auto mx = moments(x);
  const auto my = moments(y);
  if (mx.ss == 0.0 || my.ss == 0.0) throw DegenerateError("correlation undefined for constant input");
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx.mean) * (y[i] - my.mean);
  Correlation out;
  out.r = std::clamp(sxy / std::sqrt(mx.ss * my.ss), -1.0, 1.0);
  out.df = static_cast<double>(x.size() - 2);
  if (std::abs(out.r) == 1.0) {
    out.p = 0.0;
  } else {
    out.p = two_sided_p(out.r * std::sqrt(out.df / (1.0 - out.r * out.r)), out.df);
  }
  return out;
}

Regression ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("ols: samples differ in length");
  if (x.size() < 3) throw InsufficientDataError("ols needs at least three points");
  const auto mx = moments(x);
  const auto my = moments(y);
  if (mx.ss == 0.0) throw DegenerateError("ols with a constant predictor");
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx.mean) * (y[i] - my.mean);
  Regression out;
  out.n = x.size();
  out.slope = sxy / mx.ss;
  out.intercept = my.mean - out.slope * mx.mean;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (out.intercept + out.slope * x[i]);
    sse += e * e;
  }
  out.df = static_cast<double>(out.n - 2);
  out.slope_se = std::sqrt(sse / out.df / mx.ss);
  if (out.slope_se == 0.0) {
    out.t = out.slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), out.slope);
    out.p = out.slope == 0.0 ? 1.0 : 0.0;
  } else {
    out.t = out.slope / out.slope_se;
    out.p = two_sided_p(out.t, out.df);
  }
  return out;
}

}  // namespace idiomspace::analysis
