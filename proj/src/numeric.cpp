#include "lvmon/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace lvmon::numeric {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double log_normal_cdf(double z) {
  if (z == -kInf) return -kInf;
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
  if (z > -30.0) return std::log(0.5 * std::erfc(-z * kInvSqrt2));
  // Mills-ratio asymptotic series; relative error below 1e-10 for z <= -30.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double log_normal_interval(double a, double b) {
  if (!(a < b)) return -kInf;
  if (a >= 0.0) return log_normal_interval(-b, -a);
  if (b <= 0.0) {
    const double lb = log_normal_cdf(b);
    const double la = log_normal_cdf(a);
    if (lb == -kInf) return -kInf;
    if (la == -kInf) return lb;
    return lb + std::log1p(-std::exp(la - lb));
  }
  return std::log1p(-(normal_cdf(a) + normal_cdf(-b)));
}

double log_sum_exp(std::span<const double> v) {
  double mx = -kInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == -kInf) return -kInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double erfc_inv(double x) { return boost::math::erfc_inv(x); }

}  // namespace lvmon::numeric
