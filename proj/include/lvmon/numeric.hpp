#pragma once

#include <span>

namespace lvmon::numeric {

/// Standard normal CDF.
double normal_cdf(double z);

/// log of the standard normal CDF, accurate deep into the lower tail.
double log_normal_cdf(double z);

/// log of the standard normal probability mass in [a, b], a < b (either may be infinite).
double log_normal_interval(double a, double b);

double log_sum_exp(std::span<const double> v);

/// Binary entropy in bits, with 0 log 0 = 0.
double binary_entropy(double p);

/// Inverse complementary error function on (0, 2).
double erfc_inv(double x);

}  // namespace lvmon::numeric
