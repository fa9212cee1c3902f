#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lvmon/constellation.hpp"

namespace lvmon::oracle {

inline double ber_from_q_db(double q_db) {
  return 0.5 * std::erfc(std::pow(10.0, q_db / 20.0) / std::numbers::sqrt2);
}

// Direct evaluation of I_{q,s} for a small constellation: the bitwise metric
// q(y|b) = prod_i q_{B_i,Y}(b_i, y) / P_B(b) built from the Gaussian auxiliary
// channel, averaged over the given samples.
inline double gmi_direct(const Constellation& c, double n0, const std::vector<cdouble>& y,
                         const std::vector<std::uint32_t>& labels, double s) {
  const int m = c.bits_per_symbol();
  const std::size_t M = c.size();
  auto label_prob = [&](std::uint32_t b) { return c.pmf()[c.index_of_label(b)]; };
  double acc = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    auto q_bit = [&](int i, int bval) {
      double v = 0.0;
      for (std::size_t k = 0; k < M; ++k)
        if (c.bit(k, i) == bval) v += c.pmf()[k] * std::exp(-std::norm(y[n] - c.points()[k]) / n0);
      return v;
    };
    auto metric = [&](std::uint32_t b) {
      double p = 1.0;
      for (int i = 0; i < m; ++i) p *= q_bit(i, static_cast<int>((b >> (m - 1 - i)) & 1U));
      return p / label_prob(b);
    };
    double den = 0.0;
    for (std::uint32_t b = 0; b < M; ++b) den += label_prob(b) * std::pow(metric(b), s);
    acc += std::log2(std::pow(metric(labels[n]), s) / den);
  }
  return acc / static_cast<double>(y.size());
}

}  // namespace lvmon::oracle
