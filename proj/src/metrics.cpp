#include "lvmon/metrics.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "lvmon/errors.hpp"
#include "lvmon/numeric.hpp"

namespace lvmon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ClassMoments {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

ClassMoments moments(std::span<const double> samples, auto&& in_class) {
  ClassMoments cm;
  double sum = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (in_class(k)) {
      sum += samples[k];
      ++cm.n;
    }
  }
  if (cm.n == 0) throw DomainError("statistical Q: a bit class is empty");
  cm.mean = sum / static_cast<double>(cm.n);
  double ss = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (in_class(k)) ss += (samples[k] - cm.mean) * (samples[k] - cm.mean);
  }
  cm.stddev = std::sqrt(ss / static_cast<double>(cm.n));
  return cm;
}

double q_from_moments(const ClassMoments& a, const ClassMoments& b) {
  const double spread = a.stddev + b.stddev;
  if (spread <= 0.0) throw DomainError("statistical Q: zero spread in both classes");
  return std::abs(a.mean - b.mean) / spread;
}

}  // namespace

QFactor q_from_ber(double ber) {
  if (!(ber > 0.0 && ber < 0.5)) throw DomainError("Q-factor undefined for BER outside (0, 0.5)");
  const double q = std::numbers::sqrt2 * numeric::erfc_inv(2.0 * ber);
  return {q, 20.0 * std::log10(q)};
}

double bit_error_rate(std::span<const std::uint8_t> sent, std::span<const std::uint8_t> decided) {
  if (sent.size() != decided.size()) throw UsageError("bit sequences differ in length");
  if (sent.empty()) throw UsageError("bit sequences are empty");
  std::size_t errors = 0;
  for (std::size_t k = 0; k < sent.size(); ++k) errors += (sent[k] != 0) != (decided[k] != 0);
  return static_cast<double>(errors) / static_cast<double>(sent.size());
}

double ber_pre(const BitMatrix& bits, const BitMatrix& decisions) {
  if (bits.rows() != decisions.rows() || bits.cols() != decisions.cols()) {
    throw UsageError("ber_pre: bit matrices differ in shape");
  }
  return bit_error_rate(bits.flat(), decisions.flat());
}

double ber_post(std::span<const std::uint8_t> info, std::span<const std::uint8_t> decoded) {
  return bit_error_rate(info, decoded);
}

double statistical_q(std::span<const double> samples, std::span<const std::uint8_t> bits) {
  if (samples.size() != bits.size()) throw UsageError("statistical_q: length mismatch");
  const auto c0 = moments(samples, [&](std::size_t k) { return bits[k] == 0; });
  const auto c1 = moments(samples, [&](std::size_t k) { return bits[k] != 0; });
  return q_from_moments(c0, c1);
}

double blind_statistical_q(std::span<const double> samples) {
  const auto pos = moments(samples, [&](std::size_t k) { return samples[k] >= 0.0; });
  const auto neg = moments(samples, [&](std::size_t k) { return samples[k] < 0.0; });
  return q_from_moments(pos, neg);
}

double gmi_at_scale(const BitMatrix& bits, const RealMatrix& llr, std::span<const LabelGroup> groups,
                    double s) {
  if (bits.rows() != llr.rows() || bits.cols() != llr.cols()) {
    throw UsageError("gmi: bit and L-value matrices differ in shape");
  }
  if (bits.rows() == 0) throw UsageError("gmi: no samples");

  struct GroupTerms {
    int first;
    int width;
    std::vector<double> log_prior;      // ln P_g(p)
    std::vector<double> weighted_prior; // (1 - s) ln P_g(p), -inf where P_g(p) = 0
  };
  std::vector<GroupTerms> terms;
  std::size_t max_patterns = 0;
  for (const auto& g : groups) {
    GroupTerms t{g.first_bit, g.width, {}, {}};
    for (double p : g.pmf) {
      t.log_prior.push_back(p > 0.0 ? std::log(p) : -kInf);
      t.weighted_prior.push_back(p > 0.0 ? (1.0 - s) * std::log(p) : -kInf);
    }
    max_patterns = std::max(max_patterns, g.pmf.size());
    terms.push_back(std::move(t));
  }

  std::vector<double> partial(max_patterns);
  std::vector<double> exponent(max_patterns);
  double total = 0.0;
  for (std::size_t n = 0; n < bits.rows(); ++n) {
    const auto b = bits.row(n);
    const auto l = llr.row(n);
    double log_num = 0.0;
    double log_den = 0.0;
    for (const auto& t : terms) {
      const std::size_t n_pat = std::size_t{1} << t.width;
      std::uint32_t sent = 0;
      double sent_sum = 0.0;
      for (int j = 0; j < t.width; ++j) {
        const auto bit = b[static_cast<std::size_t>(t.first + j)];
        sent = (sent << 1) | bit;
        if (bit) sent_sum += l[static_cast<std::size_t>(t.first + j)];
      }
      if (t.log_prior[sent] == -kInf) throw UsageError("gmi: transmitted label has zero prior");
      log_num += -s * t.log_prior[sent] - s * sent_sum;

      // partial[p] = sum of L over the one-bits of pattern p (MSB = first tributary).
      partial[0] = 0.0;
      for (std::size_t p = 1; p < n_pat; ++p) {
        const int low = std::countr_zero(p);
        partial[p] = partial[p & (p - 1)] + l[static_cast<std::size_t>(t.first + t.width - 1 - low)];
      }
      for (std::size_t p = 0; p < n_pat; ++p) exponent[p] = t.weighted_prior[p] - s * partial[p];
      log_den += numeric::log_sum_exp(std::span<const double>(exponent.data(), n_pat));
    }
    total += log_num - log_den;
  }
  return total / static_cast<double>(bits.rows()) / std::numbers::ln2;
}

GmiResult gmi(const BitMatrix& bits, const RealMatrix& llr, const Constellation& c, const GmiOptions& opts) {
  const auto groups = c.label_groups();
  auto f = [&](double s) { return gmi_at_scale(bits, llr, groups, s); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = opts.s_min;
  double b = opts.s_max;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > opts.s_tolerance) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  GmiResult r;
  r.s_opt = f1 >= f2 ? x1 : x2;
  r.gmi_bpcu = std::max(f1, f2);
  r.boundary_max = (r.s_opt - opts.s_min) < 2.0 * opts.s_tolerance ||
                   (opts.s_max - r.s_opt) < 2.0 * opts.s_tolerance;
  return r;
}

GmiResult gmi(const BitMatrix& bits, const LValues& l, const Constellation& c, const GmiOptions& opts) {
  return gmi(bits, l.values(), c, opts);
}

double ngmi(double gmi_bpcu, double entropy_bpcu, int m) {
  return 1.0 - (entropy_bpcu - gmi_bpcu) / static_cast<double>(m);
}

std::vector<std::uint64_t> level_counts(const SymmetrizedL& la) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(la.quantizer.n_bin()), 0);
  for (auto idx : la.index) ++counts[idx];
  return counts;
}

double asi_from_pmf(std::span<const double> pmf) {
  const std::size_t n = pmf.size();
  if (n < 2 || n % 2 != 0) throw UsageError("asi: pmf must cover an even-sized alphabet");
  // Sum of w * (1 - h) over magnitudes, normalized by the sum of w: symmetric
  // and one-sided pmfs come out as exactly 0 and 1.
  double info = 0.0, weight = 0.0;
  for (std::size_t k = n / 2; k < n; ++k) {
    const double neg = pmf[n - 1 - k];
    const double abs_mass = pmf[k] + neg;
    if (abs_mass > 0.0) {
      info += abs_mass * (1.0 - numeric::binary_entropy(neg / abs_mass));
      weight += abs_mass;
    }
  }
  if (!(weight > 0.0)) throw UsageError("asi: pmf has no mass");
  return info / weight;
}

double asi_from_pmf(std::span<const double> pmf, std::span<const double> abs_marginal) {
  const std::size_t n = pmf.size();
  if (n < 2 || n % 2 != 0 || abs_marginal.size() != n / 2) {
    throw UsageError("asi: marginal must cover the positive half of the alphabet");
  }
  double info = 0.0, weight = 0.0;
  for (std::size_t k = n / 2; k < n; ++k) {
    const double neg = pmf[n - 1 - k];
    const double abs_mass = pmf[k] + neg;
    const double w = abs_marginal[k - n / 2];
    const double h = abs_mass > 0.0 ? numeric::binary_entropy(neg / abs_mass) : 0.0;
    info += w * (1.0 - h);
    weight += w;
  }
  if (!(weight > 0.0)) throw UsageError("asi: marginal has no mass");
  return info / weight;
}

double asi_from_counts(std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw UsageError("asi: histogram is empty");
  std::vector<double> pmf(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    pmf[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  }
  return asi_from_pmf(pmf);
}

double asi(const SymmetrizedL& la) { return asi_from_counts(level_counts(la)); }

MetricsReport measure(const Constellation& c, const BitMatrix& bits, const LValues& l, bool with_gmi,
                      const GmiOptions& opts) {
  MetricsReport r;
  r.sample_count = l.rows() * l.cols();
  r.asi = asi(symmetrize(l, bits));
  r.ber_pre = ber_pre(bits, hard_decisions(l));
  if (r.ber_pre == 0.0) {
    r.q_ber_db = kInf;
  } else if (r.ber_pre >= 0.5) {
    r.q_ber_db = -kInf;
  } else {
    r.q_ber_db = q_from_ber(r.ber_pre).db;
  }
  if (with_gmi) {
    const auto g = gmi(bits, l, c, opts);
    r.gmi_bpcu = g.gmi_bpcu;
    r.s_opt = g.s_opt;
    r.s_at_boundary = g.boundary_max;
    r.ngmi = ngmi(g.gmi_bpcu, c.entropy(), c.bits_per_symbol());
  } else {
    r.gmi_bpcu = std::numeric_limits<double>::quiet_NaN();
    r.ngmi = std::numeric_limits<double>::quiet_NaN();
    r.s_opt = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace lvmon
