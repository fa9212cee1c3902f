#include "lvmon/demapper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lvmon/errors.hpp"
#include "lvmon/numeric.hpp"

namespace lvmon {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kYRangeFactor = 1.5;
// Noise standard deviations (per dimension) kept inside the y grid beyond the outermost point.
constexpr double kYRangeSigmas = 5.0;
}  // namespace

LQuantizer::LQuantizer(int n_bin, double delta_l) : n_bin_(n_bin), delta_l_(delta_l) {
  if (n_bin < 2 || n_bin % 2 != 0 || n_bin > 65536) {
    throw ConfigError("n_bin must be an even number in [2, 65536], got " + std::to_string(n_bin));
  }
  if (!(delta_l > 0.0) || !std::isfinite(delta_l)) {
    throw ConfigError("delta_l must be positive and finite");
  }
}

LQuantizer LQuantizer::with_l_max(int n_bin, double l_max) {
  if (n_bin < 2) throw ConfigError("n_bin must be >= 2");
  return LQuantizer(n_bin, 2.0 * l_max / (n_bin - 1));
}

int LQuantizer::index_of(double l) const noexcept {
  // t is the fractional level index; l = 0 maps to the half-integer (n_bin - 1) / 2
  // exactly, so the midpoint tie-break toward +inf is deterministic.
  const double t = l / delta_l_ + 0.5 * (n_bin_ - 1);
  if (std::isnan(t)) return first_positive();
  if (t <= 0.0) return 0;
  if (t >= n_bin_ - 1) return n_bin_ - 1;
  return std::min(static_cast<int>(std::floor(t + 0.5)), n_bin_ - 1);
}

RealMatrix LValues::values() const {
  RealMatrix out(rows(), cols());
  auto src = index_.flat();
  auto dst = out.flat();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = quantizer_.level(src[k]);
  return out;
}

Demapper::Demapper(const Constellation& c, DemapperConfig cfg)
    : constellation_(c), cfg_(cfg), n0_aux_(std::pow(10.0, -cfg.aux_snr_db / 10.0)) {
  if (cfg_.y_quant_levels < 64 || cfg_.y_quant_levels > 1024) {
    throw ConfigError("y_quant_levels must be in [64, 1024], got " + std::to_string(cfg_.y_quant_levels));
  }
  if (!std::isfinite(cfg_.aux_snr_db)) throw ConfigError("aux_snr_db must be finite");
  for (int i = 0; i < c.bits_per_symbol(); ++i) {
    const double p0 = c.bit_prior_zero(i);
    if (!(p0 > 0.0 && p0 < 1.0)) {
      throw ConfigError("tributary " + std::to_string(i) + " has a degenerate bit prior");
    }
  }
  y_range_ = std::max(kYRangeFactor * c.max_coordinate(),
                      c.max_coordinate() + kYRangeSigmas * std::sqrt(n0_aux_ / 2.0));
  y_step_ = 2.0 * y_range_ / cfg_.y_quant_levels;

  if (!c.is_square()) return;

  axis_bits_ = c.bits_per_symbol() / 2;
  const auto levels = c.axis_levels();
  const auto pmf = c.axis_pmf();
  const auto labels = c.axis_labels();
  const std::size_t n_axis = levels.size();
  const auto& q = cfg_.quantizer;

  axis_table_.resize(static_cast<std::size_t>(cfg_.y_quant_levels) * axis_bits_);
  std::vector<double> zero_terms;
  std::vector<double> one_terms;
  for (int g = 0; g < cfg_.y_quant_levels; ++g) {
    const double v = -y_range_ + (g + 0.5) * y_step_;
    for (int j = 0; j < axis_bits_; ++j) {
      zero_terms.clear();
      one_terms.clear();
      for (std::size_t k = 0; k < n_axis; ++k) {
        if (pmf[k] <= 0.0) continue;
        const double d = v - levels[k];
        const double term = std::log(pmf[k]) - d * d / n0_aux_;
        const int b = static_cast<int>((labels[k] >> (axis_bits_ - 1 - j)) & 1U);
        (b == 0 ? zero_terms : one_terms).push_back(term);
      }
      const double llr = numeric::log_sum_exp(zero_terms) - numeric::log_sum_exp(one_terms);
      axis_table_[static_cast<std::size_t>(g) * axis_bits_ + j] =
          static_cast<LValues::Index>(q.index_of(llr));
    }
  }
}

int Demapper::grid_index(double v) const noexcept {
  const double t = std::floor((v + y_range_) / y_step_);
  if (!(t >= 0.0)) return 0;
  if (t >= cfg_.y_quant_levels) return cfg_.y_quant_levels - 1;
  return static_cast<int>(t);
}

double Demapper::quantize_y(double v) const noexcept {
  return -y_range_ + (grid_index(v) + 0.5) * y_step_;
}

void Demapper::exact_llr(cdouble y, std::span<double> out) const {
  const int m = constellation_.bits_per_symbol();
  const auto points = constellation_.points();
  const auto pmf = constellation_.pmf();
  std::vector<double> metric(points.size(), kNegInf);
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (pmf[k] > 0.0) metric[k] = std::log(pmf[k]) - std::norm(y - points[k]) / n0_aux_;
  }
  std::vector<double> zero_terms;
  std::vector<double> one_terms;
  for (int i = 0; i < m; ++i) {
    zero_terms.clear();
    one_terms.clear();
    for (std::size_t k = 0; k < points.size(); ++k) {
      (constellation_.bit(k, i) == 0 ? zero_terms : one_terms).push_back(metric[k]);
    }
    out[static_cast<std::size_t>(i)] = numeric::log_sum_exp(zero_terms) - numeric::log_sum_exp(one_terms);
  }
}

RealMatrix Demapper::exact_llr(std::span<const cdouble> y) const {
  RealMatrix out(y.size(), static_cast<std::size_t>(constellation_.bits_per_symbol()));
  for (std::size_t n = 0; n < y.size(); ++n) exact_llr(y[n], out.row(n));
  return out;
}

LValues Demapper::demap(std::span<const cdouble> y) const {
  const int m = constellation_.bits_per_symbol();
  LValues out(cfg_.quantizer, y.size(), m);
  if (constellation_.is_square()) {
    for (std::size_t n = 0; n < y.size(); ++n) {
      const auto gi = static_cast<std::size_t>(grid_index(y[n].real())) * axis_bits_;
      const auto gq = static_cast<std::size_t>(grid_index(y[n].imag())) * axis_bits_;
      for (int j = 0; j < axis_bits_; ++j) {
        out.index(n, static_cast<std::size_t>(j)) = axis_table_[gi + j];
        out.index(n, static_cast<std::size_t>(axis_bits_ + j)) = axis_table_[gq + j];
      }
    }
    return out;
  }
  std::vector<double> llr(static_cast<std::size_t>(m));
  for (std::size_t n = 0; n < y.size(); ++n) {
    exact_llr(cdouble(quantize_y(y[n].real()), quantize_y(y[n].imag())), llr);
    for (int i = 0; i < m; ++i) {
      out.index(n, static_cast<std::size_t>(i)) =
          static_cast<LValues::Index>(cfg_.quantizer.index_of(llr[static_cast<std::size_t>(i)]));
    }
  }
  return out;
}

SymmetrizedL symmetrize(const LValues& l, const BitMatrix& bits) {
  if (l.rows() != bits.rows() || l.cols() != bits.cols()) {
    throw UsageError("symmetrize: L-value and bit matrices differ in shape");
  }
  SymmetrizedL out{l.quantizer(), {}};
  out.index.resize(l.rows() * l.cols());
  const auto src = l.indices().flat();
  const auto b = bits.flat();
  const int n_bin = l.quantizer().n_bin();
  for (std::size_t k = 0; k < src.size(); ++k) {
    out.index[k] = b[k] ? static_cast<LValues::Index>(LQuantizer::negate(src[k], n_bin)) : src[k];
  }
  return out;
}

BitMatrix hard_decisions(const LValues& l) {
  BitMatrix out(l.rows(), l.cols());
  const auto src = l.indices().flat();
  auto dst = out.flat();
  const int pos = l.quantizer().first_positive();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] >= pos ? 0 : 1;
  return out;
}

}  // namespace lvmon
