#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lvmon/constellation.hpp"
#include "lvmon/matrix.hpp"

namespace lvmon {

/// Uniform mid-rise quantizer onto the L-value alphabet
/// {-l_max, -l_max + delta_l, ..., l_max}, l_max = (n_bin - 1) * delta_l / 2.
///
/// Levels are addressed by index 0..n_bin-1 in ascending order. n_bin must be
/// even, so zero is never a level and level n_bin-1-k is the negation of level k.
class LQuantizer {
 public:
  static constexpr double kDefaultLMax = 13.0;

  LQuantizer(int n_bin, double delta_l);
  static LQuantizer with_l_max(int n_bin, double l_max = kDefaultLMax);

  int n_bin() const noexcept { return n_bin_; }
  double delta_l() const noexcept { return delta_l_; }
  double l_max() const noexcept { return 0.5 * (n_bin_ - 1) * delta_l_; }

  double level(int index) const noexcept { return (index - 0.5 * (n_bin_ - 1)) * delta_l_; }

  /// Nearest level; exact midpoints go to the larger level; saturates at +-l_max.
  int index_of(double l) const noexcept;
  double quantize(double l) const noexcept { return level(index_of(l)); }

  static constexpr int negate(int index, int n_bin) noexcept { return n_bin - 1 - index; }
  int negate(int index) const noexcept { return negate(index, n_bin_); }

  /// Index of the first strictly positive level (n_bin / 2).
  int first_positive() const noexcept { return n_bin_ / 2; }

  bool operator==(const LQuantizer&) const = default;

 private:
  int n_bin_;
  double delta_l_;
};

/// Quantized L-values, stored as level indices (n_sym x m).
class LValues {
 public:
  using Index = std::uint16_t;

  LValues(LQuantizer quantizer, std::size_t n_sym, int m)
      : quantizer_(quantizer), index_(n_sym, static_cast<std::size_t>(m)) {}
  LValues(LQuantizer quantizer, Matrix<Index> index) : quantizer_(quantizer), index_(std::move(index)) {}

  const LQuantizer& quantizer() const noexcept { return quantizer_; }
  std::size_t rows() const noexcept { return index_.rows(); }
  std::size_t cols() const noexcept { return index_.cols(); }

  Index index(std::size_t r, std::size_t c) const { return index_(r, c); }
  Index& index(std::size_t r, std::size_t c) { return index_(r, c); }
  double value(std::size_t r, std::size_t c) const { return quantizer_.level(index_(r, c)); }

  const Matrix<Index>& indices() const noexcept { return index_; }
  RealMatrix values() const;

 private:
  LQuantizer quantizer_;
  Matrix<Index> index_;
};

/// Symmetrized L-values (-1)^b L, pooled over all tributaries.
struct SymmetrizedL {
  LQuantizer quantizer;
  std::vector<LValues::Index> index;
};

struct DemapperConfig {
  double aux_snr_db = 10.0;
  int y_quant_levels = 1024;
  LQuantizer quantizer = LQuantizer::with_l_max(256);
};

/// Bitwise log-MAP demapper for a Gaussian auxiliary channel
/// q(y|x) ~ exp(-|y - x|^2 / N0_aux), N0_aux = 10^(-aux_snr_db / 10).
///
/// Received samples are first clipped and quantized per dimension to
/// y_quant_levels mid-rise levels spanning +-max(1.5 a, a + 5 sigma_aux), with
/// a the largest constellation coordinate and sigma_aux the per-dimension noise
/// deviation of the auxiliary channel. For square QAM the L-value of each tributary depends only on
/// its own axis, so demapping reduces to per-axis table lookups.
class Demapper {
 public:
  Demapper(const Constellation& c, DemapperConfig cfg);

  const DemapperConfig& config() const noexcept { return cfg_; }
  double n0_aux() const noexcept { return n0_aux_; }

  /// Quantized L-values for a block of received samples.
  LValues demap(std::span<const cdouble> y) const;

  /// Unquantized L-values of one received sample (y is used as given, no
  /// input quantization), by full summation over all constellation points.
  void exact_llr(cdouble y, std::span<double> out) const;
  RealMatrix exact_llr(std::span<const cdouble> y) const;

  /// Position of the y-grid level nearest to v (after clipping).
  double quantize_y(double v) const noexcept;

 private:
  int grid_index(double v) const noexcept;

  Constellation constellation_;
  DemapperConfig cfg_;
  double n0_aux_;
  double y_range_;
  double y_step_;
  int axis_bits_ = 0;
  // axis_table_[g * axis_bits_ + j]: quantized L index of axis bit j at y-grid level g.
  std::vector<LValues::Index> axis_table_;
};

/// Per-sample sign flip by the transmitted bit, flattened row-major.
SymmetrizedL symmetrize(const LValues& l, const BitMatrix& bits);

/// Hard decisions: bit 0 where L > 0.
BitMatrix hard_decisions(const LValues& l);

}  // namespace lvmon
