#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "lvmon/matrix.hpp"
#include "lvmon/rng.hpp"

namespace lvmon {

using cdouble = std::complex<double>;

/// Independent group of label bits with its own pmf over the 2^width patterns.
/// A product-form symbol prior splits into one group per dimension.
struct LabelGroup {
  int first_bit = 0;           // tributary index (0-based) of the group's first bit
  int width = 0;               // number of consecutive tributaries in the group
  std::vector<double> pmf;     // indexed by the group's bit pattern, MSB = first_bit
};

/// Square QAM (or arbitrary point set) with a bit labeling and a symbol prior.
///
/// Tributaries are numbered 0..m-1; tributary i is bit (m-1-i) of a label.
/// For square QAM the first m/2 tributaries belong to the in-phase axis and
/// the rest to the quadrature axis; on each axis the first bit is the sign
/// bit and the remaining bits select the amplitude (binary-reflected Gray).
class Constellation {
 public:
  /// Gray-labeled square QAM with a uniform prior. m in {2, 4, 6, 8}.
  static Constellation uniform_qam(int m);

  /// Square QAM with an i.i.d. Maxwell-Boltzmann prior P(x) ~ exp(-lambda |x|^2),
  /// lambda solved by bisection so that the symbol entropy equals target_entropy.
  static Constellation ps_qam(int m, double target_entropy);

  /// Arbitrary constellation. Points are normalized to unit energy under the pmf.
  /// Throws ConfigError unless labels form a bijection onto {0,1}^m and the pmf is valid.
  static Constellation custom(std::vector<cdouble> points, std::vector<std::uint32_t> labels,
                              std::vector<double> pmf);

  int bits_per_symbol() const noexcept { return m_; }
  std::size_t size() const noexcept { return points_.size(); }

  std::span<const cdouble> points() const noexcept { return points_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::span<const double> pmf() const noexcept { return pmf_; }

  std::uint32_t label(std::size_t index) const { return labels_[index]; }
  int bit(std::size_t index, int tributary) const {
    return static_cast<int>((labels_[index] >> (m_ - 1 - tributary)) & 1U);
  }
  /// Point index carrying a given label.
  std::size_t index_of_label(std::uint32_t label) const { return index_of_label_[label]; }

  /// Symbol entropy H(B) in bits per channel use.
  double entropy() const noexcept { return entropy_; }

  /// Maxwell-Boltzmann rate for unit-spaced integer amplitudes (0 for uniform).
  double shaping_rate() const noexcept { return lambda_; }

  /// Exact P_{B_i}(0) for tributary i (0-based).
  double bit_prior_zero(int tributary) const;

  double average_energy() const;
  double max_coordinate() const;

  /// Square QAM only: the per-axis amplitude levels, their pmf and their
  /// per-axis labels (m/2 bits). Empty for custom constellations.
  bool is_square() const noexcept { return !axis_levels_.empty(); }
  std::span<const double> axis_levels() const noexcept { return axis_levels_; }
  std::span<const double> axis_pmf() const noexcept { return axis_pmf_; }
  std::span<const std::uint32_t> axis_labels() const noexcept { return axis_labels_; }

  /// Independent label groups whose pmfs multiply to the label prior.
  std::span<const LabelGroup> label_groups() const noexcept { return groups_; }

  /// Rescale so that sum_x P(x)|x|^2 = 1.
  Constellation normalized() const;

 private:
  Constellation() = default;
  static Constellation square_from_axis(int m, std::vector<double> axis_pmf, double lambda);
  void finalize();

  int m_ = 0;
  std::vector<cdouble> points_;
  std::vector<std::uint32_t> labels_;
  std::vector<std::size_t> index_of_label_;
  std::vector<double> pmf_;
  double entropy_ = 0.0;
  double lambda_ = 0.0;
  std::vector<double> axis_levels_;
  std::vector<double> axis_pmf_;
  std::vector<std::uint32_t> axis_labels_;
  std::vector<LabelGroup> groups_;
};

/// Transmitted symbols and their labels, as drawn from a constellation prior.
struct SymbolBatch {
  std::vector<std::size_t> indices;
  std::vector<cdouble> symbols;
  BitMatrix bits;  // n_sym x m
};

/// i.i.d. draws from the constellation prior.
SymbolBatch sample_symbols(const Constellation& c, std::size_t n_sym, Rng& rng);
SymbolBatch sample_symbols(const Constellation& c, std::size_t n_sym, std::uint64_t seed);

/// Shannon entropy of a pmf in bits.
double entropy_bits(std::span<const double> pmf);

}  // namespace lvmon
