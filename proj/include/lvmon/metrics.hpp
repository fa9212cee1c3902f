#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lvmon/constellation.hpp"
#include "lvmon/demapper.hpp"
#include "lvmon/matrix.hpp"

namespace lvmon {

struct QFactor {
  double linear;
  double db;  // 20 log10(linear)
};

/// Q = sqrt(2) erfc^-1(2 BER). Throws DomainError unless 0 < ber < 0.5.
QFactor q_from_ber(double ber);

/// Fraction of positions where the two bit sequences differ.
double bit_error_rate(std::span<const std::uint8_t> sent, std::span<const std::uint8_t> decided);

/// Pre-FEC BER between transmitted bits and hard decisions on the L-values.
double ber_pre(const BitMatrix& bits, const BitMatrix& decisions);

/// Post-FEC BER on externally supplied (information bit, decoded bit) sequences.
double ber_post(std::span<const std::uint8_t> info, std::span<const std::uint8_t> decoded);

/// |mu0 - mu1| / (sigma0 + sigma1) with the true bit partition (population moments).
double statistical_q(std::span<const double> samples, std::span<const std::uint8_t> bits);

/// Same, with bits estimated by a zero threshold (sample >= 0 is one class).
double blind_statistical_q(std::span<const double> samples);

struct GmiOptions {
  double s_min = 0.01;
  double s_max = 5.0;
  double s_tolerance = 1e-4;
};

struct GmiResult {
  double gmi_bpcu = 0.0;
  double s_opt = 1.0;
  bool boundary_max = false;  // optimum sits on the edge of the search bracket
};

/// Monte-Carlo estimate of I_{q,s}(B;Y) in bits, using the bitwise demapper
/// metric q(y|b) = prod_i q_{B_i,Y}(b_i, y) / P_B(b) reconstructed from
/// per-bit L-values. `groups` factorizes the label prior P_B.
double gmi_at_scale(const BitMatrix& bits, const RealMatrix& llr, std::span<const LabelGroup> groups,
                    double s);

/// max_s I_{q,s} by golden-section search over [s_min, s_max].
GmiResult gmi(const BitMatrix& bits, const RealMatrix& llr, const Constellation& c,
              const GmiOptions& opts = {});
GmiResult gmi(const BitMatrix& bits, const LValues& l, const Constellation& c,
              const GmiOptions& opts = {});

/// 1 - (H(B) - GMI) / m.
double ngmi(double gmi_bpcu, double entropy_bpcu, int m);

/// Counts of symmetrized L-values per level of the alphabet (ascending).
std::vector<std::uint64_t> level_counts(const SymmetrizedL& la);

/// 1 - H(L_a | |L_a|) for a pmf over the full alphabet (n_bin entries, ascending).
double asi_from_pmf(std::span<const double> pmf);

/// As above, but weighting the conditional entropies by an externally given
/// marginal over the positive half of the alphabet (n_bin / 2 entries, ascending).
double asi_from_pmf(std::span<const double> pmf, std::span<const double> abs_marginal);

double asi_from_counts(std::span<const std::uint64_t> counts);
double asi(const SymmetrizedL& la);

/// Ground-truth metrics computed with knowledge of the transmitted bits.
struct MetricsReport {
  double gmi_bpcu = 0.0;
  double ngmi = 0.0;
  double asi = 0.0;
  double ber_pre = 0.0;
  double q_ber_db = 0.0;  // +inf when no bit errors were observed
  double s_opt = 1.0;
  bool s_at_boundary = false;
  std::size_t sample_count = 0;  // number of L-values
};

MetricsReport measure(const Constellation& c, const BitMatrix& bits, const LValues& l, bool with_gmi = true,
                      const GmiOptions& opts = {});

}  // namespace lvmon
