#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lvmon/demapper.hpp"

namespace lvmon {

/// Histogram of |L| over the positive half of the L-value alphabet, pooled
/// over tributaries. counts()[k] belongs to level first_positive() + k, so the
/// last entry is the overload bin at l_max.
class LHistogram {
 public:
  LHistogram(LQuantizer quantizer, std::vector<std::uint64_t> counts_abs);

  const LQuantizer& quantizer() const noexcept { return quantizer_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }

  /// Overload mass P_{|L_a|}(l_max).
  double rho() const noexcept;
  /// Relative frequencies over the positive levels.
  std::vector<double> pmf() const;

  LHistogram scaled(std::uint64_t factor) const;

 private:
  LQuantizer quantizer_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// |L| histogram pooled over all samples and tributaries.
LHistogram build_histogram(const LValues& l);
/// |L| histogram of a single tributary.
LHistogram build_histogram(const LValues& l, int tributary);

/// Rectangular (mu, sigma) grid: n_mu means evenly spaced over (0, mu_max]
/// and n_sigma deviations over (0, sigma_max], with mu_max = mu_span * l_max
/// and sigma_max = sigma_span * l_max. Candidate k = i_mu * n_sigma + i_sigma.
struct CandidateGrid {
  int n_mu = 128;
  int n_sigma = 64;
  double mu_span = 2.0;
  double sigma_span = 1.0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n_mu) * static_cast<std::size_t>(n_sigma);
  }
};

struct GaussianCandidate {
  double mu = 0.0;
  double sigma = 1.0;
  std::vector<double> pmf_t;    // over the full alphabet, ascending; pmf_t.back() == rho
  std::vector<double> abs_pmf;  // over the positive levels, ascending
};

/// Discretized Gaussians before overload pinning: for each candidate, the
/// cell masses of levels -l_max .. l_max - delta_l (the lowest cell takes the
/// whole left tail), normalized to sum to one. Independent of rho, so one set
/// serves every histogram with the same quantizer.
class CandidateShapes {
 public:
  CandidateShapes(const LQuantizer& quantizer, const CandidateGrid& grid);

  const LQuantizer& quantizer() const noexcept { return quantizer_; }
  std::size_t size() const noexcept { return mu_.size(); }
  double mu(std::size_t k) const { return mu_[k]; }
  double sigma(std::size_t k) const { return sigma_[k]; }
  std::span<const double> shape(std::size_t k) const;

  /// Explicit (mu, sigma) list instead of a grid.
  CandidateShapes(const LQuantizer& quantizer, std::span<const std::pair<double, double>> mu_sigma);

 private:
  void add(double mu, double sigma);

  LQuantizer quantizer_;
  std::vector<double> mu_;
  std::vector<double> sigma_;
  std::vector<double> shapes_;  // size() x (n_bin - 1)
};

/// Discretized, truncated candidates with P(l_max) pinned to rho.
/// Throws DomainError for rho outside [0, 1).
std::vector<GaussianCandidate> candidate_bank(const CandidateShapes& shapes, double rho);
std::vector<GaussianCandidate> candidate_bank(const LQuantizer& quantizer, const CandidateGrid& grid, double rho);

struct FitResult {
  std::size_t k_hat = 0;
  double residual = 0.0;
};

/// Exhaustive least-squares match of the |L| pmf against every candidate's
/// |G| pmf; ties go to the lowest index.
FitResult fit(const LHistogram& hist, std::span<const GaussianCandidate> bank);

/// ASI of the fitted candidate pmf. With use_measured_marginal the measured
/// |L| pmf weights the conditional entropies instead of the candidate's own.
double blind_asi(const LHistogram& hist, const GaussianCandidate& fitted, bool use_measured_marginal = false);

struct BlindQ {
  double linear = 0.0;
  double db = 0.0;
  bool valid = false;
};

/// Q-factor by-product of the fit: BER_Gauss = erfc(mu / (sqrt(2) sigma)) / 2,
/// Q = sqrt(2) erfc^-1(2 (1 - rho) BER_Gauss). Without the overload
/// correction the (1 - rho) factor is dropped. Invalid when mu <= 0 or the
/// erfc^-1 argument leaves (0, 1).
BlindQ blind_q(const GaussianCandidate& fitted, double rho, bool overload_correction = true);

struct BlindOptions {
  CandidateGrid grid;
  bool use_measured_marginal = false;
  bool overload_correction = true;
};

struct BlindEstimate {
  double asi_hat = 0.0;
  double q_hat_db = 0.0;
  bool q_valid = false;
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
  double rho = 0.0;
  double fit_residual = 0.0;
  std::size_t k_hat = 0;
  bool saturated = false;  // every sample in the overload bin; no fit performed
};

/// Blind ASI/Q estimation with a candidate set cached for one quantizer.
/// Immutable after construction; estimate() may be called concurrently.
class BlindEstimator {
 public:
  explicit BlindEstimator(const LQuantizer& quantizer, BlindOptions opts = {});

  const BlindOptions& options() const noexcept { return opts_; }
  const CandidateShapes& shapes() const noexcept { return shapes_; }

  BlindEstimate estimate(const LHistogram& hist) const;

  /// Estimates every tributary separately and averages the ASI and Q (dB).
  BlindEstimate estimate_per_tributary(const LValues& l) const;

 private:
  BlindOptions opts_;
  CandidateShapes shapes_;
};

BlindEstimate estimate(const LHistogram& hist, const BlindOptions& opts = {});

}  // namespace lvmon
