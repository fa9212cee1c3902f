#include "lvmon/blind.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lvmon/errors.hpp"
#include "lvmon/metrics.hpp"
#include "lvmon/numeric.hpp"

namespace lvmon {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

LHistogram::LHistogram(LQuantizer quantizer, std::vector<std::uint64_t> counts_abs)
    : quantizer_(quantizer), counts_(std::move(counts_abs)) {
  if (counts_.size() != static_cast<std::size_t>(quantizer_.n_bin() / 2)) {
    throw UsageError("histogram must have n_bin / 2 = " + std::to_string(quantizer_.n_bin() / 2) +
                     " bins, got " + std::to_string(counts_.size()));
  }
  for (auto c : counts_) total_ += c;
  if (total_ == 0) throw UsageError("histogram is empty");
}

double LHistogram::rho() const noexcept {
  return static_cast<double>(counts_.back()) / static_cast<double>(total_);
}

std::vector<double> LHistogram::pmf() const {
  std::vector<double> p(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    p[k] = static_cast<double>(counts_[k]) / static_cast<double>(total_);
  }
  return p;
}

LHistogram LHistogram::scaled(std::uint64_t factor) const {
  if (factor == 0) throw UsageError("histogram scale factor must be positive");
  auto c = counts_;
  for (auto& v : c) v *= factor;
  return LHistogram(quantizer_, std::move(c));
}

namespace {

std::vector<std::uint64_t> abs_counts(const LValues& l, int first_col, int last_col) {
  if (l.rows() == 0 || l.cols() == 0) throw UsageError("build_histogram: no L-values");
  const int n_bin = l.quantizer().n_bin();
  const int pos = l.quantizer().first_positive();
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n_bin / 2), 0);
  for (std::size_t r = 0; r < l.rows(); ++r) {
    for (int c = first_col; c < last_col; ++c) {
      const int idx = l.index(r, static_cast<std::size_t>(c));
      const int abs_idx = idx >= pos ? idx : LQuantizer::negate(idx, n_bin);
      ++counts[static_cast<std::size_t>(abs_idx - pos)];
    }
  }
  return counts;
}

}  // namespace

LHistogram build_histogram(const LValues& l) {
  return LHistogram(l.quantizer(), abs_counts(l, 0, static_cast<int>(l.cols())));
}

LHistogram build_histogram(const LValues& l, int tributary) {
  if (tributary < 0 || static_cast<std::size_t>(tributary) >= l.cols()) {
    throw UsageError("build_histogram: tributary out of range");
  }
  return LHistogram(l.quantizer(), abs_counts(l, tributary, tributary + 1));
}

CandidateShapes::CandidateShapes(const LQuantizer& quantizer, const CandidateGrid& grid) : quantizer_(quantizer) {
  if (grid.n_mu < 1 || grid.n_sigma < 1) throw ConfigError("candidate grid must have K >= 1");
  if (!(grid.mu_span > 0.0) || !(grid.sigma_span > 0.0)) throw ConfigError("candidate grid spans must be positive");
  const double mu_max = grid.mu_span * quantizer.l_max();
  const double sigma_max = grid.sigma_span * quantizer.l_max();
  shapes_.reserve(grid.size() * static_cast<std::size_t>(quantizer.n_bin() - 1));
  for (int i = 0; i < grid.n_mu; ++i) {
    for (int j = 0; j < grid.n_sigma; ++j) {
      add((i + 1) * mu_max / grid.n_mu, (j + 1) * sigma_max / grid.n_sigma);
    }
  }
}

CandidateShapes::CandidateShapes(const LQuantizer& quantizer, std::span<const std::pair<double, double>> mu_sigma)
    : quantizer_(quantizer) {
  if (mu_sigma.empty()) throw ConfigError("candidate list must have K >= 1");
  for (const auto& [mu, sigma] : mu_sigma) {
    if (!(sigma > 0.0)) throw ConfigError("candidate sigma must be positive");
    add(mu, sigma);
  }
}

void CandidateShapes::add(double mu, double sigma) {
  const int n = quantizer_.n_bin();
  const double half = 0.5 * quantizer_.delta_l();
  std::vector<double> log_mass(static_cast<std::size_t>(n - 1));
  for (int idx = 0; idx < n - 1; ++idx) {
    const double l = quantizer_.level(idx);
    const double lo = idx == 0 ? -kInf : (l - half - mu) / sigma;
    const double hi = (l + half - mu) / sigma;
    log_mass[static_cast<std::size_t>(idx)] = numeric::log_normal_interval(lo, hi);
  }
  const double norm = numeric::log_sum_exp(log_mass);
  if (!std::isfinite(norm)) throw NumericError("candidate discretization underflowed");
  for (double lm : log_mass) shapes_.push_back(std::exp(lm - norm));
  mu_.push_back(mu);
  sigma_.push_back(sigma);
}

std::span<const double> CandidateShapes::shape(std::size_t k) const {
  const auto w = static_cast<std::size_t>(quantizer_.n_bin() - 1);
  return {shapes_.data() + k * w, w};
}

std::vector<GaussianCandidate> candidate_bank(const CandidateShapes& shapes, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw DomainError("overload mass rho = " + std::to_string(rho) + " leaves no room for a candidate");
  }
  const auto& q = shapes.quantizer();
  const int n = q.n_bin();
  const int pos = q.first_positive();
  std::vector<GaussianCandidate> bank(shapes.size());
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    auto& c = bank[k];
    c.mu = shapes.mu(k);
    c.sigma = shapes.sigma(k);
    const auto s = shapes.shape(k);
    c.pmf_t.resize(static_cast<std::size_t>(n));
    for (int idx = 0; idx < n - 1; ++idx) c.pmf_t[static_cast<std::size_t>(idx)] = (1.0 - rho) * s[static_cast<std::size_t>(idx)];
    c.pmf_t.back() = rho;
    c.abs_pmf.resize(static_cast<std::size_t>(n / 2));
    for (int idx = pos; idx < n; ++idx) {
      c.abs_pmf[static_cast<std::size_t>(idx - pos)] =
          c.pmf_t[static_cast<std::size_t>(idx)] + c.pmf_t[static_cast<std::size_t>(LQuantizer::negate(idx, n))];
    }
  }
  return bank;
}

std::vector<GaussianCandidate> candidate_bank(const LQuantizer& quantizer, const CandidateGrid& grid, double rho) {
  return candidate_bank(CandidateShapes(quantizer, grid), rho);
}

FitResult fit(const LHistogram& hist, std::span<const GaussianCandidate> bank) {
  if (bank.empty()) throw UsageError("fit: empty candidate bank");
  const auto target = hist.pmf();
  FitResult best{0, kInf};
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const auto& a = bank[k].abs_pmf;
    if (a.size() != target.size()) throw UsageError("fit: candidate and histogram alphabets differ");
    double r = 0.0;
    for (std::size_t j = 0; j < target.size(); ++j) {
      const double d = target[j] - a[j];
      r += d * d;
    }
    if (r < best.residual) best = {k, r};
  }
  return best;
}

double blind_asi(const LHistogram& hist, const GaussianCandidate& fitted, bool use_measured_marginal) {
  if (use_measured_marginal) return asi_from_pmf(fitted.pmf_t, hist.pmf());
  return asi_from_pmf(fitted.pmf_t);
}

BlindQ blind_q(const GaussianCandidate& fitted, double rho, bool overload_correction) {
  BlindQ q;
  if (!(fitted.mu > 0.0) || !(fitted.sigma > 0.0)) return q;
  const double ber_gauss = 0.5 * std::erfc(fitted.mu / (std::numbers::sqrt2 * fitted.sigma));
  const double arg = 2.0 * (overload_correction ? (1.0 - rho) : 1.0) * ber_gauss;
  if (!(arg > 0.0 && arg < 1.0)) return q;
  q.linear = std::numbers::sqrt2 * numeric::erfc_inv(arg);
  q.db = 20.0 * std::log10(q.linear);
  q.valid = true;
  return q;
}

BlindEstimator::BlindEstimator(const LQuantizer& quantizer, BlindOptions opts)
    : opts_(opts), shapes_(quantizer, opts.grid) {}

BlindEstimate BlindEstimator::estimate(const LHistogram& hist) const {
  if (!(hist.quantizer() == shapes_.quantizer())) {
    throw UsageError("histogram quantizer differs from the estimator's");
  }
  BlindEstimate e;
  e.rho = hist.rho();
  if (hist.counts().back() == hist.total()) {
    // The pinned overload bin carries all mass, which fixes the pmf regardless of candidate.
    e.saturated = true;
    e.asi_hat = 1.0;
    return e;
  }
  const auto bank = candidate_bank(shapes_, e.rho);
  const auto f = fit(hist, bank);
  const auto& c = bank[f.k_hat];
  e.k_hat = f.k_hat;
  e.fit_residual = f.residual;
  e.mu_hat = c.mu;
  e.sigma_hat = c.sigma;
  e.asi_hat = blind_asi(hist, c, opts_.use_measured_marginal);
  const auto q = blind_q(c, e.rho, opts_.overload_correction);
  e.q_valid = q.valid;
  e.q_hat_db = q.valid ? q.db : std::numeric_limits<double>::quiet_NaN();
  return e;
}

BlindEstimate BlindEstimator::estimate_per_tributary(const LValues& l) const {
  BlindEstimate avg;
  const auto m = static_cast<int>(l.cols());
  int q_count = 0;
  double q_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto e = estimate(build_histogram(l, i));
    avg.asi_hat += e.asi_hat / m;
    avg.rho += e.rho / m;
    avg.mu_hat += e.mu_hat / m;
    avg.sigma_hat += e.sigma_hat / m;
    avg.fit_residual += e.fit_residual / m;
    if (e.q_valid) {
      q_sum += e.q_hat_db;
      ++q_count;
    }
  }
  avg.q_valid = q_count == m;
  avg.q_hat_db = avg.q_valid ? q_sum / m : std::numeric_limits<double>::quiet_NaN();
  return avg;
}

BlindEstimate estimate(const LHistogram& hist, const BlindOptions& opts) {
  return BlindEstimator(hist.quantizer(), opts).estimate(hist);
}

}  // namespace lvmon
