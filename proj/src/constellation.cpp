#include "lvmon/constellation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "lvmon/errors.hpp"

namespace lvmon {

namespace {

constexpr int kMaxBisectionIterations = 200;
constexpr double kEntropyTolerance = 1e-6;

std::vector<double> maxwell_boltzmann_axis(std::span<const double> levels, double lambda) {
  // Shift the exponent by the smallest squared level so large lambda cannot underflow.
  double min_sq = levels[0] * levels[0];
  for (double a : levels) min_sq = std::min(min_sq, a * a);
  std::vector<double> p(levels.size());
  double total = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    p[k] = std::exp(-lambda * (levels[k] * levels[k] - min_sq));
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> integer_axis_levels(int axis_bits) {
  const int n = 1 << axis_bits;
  std::vector<double> levels(n);
  for (int k = 0; k < n; ++k) levels[k] = 2.0 * k - (n - 1);
  return levels;
}

void check_square_order(int m) {
  if (m != 2 && m != 4 && m != 6 && m != 8) {
    throw ConfigError("unsupported square QAM order: m = " + std::to_string(m) +
                      " (expected 2, 4, 6 or 8)");
  }
}

}  // namespace

double entropy_bits(std::span<const double> pmf) {
  double h = 0.0;
  for (double p : pmf) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

Constellation Constellation::uniform_qam(int m) {
  check_square_order(m);
  const std::size_t n = std::size_t{1} << (m / 2);
  return square_from_axis(m, std::vector<double>(n, 1.0 / static_cast<double>(n)), 0.0);
}

Constellation Constellation::ps_qam(int m, double target_entropy) {
  check_square_order(m);
  if (!(target_entropy > 2.0 && target_entropy <= m)) {
    throw ConfigError("target entropy " + std::to_string(target_entropy) +
                      " bpcu outside (2, " + std::to_string(m) + "]");
  }
  const auto levels = integer_axis_levels(m / 2);
  if (target_entropy == static_cast<double>(m)) {
    return square_from_axis(m, maxwell_boltzmann_axis(levels, 0.0), 0.0);
  }

  auto entropy_at = [&](double lambda) {
    return 2.0 * entropy_bits(maxwell_boltzmann_axis(levels, lambda));
  };

  // Entropy falls monotonically from m (lambda = 0) towards 2 (lambda -> inf).
  double lo = 0.0;
  double hi = 1e-3;
  while (entropy_at(hi) > target_entropy) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericError("cannot bracket Maxwell-Boltzmann rate");
  }
  double lambda = 0.5 * (lo + hi);
  double h = entropy_at(lambda);
  for (int it = 0; it < kMaxBisectionIterations; ++it) {
    lambda = 0.5 * (lo + hi);
    h = entropy_at(lambda);
    if (h > target_entropy) {
      lo = lambda;
    } else {
      hi = lambda;
    }
    if (std::abs(h - target_entropy) < 1e-13 || hi - lo <= 1e-15 * hi) break;
  }
  if (std::abs(h - target_entropy) > kEntropyTolerance) {
    throw NumericError("Maxwell-Boltzmann bisection did not reach the target entropy");
  }
  return square_from_axis(m, maxwell_boltzmann_axis(levels, lambda), lambda);
}

Constellation Constellation::square_from_axis(int m, std::vector<double> axis_pmf, double lambda) {
  const int axis_bits = m / 2;
  const std::size_t n_axis = std::size_t{1} << axis_bits;
  const auto levels = integer_axis_levels(axis_bits);

  Constellation c;
  c.m_ = m;
  c.lambda_ = lambda;
  c.axis_pmf_ = std::move(axis_pmf);
  c.axis_labels_.resize(n_axis);
  for (std::size_t k = 0; k < n_axis; ++k) c.axis_labels_[k] = static_cast<std::uint32_t>(k ^ (k >> 1));

  double axis_energy = 0.0;
  for (std::size_t k = 0; k < n_axis; ++k) axis_energy += c.axis_pmf_[k] * levels[k] * levels[k];
  const double scale = 1.0 / std::sqrt(2.0 * axis_energy);
  c.axis_levels_.resize(n_axis);
  for (std::size_t k = 0; k < n_axis; ++k) c.axis_levels_[k] = levels[k] * scale;

  c.points_.reserve(n_axis * n_axis);
  c.labels_.reserve(n_axis * n_axis);
  c.pmf_.reserve(n_axis * n_axis);
  for (std::size_t i = 0; i < n_axis; ++i) {
    for (std::size_t q = 0; q < n_axis; ++q) {
      c.points_.emplace_back(c.axis_levels_[i], c.axis_levels_[q]);
      c.labels_.push_back((c.axis_labels_[i] << axis_bits) | c.axis_labels_[q]);
      c.pmf_.push_back(c.axis_pmf_[i] * c.axis_pmf_[q]);
    }
  }

  std::vector<double> group_pmf(n_axis);
  for (std::size_t k = 0; k < n_axis; ++k) group_pmf[c.axis_labels_[k]] = c.axis_pmf_[k];
  c.groups_ = {LabelGroup{0, axis_bits, group_pmf}, LabelGroup{axis_bits, axis_bits, group_pmf}};
  c.finalize();
  return c;
}

Constellation Constellation::custom(std::vector<cdouble> points, std::vector<std::uint32_t> labels,
                                    std::vector<double> pmf) {
  const std::size_t n = points.size();
  if (n < 2 || !std::has_single_bit(n)) {
    throw ConfigError("constellation size must be a power of two >= 2");
  }
  if (labels.size() != n || pmf.size() != n) {
    throw ConfigError("points, labels and pmf must have equal length");
  }
  const int m = std::countr_zero(n);
  std::vector<bool> seen(n, false);
  for (auto l : labels) {
    if (l >= n || seen[l]) throw ConfigError("labels are not a bijection onto {0,1}^m");
    seen[l] = true;
  }
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("pmf entries must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("pmf must sum to 1");
  for (double& p : pmf) p /= total;

  Constellation c;
  c.m_ = m;
  c.points_ = std::move(points);
  c.labels_ = std::move(labels);
  c.pmf_ = std::move(pmf);
  std::vector<double> group_pmf(n);
  for (std::size_t k = 0; k < n; ++k) group_pmf[c.labels_[k]] = c.pmf_[k];
  c.groups_ = {LabelGroup{0, m, std::move(group_pmf)}};
  c.finalize();
  return c.normalized();
}

void Constellation::finalize() {
  index_of_label_.assign(points_.size(), 0);
  for (std::size_t k = 0; k < labels_.size(); ++k) index_of_label_[labels_[k]] = k;
  entropy_ = entropy_bits(pmf_);
}

double Constellation::bit_prior_zero(int tributary) const {
  if (tributary < 0 || tributary >= m_) throw UsageError("tributary index out of range");
  double p0 = 0.0;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (bit(k, tributary) == 0) p0 += pmf_[k];
  }
  return p0;
}

double Constellation::average_energy() const {
  double e = 0.0;
  for (std::size_t k = 0; k < points_.size(); ++k) e += pmf_[k] * std::norm(points_[k]);
  return e;
}

double Constellation::max_coordinate() const {
  double v = 0.0;
  for (const auto& x : points_) v = std::max({v, std::abs(x.real()), std::abs(x.imag())});
  return v;
}

Constellation Constellation::normalized() const {
  Constellation out = *this;
  const double g = 1.0 / std::sqrt(average_energy());
  for (auto& x : out.points_) x *= g;
  for (auto& a : out.axis_levels_) a *= g;
  return out;
}

SymbolBatch sample_symbols(const Constellation& c, std::size_t n_sym, Rng& rng) {
  if (n_sym == 0) throw UsageError("sample_symbols: n_sym must be >= 1");
  const int m = c.bits_per_symbol();
  std::discrete_distribution<std::size_t> dist(c.pmf().begin(), c.pmf().end());
  SymbolBatch batch;
  batch.indices.resize(n_sym);
  batch.symbols.resize(n_sym);
  batch.bits = BitMatrix(n_sym, static_cast<std::size_t>(m));
  for (std::size_t n = 0; n < n_sym; ++n) {
    const std::size_t k = dist(rng);
    batch.indices[n] = k;
    batch.symbols[n] = c.points()[k];
    for (int i = 0; i < m; ++i) batch.bits(n, static_cast<std::size_t>(i)) = static_cast<std::uint8_t>(c.bit(k, i));
  }
  return batch;
}

SymbolBatch sample_symbols(const Constellation& c, std::size_t n_sym, std::uint64_t seed) {
  Rng rng(seed);
  return sample_symbols(c, n_sym, rng);
}

}  // namespace lvmon
