#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lvmon/channel.hpp"
#include "lvmon/demapper.hpp"
#include "lvmon/errors.hpp"
#include "lvmon/metrics.hpp"

using namespace lvmon;

TEST_SUITE("demapper") {

TEST_CASE("mid-rise alphabet") {
  const LQuantizer q(8, 0.5);
  CHECK(q.l_max() == doctest::Approx(1.75));
  for (int k = 0; k < 8; ++k) {
    CHECK(q.level(k) != 0.0);
    CHECK(q.level(q.negate(k)) == -q.level(k));
  }
  CHECK(q.level(0) == -1.75);
  CHECK(q.level(7) == 1.75);
  CHECK(q.first_positive() == 4);
  CHECK(q.level(4) == 0.25);
  CHECK_THROWS_AS(LQuantizer(7, 0.5), ConfigError);
  CHECK_THROWS_AS(LQuantizer(8, 0.0), ConfigError);
  CHECK_THROWS_AS(LQuantizer::with_l_max(27, 13.0), ConfigError);
  CHECK(LQuantizer::with_l_max(256).delta_l() == doctest::Approx(26.0 / 255).epsilon(1e-15));
}

TEST_CASE("quantization rule") {
  const LQuantizer q(16, 0.5);
  const double dl = q.delta_l();
  CHECK(q.quantize(0.0) == dl / 2);  // tie toward +
  CHECK(q.quantize(1e6) == q.l_max());
  CHECK(q.quantize(-1e6) == -q.l_max());
  CHECK(q.quantize(0.3 * dl) == dl / 2);
  CHECK(q.quantize(-0.3 * dl) == -dl / 2);
  CHECK(q.quantize(dl) == 1.5 * dl);    // midpoint between dl/2 and 3dl/2
  CHECK(q.quantize(-dl) == -dl / 2);
  CHECK(q.quantize(0.99 * dl) == dl / 2);
  CHECK(q.quantize(q.l_max() + 0.3) == q.l_max());
}

TEST_CASE("configuration checks") {
  const auto c = Constellation::uniform_qam(4);
  DemapperConfig cfg;
  cfg.y_quant_levels = 32;
  CHECK_THROWS_AS(Demapper(c, cfg), ConfigError);
  cfg.y_quant_levels = 2048;
  CHECK_THROWS_AS(Demapper(c, cfg), ConfigError);
  cfg.y_quant_levels = 64;
  CHECK_NOTHROW(Demapper(c, cfg));
}

TEST_CASE("QPSK L-values follow the closed form") {
  const auto c = Constellation::uniform_qam(2);
  const double snr = 6.0, n0 = std::pow(10.0, -snr / 10.0);
  const Demapper d(c, DemapperConfig{snr, 1024, LQuantizer::with_l_max(256)});
  // Sign of the in-phase coordinate that carries bit value 0 on each tributary.
  double s0 = 0, s1 = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (c.bit(k, 0) == 0) s0 = c.points()[k].real() > 0 ? 1 : -1;
    if (c.bit(k, 1) == 0) s1 = c.points()[k].imag() > 0 ? 1 : -1;
  }
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<double> out(2);
  for (cdouble y : {cdouble{0.3, -0.2}, cdouble{-1.1, 0.05}, cdouble{0.0, 2.0}, cdouble{0.7071, 0.7071}}) {
    d.exact_llr(y, out);
    CHECK(out[0] == doctest::Approx(s0 * 4 * a * y.real() / n0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(s1 * 4 * a * y.imag() / n0).epsilon(1e-12));
  }
}

TEST_CASE("lookup-table demapping equals quantized exact sum") {
  for (auto c : {Constellation::ps_qam(6, 4.1), Constellation::uniform_qam(8), Constellation::ps_qam(4, 3.4)}) {
    const auto q = LQuantizer::with_l_max(64, 9.0);
    const Demapper d(c, DemapperConfig{9.0, 256, q});
    const auto tx = sample_symbols(c, 4000, 3);
    const auto y = transmit(tx.symbols, ChannelConfig{9.0, 4, false});
    const auto l = d.demap(y);
    std::vector<double> ex(c.bits_per_symbol());
    int mismatches = 0;
    for (std::size_t n = 0; n < y.size(); ++n) {
      d.exact_llr(cdouble{d.quantize_y(y[n].real()), d.quantize_y(y[n].imag())}, ex);
      for (int i = 0; i < c.bits_per_symbol(); ++i) {
        if (l.index(n, i) != q.index_of(ex[i])) ++mismatches;
      }
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("noiseless high-SNR symbols saturate with label signs") {
  const auto c = Constellation::uniform_qam(6);
  const auto q = LQuantizer::with_l_max(32);
  const Demapper d(c, DemapperConfig{30.0, 1024, q});
  const auto l = d.demap(c.points());
  for (std::size_t k = 0; k < c.size(); ++k) {
    for (int i = 0; i < 6; ++i) {
      CHECK(l.value(k, i) == (c.bit(k, i) == 0 ? q.l_max() : -q.l_max()));
    }
  }
}

TEST_CASE("symmetrize") {
  const LQuantizer q(8, 1.0);
  LValues l(q, 3, 2);
  l.index(0, 0) = 7; l.index(0, 1) = 2;
  l.index(1, 0) = 4; l.index(1, 1) = 0;
  l.index(2, 0) = 3; l.index(2, 1) = 5;
  BitMatrix zeros(3, 2, 0), ones(3, 2, 1);
  const auto a = symmetrize(l, zeros);
  const auto b = symmetrize(l, ones);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(a.index[k] == l.indices().flat()[k]);
    CHECK(b.index[k] == q.negate(l.indices().flat()[k]));
  }
  BitMatrix one_flip = zeros;
  one_flip(1, 1) = 1;
  const auto c = symmetrize(l, one_flip);
  for (std::size_t k = 0; k < 6; ++k) CHECK(c.index[k] == (k == 3 ? q.negate(a.index[k]) : a.index[k]));
  CHECK_THROWS_AS(symmetrize(l, BitMatrix(3, 3, 0)), UsageError);
}

TEST_CASE("hard decisions use the sign") {
  const LQuantizer q(4, 1.0);
  LValues l(q, 1, 4);
  for (int i = 0; i < 4; ++i) l.index(0, i) = static_cast<LValues::Index>(i);
  const auto h = hard_decisions(l);
  CHECK(h(0, 0) == 1);
  CHECK(h(0, 1) == 1);
  CHECK(h(0, 2) == 0);
  CHECK(h(0, 3) == 0);
}

TEST_CASE("L_a histogram is invariant under y -> -y for uniform QAM") {
  const auto c = Constellation::uniform_qam(4);
  const auto q = LQuantizer::with_l_max(64, 10.0);
  const Demapper d(c, DemapperConfig{10.0, 512, q});
  const auto tx = sample_symbols(c, 200'000, 11);
  auto y = transmit(tx.symbols, ChannelConfig{10.0, 12, false});
  const auto pos = level_counts(symmetrize(d.demap(y), tx.bits));
  // -x is a constellation point; its label supplies the bits for -y.
  BitMatrix nb(tx.bits.rows(), 4);
  for (std::size_t n = 0; n < y.size(); ++n) {
    y[n] = -y[n];
    std::size_t j = 0;
    while (std::abs(c.points()[j] + tx.symbols[n]) > 1e-9) ++j;
    for (int i = 0; i < 4; ++i) nb(n, i) = static_cast<std::uint8_t>(c.bit(j, i));
  }
  const auto neg = level_counts(symmetrize(d.demap(y), nb));
  const double total = 200'000.0 * 4;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const double p = (pos[k] + neg[k]) / (2 * total);
    const double sd = std::sqrt(std::max(p * (1 - p), 1e-12) * 2 / total);
    CHECK(std::abs((pos[k] - neg[k]) / total) <= 5 * sd + 1e-12);
  }
}

// Under matched decoding 1 / (1 + e^|L|) is the posterior probability that the
// hard decision is wrong, so its mean is the hard-decision BER.
TEST_CASE("soft posteriors match the bit error probability when matched") {
  const auto c = Constellation::uniform_qam(4);
  const auto q = LQuantizer::with_l_max(256, 30.0);
  for (double snr : {6.0, 9.0, 12.0}) {
    const Demapper d(c, DemapperConfig{snr, 1024, q});
    const auto tx = sample_symbols(c, 250'000, 21);
    const auto y = transmit(tx.symbols, ChannelConfig{snr, 22, false});
    const auto l = d.demap(y);
    const auto idx = l.indices().flat();
    double soft = 0.0;
    for (auto k : idx) soft += 1.0 / (1.0 + std::exp(std::abs(q.level(k))));
    soft /= static_cast<double>(idx.size());
    const double ber = ber_pre(tx.bits, hard_decisions(l));
    const double sd = std::sqrt(ber * (1 - ber) / static_cast<double>(idx.size()));
    CHECK(std::abs(soft - ber) <= 3 * sd);
  }
}

TEST_CASE("overload mass does not grow with l_max at fixed step") {
  const auto c = Constellation::ps_qam(6, 4.1);
  const auto tx = sample_symbols(c, 50'000, 31);
  const auto y = transmit(tx.symbols, ChannelConfig{12.0, 32, false});
  double prev = 2.0;
  for (int nb : {16, 32, 64, 128}) {
    const LQuantizer q(nb, 0.4);
    const auto l = Demapper(c, DemapperConfig{10.0, 1024, q}).demap(y);
    std::size_t over = 0;
    for (auto k : l.indices().flat()) over += (k == 0 || k == nb - 1);
    const double rho = static_cast<double>(over) / l.indices().size();
    CHECK(rho <= prev);
    prev = rho;
  }
}

}
