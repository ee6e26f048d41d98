#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>

#include "imftn/modem.hpp"
#include "imftn/rng.hpp"

using namespace imftn;

namespace {

Bits random_bits(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  Bits b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(uniform_index(rng, 2));
  return b;
}

}  // namespace

TEST_SUITE("modem") {

TEST_CASE("constellation geometry") {
  for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::PSK8}) {
    const Constellation c = make_constellation(m);
    CHECK(c.size() == (1U << c.bits_per_symbol));
    double e = 0.0;
    for (const cplx& p : c.points) e += std::norm(p);
    CHECK(std::abs(e / c.size() - 1.0) < 1e-12);
  }
}

TEST_CASE("mapping conventions") {
  const Constellation bpsk = make_constellation(Modulation::BPSK);
  CHECK(modulate(Bits{0}, bpsk)[0] == cplx(1.0));
  CHECK(modulate(Bits{1}, bpsk)[0] == cplx(-1.0));

  const Constellation qpsk = make_constellation(Modulation::QPSK);
  const cplx s = modulate(Bits{0, 0}, qpsk)[0];
  CHECK(std::abs(s - cplx(1.0, 1.0) / std::sqrt(2.0)) < 1e-15);

  // Gray property: neighbouring points differ in one bit.
  for (Modulation m : {Modulation::QPSK, Modulation::PSK8}) {
    const Constellation c = make_constellation(m);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(c.size());
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = 0; b < c.size(); ++b) {
        const double d = std::abs(c.points[a] - c.points[b]);
        if (a != b && d < 2.0 * std::sin(step / 2.0) + 1e-9)
          CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
      }
  }
}

TEST_CASE("psk8 points lie on multiples of pi/4") {
  const Constellation c = make_constellation(Modulation::PSK8);
  const CVec s = modulate(random_bits(300, 2), c);
  for (const cplx& z : s) {
    CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);
    const double k = std::arg(z) / (std::numbers::pi / 4.0);
    CHECK(std::abs(k - std::round(k)) < 1e-12);
  }
}

TEST_CASE("round trip for every constellation") {
  for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::PSK8}) {
    const Constellation c = make_constellation(m);
    const Bits b = random_bits(600, 3);
    CHECK(demodulate_hard(modulate(b, c), c) == b);
  }
}

TEST_CASE("length mismatch is rejected") {
  const Constellation c = make_constellation(Modulation::PSK8);
  CHECK_THROWS_AS(modulate(Bits{0, 1}, c), std::invalid_argument);
}

TEST_CASE("nearest point decisions") {
  const Constellation bpsk = make_constellation(Modulation::BPSK);
  CHECK(demodulate_hard(CVec{cplx(0.9, 0.1)}, bpsk) == Bits{0});

  const Constellation qpsk = make_constellation(Modulation::QPSK);
  const Bits b = random_bits(20000, 4);
  CVec s = modulate(b, qpsk);
  Rng rng = make_stream(5);
  for (auto& z : s) z += complex_normal(rng, 1e-6);
  CHECK(demodulate_hard(s, qpsk) == b);
}

TEST_CASE("empirical symbol energy") {
  const Constellation c = make_constellation(Modulation::QPSK);
  const CVec s = modulate(random_bits(200000, 6), c);
  double e = 0.0;
  for (const cplx& z : s) e += std::norm(z);
  CHECK(std::abs(e / s.size() - 1.0) < 0.01);
}

TEST_CASE("modulation names") {
  CHECK(parse_modulation("bpsk") == Modulation::BPSK);
  CHECK(parse_modulation("8PSK") == Modulation::PSK8);
  CHECK(to_string(Modulation::QPSK) == "QPSK");
  CHECK_THROWS_AS(parse_modulation("16QAM"), std::invalid_argument);
}

}  // TEST_SUITE
