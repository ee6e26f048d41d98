#include "imftn/modem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace imftn {

namespace {

unsigned gray(unsigned x) { return x ^ (x >> 1); }

}  // namespace

std::size_t Constellation::nearest(cplx z) const noexcept {
  std::size_t best = 0;
  double best_d = std::norm(z - points[0]);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = std::norm(z - points[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Constellation make_constellation(Modulation m) {
  Constellation c;
  c.kind = m;
  c.name = std::string(to_string(m));
  switch (m) {
    case Modulation::BPSK:
      c.bits_per_symbol = 1;
      c.points = {1.0, -1.0};
      break;
    case Modulation::QPSK: {
      c.bits_per_symbol = 2;
      const double a = 1.0 / std::sqrt(2.0);
      c.points.resize(4);
      for (unsigned label = 0; label < 4; ++label) {
        const double re = (label & 2U) ? -a : a;
        const double im = (label & 1U) ? -a : a;
        c.points[label] = {re, im};
      }
      break;
    }
    case Modulation::PSK8: {
      c.bits_per_symbol = 3;
      c.points.resize(8);
      // Position k on the circle carries the Gray word gray(k).
      for (unsigned k = 0; k < 8; ++k)
        c.points[gray(k)] = std::polar(1.0, k * std::numbers::pi / 4.0);
      break;
    }
  }
  return c;
}

Modulation parse_modulation(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return std::toupper(ch); });
  if (s == "BPSK") return Modulation::BPSK;
  if (s == "QPSK") return Modulation::QPSK;
  if (s == "PSK8" || s == "8PSK" || s == "8-PSK") return Modulation::PSK8;
  throw std::invalid_argument("unknown modulation '" + std::string(name) + "'");
}

std::string_view to_string(Modulation m) noexcept {
  switch (m) {
    case Modulation::BPSK: return "BPSK";
    case Modulation::QPSK: return "QPSK";
    case Modulation::PSK8: return "PSK8";
  }
  return "?";
}

CVec modulate(std::span<const std::uint8_t> bits, const Constellation& c) {
  const std::size_t k = static_cast<std::size_t>(c.bits_per_symbol);
  if (bits.size() % k != 0)
    throw std::invalid_argument("modulate: bit count " +
                                std::to_string(bits.size()) +
                                " is not a multiple of " + std::to_string(k));
  CVec out(bits.size() / k);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned label = 0;
    for (std::size_t b = 0; b < k; ++b) label = (label << 1) | (bits[i * k + b] & 1U);
    out[i] = c.points[label];
  }
  return out;
}

Bits demodulate_hard(std::span<const cplx> symbols, const Constellation& c) {
  const std::size_t k = static_cast<std::size_t>(c.bits_per_symbol);
  Bits out(symbols.size() * k);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const std::size_t label = c.nearest(symbols[i]);
    for (std::size_t b = 0; b < k; ++b)
      out[i * k + b] = static_cast<std::uint8_t>((label >> (k - 1 - b)) & 1U);
  }
  return out;
}

}  // namespace imftn
