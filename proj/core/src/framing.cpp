#include "imftn/framing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace imftn {

namespace {

int floor_log2(unsigned long x) { return std::bit_width(x) - 1; }
int ceil_log2(unsigned long x) { return x <= 1 ? 0 : std::bit_width(x - 1); }

}  // namespace

void FrameConfig::validate() const {
  if (n_p < 1 || n_s < 1 || l_c < 0 || l_h < 1)
    throw std::invalid_argument("FrameConfig: sizes must be positive");
  if (n_p <= l_h + l_c - 1)
    throw std::invalid_argument("FrameConfig: N_p = " + std::to_string(n_p) +
                                " leaves no useful pilot segment for L_h + L_c - 1 = " +
                                std::to_string(l_h + l_c - 1));
}

bool PlacementSet::is_allowed(std::size_t p) const noexcept {
  return std::binary_search(allowed.begin(), allowed.end(), p);
}

PlacementSet placement_set(int n_s, int l_c) {
  if (n_s < 1 || l_c < 0)
    throw std::invalid_argument("placement_set: need n_s >= 1 and l_c >= 0");
  const int span_bits = floor_log2(static_cast<unsigned long>(n_s) + 1);
  const int stride_bits = ceil_log2(static_cast<unsigned long>(l_c) + 1);
  PlacementSet ps;
  ps.n_b = span_bits - stride_bits;
  if (ps.n_b <= 0)
    throw std::invalid_argument("placement_set: no index-modulation capacity for N_s = " +
                                std::to_string(n_s) + ", L_c = " + std::to_string(l_c));
  ps.stride = std::size_t{1} << stride_bits;
  ps.l_c = l_c;
  const std::size_t count = std::size_t{1} << ps.n_b;
  for (std::size_t i = 0; i < count; ++i) ps.allowed.push_back(i * ps.stride);
  for (std::size_t p : ps.allowed) {
    ps.expected.push_back(p);
    ps.expected.push_back(p + static_cast<std::size_t>(l_c));
  }
  std::sort(ps.expected.begin(), ps.expected.end());
  ps.expected.erase(std::unique(ps.expected.begin(), ps.expected.end()),
                    ps.expected.end());
  return ps;
}

std::size_t encode_location(std::span<const std::uint8_t> bits,
                            const PlacementSet& ps) {
  if (bits.size() != static_cast<std::size_t>(ps.n_b))
    throw std::invalid_argument("encode_location: expected " + std::to_string(ps.n_b) +
                                " bits, got " + std::to_string(bits.size()));
  std::size_t value = 0;
  for (auto b : bits) value = (value << 1) | (b & 1U);
  return value * ps.stride;
}

Bits decode_location(std::size_t n_sp, const PlacementSet& ps) {
  if (!ps.is_allowed(n_sp))
    throw std::invalid_argument("decode_location: " + std::to_string(n_sp) +
                                " is not an allowed pilot location");
  const std::size_t value = n_sp / ps.stride;
  Bits bits(static_cast<std::size_t>(ps.n_b));
  for (int i = 0; i < ps.n_b; ++i)
    bits[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>((value >> (ps.n_b - 1 - i)) & 1U);
  return bits;
}

SymbolFrame build_frame(std::span<const std::uint8_t> im_bits,
                        std::span<const cplx> pilot,
                        std::span<const cplx> data, const PlacementSet& ps,
                        const FrameConfig& fc) {
  if (pilot.size() != static_cast<std::size_t>(fc.n_p))
    throw std::invalid_argument("build_frame: pilot length " + std::to_string(pilot.size()) +
                                " != N_p " + std::to_string(fc.n_p));
  if (data.size() != static_cast<std::size_t>(fc.n_s))
    throw std::invalid_argument("build_frame: data length " + std::to_string(data.size()) +
                                " != N_s " + std::to_string(fc.n_s));
  SymbolFrame f;
  f.pilot_location = encode_location(im_bits, ps);
  f.im_bits.assign(im_bits.begin(), im_bits.end());
  const std::size_t n = static_cast<std::size_t>(fc.n());
  if (f.pilot_location + pilot.size() > n)
    throw std::invalid_argument("build_frame: pilot at " + std::to_string(f.pilot_location) +
                                " overruns frame of " + std::to_string(n));
  f.symbols.resize(n);
  std::size_t d = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k >= f.pilot_location && k < f.pilot_location + pilot.size())
      f.symbols[k] = pilot[k - f.pilot_location];
    else
      f.symbols[k] = data[d++];
  }
  return f;
}

SEFigures se_figures(int n_p, int n_s, int m, double tau, double beta,
                     double r_c, int n_b) {
  if (n_p < 0 || n_s < 1 || m < 2 || tau <= 0.0 || beta < 0.0 || r_c <= 0.0 || n_b < 0)
    throw std::invalid_argument("se_figures: invalid arguments");
  const double bits = std::log2(static_cast<double>(m));
  const double frame = static_cast<double>(n_s + n_p);
  SEFigures se;
  se.gamma_nyq = n_s / frame * bits / (1.0 + beta) * r_c;
  se.gamma_ftn = se.gamma_nyq / tau;
  se.gamma_im = (n_s * r_c * bits + n_b) / frame / (tau * (1.0 + beta));
  se.gain_nyq = se.gamma_im / se.gamma_nyq - 1.0;
  se.gain_ftn = n_b / (n_s * r_c * bits);
  return se;
}

}  // namespace imftn
