#pragma once

#include <span>
#include <string>
#include <string_view>

#include "imftn/types.hpp"

namespace imftn {

enum class Modulation { BPSK, QPSK, PSK8 };

/// Unit-average-energy PSK alphabet. `points[label]` is the symbol carrying
/// the Gray label `label`, whose bits are read MSB first.
struct Constellation {
  Modulation kind = Modulation::BPSK;
  std::string name;
  CVec points;
  int bits_per_symbol = 1;

  std::size_t size() const noexcept { return points.size(); }
  /// Index of the nearest point (ties go to the lower label).
  std::size_t nearest(cplx z) const noexcept;
};

Constellation make_constellation(Modulation m);
/// Accepts "BPSK", "QPSK", "PSK8" / "8PSK" (case-insensitive).
Modulation parse_modulation(std::string_view name);
std::string_view to_string(Modulation m) noexcept;

CVec modulate(std::span<const std::uint8_t> bits, const Constellation& c);
Bits demodulate_hard(std::span<const cplx> symbols, const Constellation& c);

}  // namespace imftn
