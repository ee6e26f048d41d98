#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "imftn/types.hpp"

namespace imftn {

struct FrameConfig {
  int n_p = 32;
  int n_s = 256;
  int l_c = 6;
  int l_h = 4;

  int n() const noexcept { return n_p + n_s; }
  /// Requires positive sizes and N_p > L_h + L_c - 1.
  void validate() const;
};

/// Allowed pilot locations and the receiver's expected correlation spikes.
struct PlacementSet {
  std::vector<std::size_t> allowed;   // multiples of stride, ascending
  std::vector<std::size_t> expected;  // allowed and allowed + L_c, ascending
  int n_b = 0;
  std::size_t stride = 1;
  int l_c = 0;

  bool is_allowed(std::size_t p) const noexcept;
};

/// Builds the location set for N_s data symbols and channel memory L_c.
/// Throws std::invalid_argument when N_b <= 0 (no index-modulation capacity).
PlacementSet placement_set(int n_s, int l_c);

/// n_sp = value(bits) * stride with bits read MSB first.
std::size_t encode_location(std::span<const std::uint8_t> bits,
                            const PlacementSet& ps);
/// Inverse of encode_location; throws when n_sp is not an allowed location.
Bits decode_location(std::size_t n_sp, const PlacementSet& ps);

struct SymbolFrame {
  CVec symbols;
  std::size_t pilot_location = 0;
  Bits im_bits;
};

/// Pilot at [n_sp, n_sp + N_p); data symbols fill the remaining positions in
/// ascending index order.
SymbolFrame build_frame(std::span<const std::uint8_t> im_bits,
                        std::span<const cplx> pilot,
                        std::span<const cplx> data, const PlacementSet& ps,
                        const FrameConfig& fc);

/// Spectral efficiencies in bits/s/Hz and the relative gains of the
/// index-modulated FTN frame (gains are fractions, not percent).
struct SEFigures {
  double gamma_nyq = 0.0;
  double gamma_ftn = 0.0;
  double gamma_im = 0.0;
  double gain_nyq = 0.0;
  double gain_ftn = 0.0;
};

SEFigures se_figures(int n_p, int n_s, int m, double tau, double beta,
                     double r_c, int n_b);

}  // namespace imftn
