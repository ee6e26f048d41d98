#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imftn/rng.hpp"
#include "imftn/types.hpp"

namespace imftn {

/// Model1: two-path Watterson channel with Gaussian Doppler (doubly
/// selective). Model2: static two-path Rayleigh with the same delay spread.
/// Model3: static multi-tap Rayleigh, redrawn every two frames.
enum class ChannelModelId { Model1, Model2, Model3 };

ChannelModelId parse_channel_model(std::string_view name);
std::string_view to_string(ChannelModelId m) noexcept;

/// Time-varying tap matrix c_{k,l}. Each nonzero tap index in
/// `delay_profile` owns a sequence of block values; the value at symbol k is
/// block k / block_length. Taps outside the profile are exactly zero.
struct ChannelProcess {
  ChannelModelId model = ChannelModelId::Model2;
  int l_c = 0;
  std::vector<int> delay_profile;
  std::size_t n_symbols = 0;
  std::size_t block_length = 1;
  std::vector<CVec> paths;  // paths[i][block] for delay_profile[i]
  double doppler_hz = 0.0;
  double symbol_rate = 0.0;

  cplx tap(std::size_t k, int l) const;
  /// c_{k,0..L_c}.
  CVec taps_at(std::size_t k) const;
};

/// How the Doppler figure is read: as the two-sided spread 2 sigma_d, or
/// directly as the Gaussian spectrum's standard deviation sigma_d.
enum class DopplerConvention { TwoSided, Sigma };

struct Model1Params {
  int l_c = 7;
  double doppler_hz = 1.0;
  DopplerConvention convention = DopplerConvention::TwoSided;
  double symbol_rate = 2400.0 / 0.72;
  /// Low-rate samples per 1/e coherence time before interpolation.
  int samples_per_coherence = 32;
};

struct Model3Params {
  int l_c = 6;
  std::size_t frame_length = 288;
  /// 0 selects the uniform profile; otherwise tap l has relative power
  /// exp(-l / exp_decay).
  double exp_decay = 0.0;
  bool normalize = true;
};

ChannelProcess make_model1(std::uint64_t seed, std::size_t n_symbols,
                           const Model1Params& params);
ChannelProcess make_model2(std::uint64_t seed, int l_c, std::size_t n_symbols,
                           bool normalize = true);
ChannelProcess make_model3(std::uint64_t seed, std::size_t n_frames,
                           const Model3Params& params);

/// Channel memory in symbol intervals for a given delay spread. `warning`
/// (optional) receives a message when the spread is not close to an integer
/// number of intervals.
int make_lc(double delay_spread_ms, double symbol_rate, double tau,
            std::string* warning = nullptr);

/// y_k = sum_l c_{start+k,l} x_{k-l}; x before index 0 reads as zero.
CVec apply_channel(std::span<const cplx> x, const ChannelProcess& ch,
                   std::size_t start = 0);
/// As above plus complex Gaussian noise with per-sample variance sigma^2.
CVec apply_channel(std::span<const cplx> x, const ChannelProcess& ch,
                   double noise_sigma, Rng& rng, std::size_t start = 0);

/// CSV rows `k,l,re,im` for the profile taps of symbols [0, max_symbols).
void write_channel_csv(std::ostream& os, const ChannelProcess& ch,
                       std::size_t max_symbols);

}  // namespace imftn
