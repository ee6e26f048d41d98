#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "imftn/channel.hpp"
#include "imftn/modem.hpp"
#include "imftn/psli.hpp"

namespace imftn {

/// Colored: matched-filter noise with covariance h, then the receiver
/// whitening filter. White: white noise injected after whitening.
enum class NoisePath { White, Colored };
/// Known: estimation at the true pilot location. Identified: at the
/// location returned by the detector.
enum class LocationMode { Known, Identified };

struct ExperimentConfig {
  ChannelModelId channel_model = ChannelModelId::Model2;
  double tau = 0.72;
  double beta = 0.35;
  int n_p = 32;
  int n_s = 256;
  int l_h = 0;  // 0: smallest length holding 99.99% of the ISI energy
  int l_c = 0;  // 0: from delay_spread_ms (Model 3: 6)
  double delay_spread_ms = 2.1;
  double symbol_rate = 2400.0;  // Nyquist-rate symbols per second
  Modulation data_modulation = Modulation::QPSK;
  Modulation pilot_modulation = Modulation::BPSK;
  DetectorConfig detector;
  std::vector<double> ebn0_grid_db{0.0, 2.0, 4.0, 6.0, 8.0};
  int frames_per_superframe = 144;
  int superframes = 10;
  std::uint64_t seed = 1;
  double rate_rc = 0.75;
  double doppler_hz = 1.0;
  DopplerConvention doppler_convention = DopplerConvention::TwoSided;
  NoisePath noise_path = NoisePath::White;
  LocationMode location_mode = LocationMode::Identified;
  bool interpolate = true;
  bool normalize_channel = true;
  bool snapshot_per_frame = false;
  bool noiseless = false;
  double model3_exp_decay = 0.0;
  std::string pilot_file;
  std::string cache_dir;
  int pilot_restarts = 100;
  std::uint64_t pilot_seed = 1;
  int workers = 1;

  int resolved_l_h() const;
  int resolved_l_c() const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Sets one `key=value` field; throws std::invalid_argument for unknown
/// keys or malformed values.
void apply_setting(ExperimentConfig& cfg, std::string_view key,
                   std::string_view value);
/// Parses a `key = value` file ('#' comments, blank lines ignored).
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
/// Every field as `key=value` lines, in a fixed order.
std::string describe(const ExperimentConfig& cfg);

std::string format_double(double x);

}  // namespace imftn
