#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "imftn/config.hpp"
#include "imftn/estimator.hpp"
#include "imftn/framing.hpp"
#include "imftn/modem.hpp"
#include "imftn/psli.hpp"
#include "imftn/waveform.hpp"

namespace imftn {

/// sigma with sigma^2 = 1 / (r_c log2(M) 10^(EbN0/10)); per-dimension
/// variance is sigma^2 / 2.
double ebn0_to_sigma(double ebn0_db, int m, double r_c);

/// Everything derived once from a configuration: filters, pilot design,
/// placement set.
struct LinkSetup {
  ExperimentConfig cfg;
  PulseConfig pulse;
  TapSet h;
  TapSet v;
  TapSet rx_filter;
  TapSet noise_shaper;
  PilotDesign design;
  WhitenedPilot wp;
  PlacementSet ps;
  FrameConfig fc;
  Constellation data_c;
  Constellation pilot_c;
};

/// Resolves lengths, loads or designs the pilot (through the cache
/// directory when configured) and precomputes the filters.
LinkSetup prepare_link(const ExperimentConfig& cfg);

/// One superframe's received samples in the whitened domain, split into a
/// noiseless part and a unit-variance noise part so each Eb/N0 point reuses
/// the same realization: r~ = clean + sigma * noise.
struct SuperframeSignal {
  std::size_t lead = 0;  // samples before frame 0
  std::vector<std::size_t> locations;
  CVec tx;
  CVec clean;
  CVec noise;
  ChannelProcess channel;
};

SuperframeSignal simulate_superframe(const LinkSetup& link, std::size_t index);

struct PointResult {
  double ebn0_db = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double pslie = 0.0;
  double pslie_ci_lo = 0.0;
  double pslie_ci_hi = 0.0;
  double mse = 0.0;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<PointResult> points;
  std::uint64_t seed = 0;
  ExperimentConfig config;
};

/// Wilson score interval at 95% for k successes out of n.
std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n);

/// Location identification on every frame; MSE at the identified location.
ExperimentResult run_psli_experiment(const ExperimentConfig& cfg);
ExperimentResult run_psli_experiment(const LinkSetup& link);
/// Channel-estimation MSE at known or identified locations, per the config.
ExperimentResult run_mse_experiment(const ExperimentConfig& cfg);
ExperimentResult run_mse_experiment(const LinkSetup& link);

struct CalibrationRow {
  double c1 = 0.0;
  double c2 = 0.0;
  double ebn0_db = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
};

/// Runs every (c1, c2) pair on the same frames and noise.
std::vector<CalibrationRow> calibrate_detector(const LinkSetup& link,
                                               const std::vector<double>& c1_grid,
                                               const std::vector<double>& c2_grid);

/// Header `ebn0_db,pslie,pslie_ci_lo,pslie_ci_hi,mse,trials,seed`.
void emit_csv(const ExperimentResult& result, std::ostream& os);
void emit_csv(const ExperimentResult& result, const std::filesystem::path& path);
ExperimentResult parse_csv(std::istream& is);
ExperimentResult parse_csv(const std::filesystem::path& path);

}  // namespace imftn
