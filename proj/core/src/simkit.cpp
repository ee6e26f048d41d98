#include "imftn/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include "imftn/rng.hpp"

namespace imftn {

namespace {

// Stream keys. Frames use their own index; lead and tail padding use the
// two indices after the last frame.
constexpr std::uint64_t kSymbols = 1;
constexpr std::uint64_t kNoise = 2;
constexpr std::uint64_t kChannel = 0xC4A2;

CVec random_symbols(Rng& rng, const Constellation& c, std::size_t n) {
  CVec out(n);
  for (auto& s : out) s = c.points[uniform_index(rng, c.size())];
  return out;
}

CVec unit_noise(Rng& rng, std::size_t n) {
  CVec out(n);
  for (auto& z : out) z = complex_normal(rng, 1.0);
  return out;
}

// Runs fn(index) for index in [0, count) on `workers` threads. Results must
// be written to per-index slots so the outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)),
                                              std::max<std::size_t>(count, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(w);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < w; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
          next.store(count);
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct FrameOutcome {
  std::size_t n_hat = 0;
  std::size_t used = 0;
  CVec c_hat;
};

struct PointAccumulator {
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double mse_sum = 0.0;
  std::uint64_t mse_count = 0;
};

CVec frame_window(const SuperframeSignal& sig, std::size_t frame, std::size_t n,
                  double sigma) {
  const std::size_t start = sig.lead + frame * n;
  CVec w(n);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = sig.clean[start + k] + sigma * sig.noise[start + k];
  return w;
}

// Channel-index offset between the transmitted stream and the process.
std::size_t channel_offset(const SuperframeSignal& sig) {
  return sig.channel.n_symbols - sig.tx.size();
}

double frame_mse(const LinkSetup& link, const SuperframeSignal& sig,
                 const std::vector<FrameOutcome>& out, PointAccumulator& acc) {
  const std::size_t n = static_cast<std::size_t>(link.fc.n());
  const std::size_t off = channel_offset(sig);
  const bool varying = link.cfg.channel_model == ChannelModelId::Model1 &&
                       !link.cfg.snapshot_per_frame && sig.channel.block_length == 1;
  double total = 0.0;
  if (!varying) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const CVec c = sig.channel.taps_at(off + sig.lead + i * n + sig.locations[i]);
      double e = 0.0;
      for (std::size_t l = 0; l < c.size(); ++l) e += std::norm(out[i].c_hat[l] - c[l]);
      total += e;
      ++acc.mse_count;
    }
    acc.mse_sum += total;
    return total;
  }

  // Time-varying channel: per-data-symbol error against an estimate either
  // held over the frame or interpolated between the centres of consecutive
  // useful pilot segments.
  const std::size_t useful_off = link.design.useful_offset();
  const std::size_t useful_len = link.design.useful_length();
  std::vector<std::size_t> anchor(out.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    anchor[i] = sig.lead + i * n + out[i].used + useful_off + (useful_len - 1) / 2;

  const std::size_t n_p = static_cast<std::size_t>(link.fc.n_p);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t start = sig.lead + i * n;
    std::vector<CVec> path;
    std::size_t path_origin = 0;
    for (std::size_t k = start; k < start + n; ++k) {
      if (k >= start + sig.locations[i] && k < start + sig.locations[i] + n_p) continue;
      const CVec* est = &out[i].c_hat;
      if (link.cfg.interpolate && out.size() > 1) {
        // Segment [anchor[j], anchor[j+1]] containing k, clamped at the ends.
        std::size_t j = 0;
        while (j + 1 < out.size() && anchor[j + 1] <= k) ++j;
        if (k <= anchor.front()) {
          est = &out.front().c_hat;
        } else if (j + 1 >= out.size()) {
          est = &out.back().c_hat;
        } else {
          if (path.empty() || path_origin != anchor[j]) {
            path = interpolate(out[j].c_hat, out[j + 1].c_hat, anchor[j + 1] - anchor[j]);
            path_origin = anchor[j];
          }
          est = &path[k - anchor[j]];
        }
      }
      const CVec c = sig.channel.taps_at(off + k);
      double e = 0.0;
      for (std::size_t l = 0; l < c.size(); ++l) e += std::norm((*est)[l] - c[l]);
      total += e;
      ++acc.mse_count;
    }
  }
  acc.mse_sum += total;
  return total;
}

std::vector<FrameOutcome> process_frames(const LinkSetup& link,
                                         const SuperframeSignal& sig, double sigma,
                                         const DetectorConfig& det, bool known,
                                         PointAccumulator& acc) {
  const std::size_t n = static_cast<std::size_t>(link.fc.n());
  const std::size_t frames = sig.locations.size();
  std::vector<FrameOutcome> out(frames);
  const std::size_t off = link.design.useful_offset();
  const std::size_t len = link.design.useful_length();
  for (std::size_t i = 0; i < frames; ++i) {
    const CVec w = frame_window(sig, i, n, sigma);
    out[i].n_hat = identify(w, link.wp, link.ps, det);
    out[i].used = known ? sig.locations[i] : out[i].n_hat;
    out[i].c_hat =
        lsse_estimate(std::span<const cplx>(w).subspan(out[i].used + off, len), link.design, i)
            .c_hat;
    ++acc.trials;
    if (out[i].n_hat != sig.locations[i]) ++acc.errors;
  }
  return out;
}

ExperimentResult run_engine(const LinkSetup& link, bool known) {
  const auto& cfg = link.cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t sf_count = static_cast<std::size_t>(cfg.superframes);
  const std::size_t points = cfg.ebn0_grid_db.size();
  std::vector<std::vector<PointAccumulator>> per_sf(sf_count,
                                                    std::vector<PointAccumulator>(points));
  const int m = static_cast<int>(link.data_c.size());

  parallel_for(sf_count, cfg.workers, [&](std::size_t sf) {
    const SuperframeSignal sig = simulate_superframe(link, sf);
    for (std::size_t p = 0; p < points; ++p) {
      const double sigma =
          cfg.noiseless ? 0.0 : ebn0_to_sigma(cfg.ebn0_grid_db[p], m, cfg.rate_rc);
      auto out = process_frames(link, sig, sigma, cfg.detector, known, per_sf[sf][p]);
      frame_mse(link, sig, out, per_sf[sf][p]);
    }
  });

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ExperimentResult res;
  res.seed = cfg.seed;
  res.config = cfg;
  for (std::size_t p = 0; p < points; ++p) {
    PointAccumulator total;
    for (std::size_t sf = 0; sf < sf_count; ++sf) {
      total.trials += per_sf[sf][p].trials;
      total.errors += per_sf[sf][p].errors;
      total.mse_sum += per_sf[sf][p].mse_sum;
      total.mse_count += per_sf[sf][p].mse_count;
    }
    PointResult r;
    r.ebn0_db = cfg.ebn0_grid_db[p];
    r.trials = total.trials;
    r.errors = total.errors;
    r.pslie = total.trials ? static_cast<double>(total.errors) / total.trials : 0.0;
    std::tie(r.pslie_ci_lo, r.pslie_ci_hi) = wilson_interval(total.errors, total.trials);
    r.mse = total.mse_count ? total.mse_sum / static_cast<double>(total.mse_count) : 0.0;
    r.wall_seconds = elapsed / static_cast<double>(points);
    res.points.push_back(r);
  }
  return res;
}

}  // namespace

double ebn0_to_sigma(double ebn0_db, int m, double r_c) {
  if (m < 2) throw std::invalid_argument("ebn0_to_sigma: M must be >= 2");
  if (r_c <= 0.0) throw std::invalid_argument("ebn0_to_sigma: r_c must be > 0");
  const double var = 1.0 / (r_c * std::log2(static_cast<double>(m)) *
                            std::pow(10.0, ebn0_db / 10.0));
  return std::sqrt(var);
}

LinkSetup prepare_link(const ExperimentConfig& cfg_in) {
  cfg_in.validate();
  LinkSetup link;
  link.cfg = cfg_in;
  const int l_h = cfg_in.resolved_l_h();
  const int l_c = cfg_in.resolved_l_c();
  link.cfg.l_h = l_h;
  link.cfg.l_c = l_c;
  link.pulse = PulseConfig{cfg_in.beta, cfg_in.tau, l_h};
  link.h = rc_isi_taps(link.pulse);
  link.v = whitening_filter(link.pulse);
  link.rx_filter = whitening_receiver_filter(link.pulse);
  link.noise_shaper = colored_noise_shaper(link.pulse);
  link.data_c = make_constellation(cfg_in.data_modulation);
  link.pilot_c = make_constellation(cfg_in.pilot_modulation);
  link.fc = FrameConfig{cfg_in.n_p, cfg_in.n_s, l_c, l_h};
  link.ps = placement_set(cfg_in.n_s, l_c);

  std::vector<int> labels;
  std::filesystem::path cached;
  if (!cfg_in.pilot_file.empty()) {
    labels = read_pilot_file(cfg_in.pilot_file, link.pilot_c);
  } else {
    if (!cfg_in.cache_dir.empty()) {
      cached = std::filesystem::path(cfg_in.cache_dir) /
               design_cache_name(link.pilot_c, cfg_in.n_p, cfg_in.tau, cfg_in.beta, l_h, l_c);
      if (std::filesystem::exists(cached)) labels = read_pilot_file(cached, link.pilot_c);
    }
    if (labels.empty()) {
      RelaxedSearchOptions opt;
      opt.restarts = cfg_in.pilot_restarts;
      opt.seed = cfg_in.pilot_seed;
      opt.workers = cfg_in.workers;
      labels = pilot_search_relaxed(link.pilot_c, cfg_in.n_p, link.v, l_h, l_c, opt).labels;
      if (!cached.empty()) {
        std::filesystem::create_directories(cached.parent_path());
        write_pilot_file(cached, labels, link.pilot_c, "relaxed search");
      }
    }
  }
  if (labels.size() != static_cast<std::size_t>(cfg_in.n_p))
    throw std::invalid_argument("pilot holds " + std::to_string(labels.size()) +
                                " symbols but N_p = " + std::to_string(cfg_in.n_p));
  link.design = build_design(labels_to_symbols(labels, link.pilot_c), link.v, l_h, l_c);
  link.design.labels = labels;
  link.wp = whitened_pilot(link.design.pilot, link.v);
  return link;
}

SuperframeSignal simulate_superframe(const LinkSetup& link, std::size_t index) {
  const auto& cfg = link.cfg;
  const std::size_t n = static_cast<std::size_t>(link.fc.n());
  const std::size_t frames = static_cast<std::size_t>(cfg.frames_per_superframe);
  const std::size_t reach = std::max({link.rx_filter.center, link.noise_shaper.center,
                                      static_cast<std::size_t>(cfg.l_h + cfg.l_c)});
  const std::size_t pad = n * (1 + reach / n);

  SuperframeSignal sig;
  sig.lead = pad;
  const std::size_t total = pad + frames * n + pad;
  sig.tx.reserve(total);
  sig.noise.reserve(total);
  const std::uint64_t sf = static_cast<std::uint64_t>(index);

  {
    Rng rng = make_stream(cfg.seed, sf, frames, kSymbols);
    const CVec d = random_symbols(rng, link.data_c, pad);
    sig.tx.insert(sig.tx.end(), d.begin(), d.end());
    Rng nrng = make_stream(cfg.seed, sf, frames, kNoise);
    const CVec z = unit_noise(nrng, pad);
    sig.noise.insert(sig.noise.end(), z.begin(), z.end());
  }
  for (std::size_t i = 0; i < frames; ++i) {
    Rng rng = make_stream(cfg.seed, sf, i, kSymbols);
    Bits bits(static_cast<std::size_t>(link.ps.n_b));
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
    const CVec data = random_symbols(rng, link.data_c, static_cast<std::size_t>(cfg.n_s));
    const SymbolFrame f = build_frame(bits, link.design.pilot, data, link.ps, link.fc);
    sig.locations.push_back(f.pilot_location);
    sig.tx.insert(sig.tx.end(), f.symbols.begin(), f.symbols.end());
    Rng nrng = make_stream(cfg.seed, sf, i, kNoise);
    const CVec z = unit_noise(nrng, n);
    sig.noise.insert(sig.noise.end(), z.begin(), z.end());
  }
  {
    Rng rng = make_stream(cfg.seed, sf, frames + 1, kSymbols);
    const CVec d = random_symbols(rng, link.data_c, pad);
    sig.tx.insert(sig.tx.end(), d.begin(), d.end());
    Rng nrng = make_stream(cfg.seed, sf, frames + 1, kNoise);
    const CVec z = unit_noise(nrng, pad);
    sig.noise.insert(sig.noise.end(), z.begin(), z.end());
  }

  const std::uint64_t ch_seed = mix_seed(cfg.seed, sf, kChannel);
  std::size_t offset = 0;
  switch (cfg.channel_model) {
    case ChannelModelId::Model1: {
      Model1Params p;
      p.l_c = cfg.l_c;
      p.doppler_hz = cfg.doppler_hz;
      p.convention = cfg.doppler_convention;
      p.symbol_rate = cfg.symbol_rate / cfg.tau;
      sig.channel = make_model1(ch_seed, total, p);
      if (cfg.snapshot_per_frame && sig.channel.block_length == 1) {
        for (auto& path : sig.channel.paths)
          for (std::size_t k = pad; k < pad + frames * n; ++k)
            path[k] = path[pad + ((k - pad) / n) * n];
      }
      break;
    }
    case ChannelModelId::Model2:
      sig.channel = make_model2(ch_seed, cfg.l_c, total, cfg.normalize_channel);
      break;
    case ChannelModelId::Model3: {
      // Align frame 0 with the start of a two-frame block.
      offset = (2 * n - pad % (2 * n)) % (2 * n);
      Model3Params p;
      p.l_c = cfg.l_c;
      p.frame_length = n;
      p.exp_decay = cfg.model3_exp_decay;
      p.normalize = cfg.normalize_channel;
      sig.channel = make_model3(ch_seed, (offset + total) / n + 1, p);
      const std::size_t extra = sig.channel.n_symbols - (offset + total);
      sig.channel.n_symbols -= extra;
      break;
    }
  }

  if (cfg.noise_path == NoisePath::White) {
    sig.clean = apply_channel(apply_fir(sig.tx, link.v), sig.channel, offset);
  } else {
    const CVec y = apply_channel(apply_fir(sig.tx, link.h), sig.channel, offset);
    sig.clean = apply_fir(y, link.rx_filter);
    sig.noise = apply_fir(apply_fir(sig.noise, link.noise_shaper), link.rx_filter);
  }
  return sig;
}

std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n) {
  if (n == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double den = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / den;
  // The bounds are exact at the extremes; rounding would leave them just off.
  const double lo = k == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = k == n ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

ExperimentResult run_psli_experiment(const LinkSetup& link) {
  return run_engine(link, false);
}

ExperimentResult run_psli_experiment(const ExperimentConfig& cfg) {
  return run_psli_experiment(prepare_link(cfg));
}

ExperimentResult run_mse_experiment(const LinkSetup& link) {
  return run_engine(link, link.cfg.location_mode == LocationMode::Known);
}

ExperimentResult run_mse_experiment(const ExperimentConfig& cfg) {
  return run_mse_experiment(prepare_link(cfg));
}

std::vector<CalibrationRow> calibrate_detector(const LinkSetup& link,
                                               const std::vector<double>& c1_grid,
                                               const std::vector<double>& c2_grid) {
  const auto& cfg = link.cfg;
  std::vector<DetectorConfig> dets;
  for (double c1 : c1_grid)
    for (double c2 : c2_grid) {
      DetectorConfig d = cfg.detector;
      d.c1 = c1;
      d.c2 = c2;
      d.validate(cfg.l_c);
      dets.push_back(d);
    }
  const std::size_t points = cfg.ebn0_grid_db.size();
  const std::size_t sf_count = static_cast<std::size_t>(cfg.superframes);
  const std::size_t n = static_cast<std::size_t>(link.fc.n());
  const int m = static_cast<int>(link.data_c.size());
  // errors[sf][det * points + p]
  std::vector<std::vector<std::uint64_t>> errors(
      sf_count, std::vector<std::uint64_t>(dets.size() * points, 0));

  parallel_for(sf_count, cfg.workers, [&](std::size_t sf) {
    const SuperframeSignal sig = simulate_superframe(link, sf);
    for (std::size_t p = 0; p < points; ++p) {
      const double sigma =
          cfg.noiseless ? 0.0 : ebn0_to_sigma(cfg.ebn0_grid_db[p], m, cfg.rate_rc);
      for (std::size_t i = 0; i < sig.locations.size(); ++i) {
        const CVec w = frame_window(sig, i, n, sigma);
        for (std::size_t d = 0; d < dets.size(); ++d)
          if (identify(w, link.wp, link.ps, dets[d]) != sig.locations[i])
            ++errors[sf][d * points + p];
      }
    }
  });

  std::vector<CalibrationRow> rows;
  const std::uint64_t trials =
      static_cast<std::uint64_t>(sf_count) * static_cast<std::uint64_t>(cfg.frames_per_superframe);
  for (std::size_t d = 0; d < dets.size(); ++d)
    for (std::size_t p = 0; p < points; ++p) {
      CalibrationRow r{dets[d].c1, dets[d].c2, cfg.ebn0_grid_db[p], trials, 0};
      for (std::size_t sf = 0; sf < sf_count; ++sf) r.errors += errors[sf][d * points + p];
      rows.push_back(r);
    }
  return rows;
}

}  // namespace imftn
