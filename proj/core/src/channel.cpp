#include "imftn/channel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace imftn {

namespace {

constexpr double kPi = std::numbers::pi;

// One Gaussian-Doppler path of n symbols with E|c|^2 = power.
CVec gaussian_doppler_path(Rng& rng, std::size_t n, double sigma_d,
                           double symbol_rate, int per_coherence,
                           double power) {
  if (sigma_d <= 0.0) return CVec(1, complex_normal(rng, power));

  const double t_e = 1.0 / (std::sqrt(2.0) * kPi * sigma_d);
  const std::size_t decim = std::max<std::size_t>(
      1, static_cast<std::size_t>(symbol_rate * t_e / per_coherence));
  const double dt = static_cast<double>(decim) / symbol_rate;

  // g(t) = exp(-t^2 / (2a^2)) makes the output autocorrelation
  // exp(-2 (pi sigma_d t)^2).
  const double a = 1.0 / (2.0 * std::sqrt(2.0) * kPi * sigma_d);
  const long half = static_cast<long>(std::ceil(5.0 * a / dt));
  std::vector<double> g(static_cast<std::size_t>(2 * half + 1));
  double energy = 0.0;
  for (long i = -half; i <= half; ++i) {
    const double t = i * dt;
    const double gi = std::exp(-t * t / (2.0 * a * a));
    g[static_cast<std::size_t>(i + half)] = gi;
    energy += gi * gi;
  }
  const double scale = std::sqrt(power / energy);
  for (auto& gi : g) gi *= scale;

  // Low-rate samples cover [-1, n_low + 2] for the cubic stencil.
  const std::size_t n_low = (n + decim - 1) / decim + 4;
  CVec white(n_low + g.size() - 1);
  for (auto& w : white) w = complex_normal(rng, 1.0);
  CVec low(n_low);
  for (std::size_t j = 0; j < n_low; ++j) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * white[j + i];
    low[j] = acc;
  }

  CVec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = k / decim + 1;
    const double u = static_cast<double>(k % decim) / static_cast<double>(decim);
    const cplx p0 = low[i - 1], p1 = low[i], p2 = low[i + 1], p3 = low[i + 2];
    // Catmull-Rom spline through p1..p2.
    out[k] = 0.5 * ((2.0 * p1) + (-p0 + p2) * u +
                    (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (u * u) +
                    (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * (u * u * u));
  }
  return out;
}

void normalize_blocks(std::vector<CVec>& paths) {
  const std::size_t blocks = paths.front().size();
  for (std::size_t b = 0; b < blocks; ++b) {
    double p = 0.0;
    for (const auto& path : paths) p += std::norm(path[b]);
    if (p <= 0.0) continue;
    const double s = 1.0 / std::sqrt(p);
    for (auto& path : paths) path[b] *= s;
  }
}

}  // namespace

ChannelModelId parse_channel_model(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (s == "1" || s == "model1") return ChannelModelId::Model1;
  if (s == "2" || s == "model2") return ChannelModelId::Model2;
  if (s == "3" || s == "model3") return ChannelModelId::Model3;
  throw std::invalid_argument("unknown channel model '" + std::string(name) + "'");
}

std::string_view to_string(ChannelModelId m) noexcept {
  switch (m) {
    case ChannelModelId::Model1: return "model1";
    case ChannelModelId::Model2: return "model2";
    case ChannelModelId::Model3: return "model3";
  }
  return "?";
}

cplx ChannelProcess::tap(std::size_t k, int l) const {
  if (k >= n_symbols)
    throw std::out_of_range("ChannelProcess::tap: symbol index " +
                            std::to_string(k) + " beyond " +
                            std::to_string(n_symbols));
  for (std::size_t i = 0; i < delay_profile.size(); ++i)
    if (delay_profile[i] == l) {
      const CVec& p = paths[i];
      return p[std::min(k / block_length, p.size() - 1)];
    }
  return {};
}

CVec ChannelProcess::taps_at(std::size_t k) const {
  CVec c(static_cast<std::size_t>(l_c + 1), 0.0);
  for (std::size_t i = 0; i < delay_profile.size(); ++i)
    c[static_cast<std::size_t>(delay_profile[i])] = tap(k, delay_profile[i]);
  return c;
}

ChannelProcess make_model1(std::uint64_t seed, std::size_t n_symbols,
                           const Model1Params& params) {
  if (n_symbols < 1) throw std::invalid_argument("make_model1: n_symbols must be >= 1");
  if (params.l_c < 1) throw std::invalid_argument("make_model1: l_c must be >= 1");
  if (params.doppler_hz < 0.0 || params.symbol_rate <= 0.0)
    throw std::invalid_argument("make_model1: invalid Doppler or symbol rate");
  ChannelProcess ch;
  ch.model = ChannelModelId::Model1;
  ch.l_c = params.l_c;
  ch.delay_profile = {0, params.l_c};
  ch.n_symbols = n_symbols;
  ch.doppler_hz = params.doppler_hz;
  ch.symbol_rate = params.symbol_rate;
  const double sigma_d = params.convention == DopplerConvention::TwoSided
                             ? params.doppler_hz / 2.0
                             : params.doppler_hz;
  ch.block_length = sigma_d > 0.0 ? 1 : n_symbols;
  for (std::uint64_t p = 0; p < 2; ++p) {
    Rng rng = make_stream(seed, 0x4d31, p);
    ch.paths.push_back(gaussian_doppler_path(rng, n_symbols, sigma_d,
                                             params.symbol_rate,
                                             params.samples_per_coherence, 0.5));
  }
  return ch;
}

ChannelProcess make_model2(std::uint64_t seed, int l_c, std::size_t n_symbols,
                           bool normalize) {
  if (l_c < 1) throw std::invalid_argument("make_model2: l_c must be >= 1");
  ChannelProcess ch;
  ch.model = ChannelModelId::Model2;
  ch.l_c = l_c;
  ch.delay_profile = {0, l_c};
  ch.n_symbols = n_symbols;
  ch.block_length = std::max<std::size_t>(n_symbols, 1);
  Rng rng = make_stream(seed, 0x4d32);
  ch.paths = {CVec{complex_normal(rng, 0.5)}, CVec{complex_normal(rng, 0.5)}};
  if (normalize) normalize_blocks(ch.paths);
  return ch;
}

ChannelProcess make_model3(std::uint64_t seed, std::size_t n_frames,
                           const Model3Params& params) {
  if (params.l_c < 0) throw std::invalid_argument("make_model3: l_c must be >= 0");
  if (params.frame_length < 1 || n_frames < 1)
    throw std::invalid_argument("make_model3: empty superframe");
  ChannelProcess ch;
  ch.model = ChannelModelId::Model3;
  ch.l_c = params.l_c;
  ch.n_symbols = n_frames * params.frame_length;
  ch.block_length = 2 * params.frame_length;
  const std::size_t n_taps = static_cast<std::size_t>(params.l_c + 1);
  std::vector<double> profile(n_taps, 1.0);
  if (params.exp_decay > 0.0)
    for (std::size_t l = 0; l < n_taps; ++l)
      profile[l] = std::exp(-static_cast<double>(l) / params.exp_decay);
  double total = 0.0;
  for (double p : profile) total += p;
  const std::size_t blocks = (n_frames + 1) / 2;
  Rng rng = make_stream(seed, 0x4d33);
  ch.paths.assign(n_taps, CVec(blocks));
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t l = 0; l < n_taps; ++l)
      ch.paths[l][b] = complex_normal(rng, profile[l] / total);
  for (std::size_t l = 0; l < n_taps; ++l)
    ch.delay_profile.push_back(static_cast<int>(l));
  if (params.normalize) normalize_blocks(ch.paths);
  return ch;
}

int make_lc(double delay_spread_ms, double symbol_rate, double tau,
            std::string* warning) {
  if (delay_spread_ms < 0.0 || symbol_rate <= 0.0 || tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("make_lc: invalid arguments");
  const double exact = delay_spread_ms * 1e-3 * symbol_rate / tau;
  const long lc = std::lround(exact);
  if (warning) {
    warning->clear();
    if (std::abs(exact - static_cast<double>(lc)) > 0.05 * std::max(1.0, exact))
      *warning = "delay spread spans " + std::to_string(exact) +
                 " symbol intervals; rounded to " + std::to_string(lc);
  }
  return static_cast<int>(lc);
}

CVec apply_channel(std::span<const cplx> x, const ChannelProcess& ch,
                   std::size_t start) {
  if (start + x.size() > ch.n_symbols)
    throw std::invalid_argument("apply_channel: " + std::to_string(start + x.size()) +
                                " symbols exceed channel length " +
                                std::to_string(ch.n_symbols));
  CVec y(x.size(), 0.0);
  for (std::size_t i = 0; i < ch.delay_profile.size(); ++i) {
    const std::size_t l = static_cast<std::size_t>(ch.delay_profile[i]);
    const CVec& path = ch.paths[i];
    for (std::size_t k = l; k < x.size(); ++k) {
      const std::size_t b = std::min((start + k) / ch.block_length, path.size() - 1);
      y[k] += path[b] * x[k - l];
    }
  }
  return y;
}

CVec apply_channel(std::span<const cplx> x, const ChannelProcess& ch,
                   double noise_sigma, Rng& rng, std::size_t start) {
  CVec y = apply_channel(x, ch, start);
  if (noise_sigma > 0.0) {
    const double var = noise_sigma * noise_sigma;
    for (auto& v : y) v += complex_normal(rng, var);
  }
  return y;
}

void write_channel_csv(std::ostream& os, const ChannelProcess& ch,
                       std::size_t max_symbols) {
  os << "k,l,re,im\n";
  const std::size_t n = std::min(max_symbols, ch.n_symbols);
  os.precision(17);
  for (std::size_t k = 0; k < n; ++k)
    for (int l : ch.delay_profile) {
      const cplx c = ch.tap(k, l);
      os << k << ',' << l << ',' << c.real() << ',' << c.imag() << '\n';
    }
}

}  // namespace imftn
