#include "imftn/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/FFT>

namespace imftn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long kDirectFirLimit = 64;

double sinc(double x) noexcept {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Real spectrum of the truncated, symmetric tap sequence on the FFT grid.
std::vector<double> isi_spectrum(const TapSet& h) {
  const std::size_t n = kSpectralGrid;
  const long lh = static_cast<long>(h.center);
  CVec x(n, 0.0);
  for (long k = -lh; k <= lh; ++k)
    x[static_cast<std::size_t>((k + static_cast<long>(n)) % static_cast<long>(n))] =
        h.at_lag(k);
  Eigen::FFT<double> fft;
  CVec spec;
  fft.fwd(spec, x);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = spec[i].real();
  return out;
}

// Smallest K such that lags 0..K (sign > 0) or -K..0 (sign < 0) hold the
// requested share of that half's energy.
std::size_t one_sided_support(const CVec& w, int sign, double energy_fraction) {
  const std::size_t n = w.size();
  double total = 0.0;
  for (std::size_t k = 0; k < n / 2; ++k)
    total += std::norm(w[sign > 0 ? k : (n - k) % n]);
  double acc = 0.0;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t idx = sign > 0 ? k : (n - k) % n;
    acc += std::norm(w[idx]);
    if (acc >= energy_fraction * total) return k;
  }
  return n / 2 - 1;
}

// Overlap-add convolution for long filters; same output convention as the
// direct loop.
CVec apply_fir_fft(std::span<const cplx> x, const TapSet& f) {
  const std::size_t m = f.taps.size();
  std::size_t nfft = 1;
  while (nfft < 4 * m) nfft <<= 1;
  const std::size_t block = nfft - m + 1;
  Eigen::FFT<double> fft;
  CVec taps(nfft, 0.0);
  std::copy(f.taps.begin(), f.taps.end(), taps.begin());
  CVec taps_f;
  fft.fwd(taps_f, taps);

  const std::size_t n = x.size();
  CVec full(n + m - 1, 0.0);
  CVec buf(nfft), spec, out;
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t len = std::min(block, n - start);
    std::fill(buf.begin(), buf.end(), cplx{});
    std::copy(x.begin() + static_cast<long>(start),
              x.begin() + static_cast<long>(start + len), buf.begin());
    fft.fwd(spec, buf);
    for (std::size_t i = 0; i < nfft; ++i) spec[i] *= taps_f[i];
    fft.inv(out, spec);
    const std::size_t valid = std::min(len + m - 1, full.size() - start);
    for (std::size_t i = 0; i < valid; ++i) full[start + i] += out[i];
  }
  CVec y(n);
  std::copy(full.begin() + static_cast<long>(f.center),
            full.begin() + static_cast<long>(f.center + n), y.begin());
  return y;
}

}  // namespace

void PulseConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("PulseConfig: tau must lie in (0, 1], got " +
                                std::to_string(tau));
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("PulseConfig: beta must lie in [0, 1], got " +
                                std::to_string(beta));
  if (l_h < 1)
    throw std::invalid_argument("PulseConfig: l_h must be >= 1, got " +
                                std::to_string(l_h));
}

double raised_cosine(double t, double beta) noexcept {
  if (beta > 0.0) {
    const double edge = 1.0 / (2.0 * beta);
    if (std::abs(std::abs(t) - edge) < 1e-10)
      return (kPi / 4.0) * sinc(edge);
  }
  const double bt = 2.0 * beta * t;
  return sinc(t) * std::cos(kPi * beta * t) / (1.0 - bt * bt);
}

int default_isi_half_length(double tau, double beta, double energy_fraction) {
  PulseConfig{beta, tau, 1}.validate();
  const int span = static_cast<int>(std::ceil(400.0 / tau));
  double total = 1.0;
  for (int k = 1; k <= span; ++k) {
    const double hk = raised_cosine(k * tau, beta);
    total += 2.0 * hk * hk;
  }
  double acc = 1.0;
  for (int k = 1; k <= span; ++k) {
    const double hk = raised_cosine(k * tau, beta);
    acc += 2.0 * hk * hk;
    if (acc >= energy_fraction * total) return k;
  }
  return span;
}

TapSet rc_isi_taps(const PulseConfig& cfg) {
  cfg.validate();
  TapSet h;
  h.center = static_cast<std::size_t>(cfg.l_h);
  h.taps.resize(2 * h.center + 1);
  for (int k = -cfg.l_h; k <= cfg.l_h; ++k)
    h.taps[static_cast<std::size_t>(k + cfg.l_h)] =
        k == 0 ? 1.0 : raised_cosine(k * cfg.tau, cfg.beta);
  return h;
}

SpectralFactor spectral_factor(const PulseConfig& cfg, double floor_fraction,
                               double reject_fraction) {
  const TapSet h = rc_isi_taps(cfg);
  std::vector<double> spec = isi_spectrum(h);
  const std::size_t n = spec.size();
  const double hmax = *std::max_element(spec.begin(), spec.end());
  const double hmin = *std::min_element(spec.begin(), spec.end());
  if (!(hmax > 0.0) || hmin < -reject_fraction * hmax)
    throw NumericalError(
        "whitening: truncated ISI spectrum is not factorizable (min/max = " +
        std::to_string(hmin / hmax) + ")");

  CVec logspec(n);
  for (std::size_t i = 0; i < n; ++i)
    logspec[i] = std::log(std::max(spec[i], floor_fraction * hmax));

  Eigen::FFT<double> fft;
  CVec cep;
  fft.inv(cep, logspec);

  // Fold the real cepstrum onto positive quefrencies.
  CVec folded(n, 0.0);
  folded[0] = cep[0].real() / 2.0;
  for (std::size_t i = 1; i < n / 2; ++i) folded[i] = cep[i].real();
  folded[n / 2] = cep[n / 2].real() / 2.0;

  CVec logfactor;
  fft.fwd(logfactor, folded);
  for (auto& z : logfactor) z = std::exp(z);

  SpectralFactor out;
  fft.inv(out.factor, logfactor);
  out.min_relative = hmin / hmax;
  return out;
}

TapSet whitening_filter(const PulseConfig& cfg) {
  const SpectralFactor sf = spectral_factor(cfg);
  TapSet v;
  v.center = 0;
  v.taps.assign(sf.factor.begin(), sf.factor.begin() + cfg.l_h);
  for (auto& z : v.taps)
    if (std::abs(z.imag()) < 1e-14) z = {z.real(), 0.0};
  return v;
}

TapSet whitening_receiver_filter(const PulseConfig& cfg,
                                 double energy_fraction) {
  const SpectralFactor sf = spectral_factor(cfg);
  Eigen::FFT<double> fft;
  CVec spec;
  fft.fwd(spec, sf.factor);
  for (auto& z : spec) z = 1.0 / std::conj(z);
  CVec w;
  fft.inv(w, spec);

  const std::size_t k = one_sided_support(w, -1, energy_fraction);
  const std::size_t n = w.size();
  TapSet f;
  f.center = k;
  f.taps.resize(k + 1);
  for (std::size_t lag = 0; lag <= k; ++lag)
    f.taps[k - lag] = w[(n - lag) % n];
  return f;
}

TapSet colored_noise_shaper(const PulseConfig& cfg, double energy_fraction) {
  const TapSet h = rc_isi_taps(cfg);
  const std::vector<double> spec = isi_spectrum(h);
  CVec root(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i)
    root[i] = std::sqrt(std::max(spec[i], 0.0));
  Eigen::FFT<double> fft;
  CVec g;
  fft.inv(g, root);

  const std::size_t k = one_sided_support(g, +1, energy_fraction);
  const std::size_t n = g.size();
  TapSet f;
  f.center = k;
  f.taps.resize(2 * k + 1);
  for (long lag = -static_cast<long>(k); lag <= static_cast<long>(k); ++lag)
    f.taps[static_cast<std::size_t>(lag + static_cast<long>(k))] =
        g[static_cast<std::size_t>((lag + static_cast<long>(n)) %
                                   static_cast<long>(n))].real();
  return f;
}

CVec apply_fir(std::span<const cplx> x, const TapSet& f) {
  const long n = static_cast<long>(x.size());
  const long c = static_cast<long>(f.center);
  const long m = static_cast<long>(f.taps.size());
  if (m > kDirectFirLimit && n > m) return apply_fir_fft(x, f);
  CVec y(x.size(), 0.0);
  for (long k = 0; k < n; ++k) {
    // x index j = k - i + c must lie in [0, n).
    const long i_lo = std::max(0L, k + c - n + 1);
    const long i_hi = std::min(m - 1, k + c);
    cplx acc = 0.0;
    for (long i = i_lo; i <= i_hi; ++i)
      acc += f.taps[static_cast<std::size_t>(i)] *
             x[static_cast<std::size_t>(k - i + c)];
    y[static_cast<std::size_t>(k)] = acc;
  }
  return y;
}

}  // namespace imftn
