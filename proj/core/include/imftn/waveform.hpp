#pragma once

#include <span>

#include "imftn/types.hpp"

namespace imftn {

/// Symbol-spaced FTN pulse description. T is normalized to 1, so ISI taps are
/// the raised-cosine pulse sampled at multiples of tau.
struct PulseConfig {
  double beta = 0.35;
  double tau = 1.0;
  int l_h = 1;

  void validate() const;
};

/// Raised-cosine pulse RC(t) for symbol period 1 and roll-off beta. This is
/// the autocorrelation of a unit-energy root-raised-cosine pulse, RC(0) = 1.
double raised_cosine(double t, double beta) noexcept;

/// Smallest L_h whose 2L_h+1 taps hold at least `energy_fraction` of the
/// total sum of h_k^2.
int default_isi_half_length(double tau, double beta,
                            double energy_fraction = 0.9999);

/// h_k = RC(k tau) for k = -L_h..L_h, center index L_h.
TapSet rc_isi_taps(const PulseConfig& cfg);

/// Frequency grid used for spectral factorization.
inline constexpr std::size_t kSpectralGrid = 4096;

/// Minimum-phase factor of the truncated ISI spectrum, sampled on the
/// spectral grid. `factor` is the full causal impulse response (length
/// kSpectralGrid); `min_relative` is min H / max H before flooring.
struct SpectralFactor {
  CVec factor;
  double min_relative = 0.0;
};

/// Cepstral minimum-phase factorization of the truncated RC sequence.
/// Small negative excursions caused by truncation are floored at
/// `floor_fraction` of the spectral peak. Throws NumericalError when the
/// spectrum dips below -`reject_fraction` of the peak.
SpectralFactor spectral_factor(const PulseConfig& cfg,
                               double floor_fraction = 1e-3,
                               double reject_fraction = 0.05);

/// Causal whitening taps v_0..v_{L_h-1}: the first L_h samples of the
/// minimum-phase factor, so that h_k ~= sum_j v_j conj(v_{j+k}).
TapSet whitening_filter(const PulseConfig& cfg);

/// Receiver-side whitening filter: the anticausal inverse of the conjugate
/// factor, truncated to the smallest support holding `energy_fraction` of
/// its energy. Applied to the matched-filter output it leaves white noise
/// and the composite response s * c * v.
TapSet whitening_receiver_filter(const PulseConfig& cfg,
                                 double energy_fraction = 1.0 - 1e-7);

/// Zero-phase FIR whose autocorrelation equals the (nonnegative part of the)
/// truncated ISI spectrum. Filtering unit white noise with it yields noise
/// with covariance G_{mn} ~= h_{m-n}.
TapSet colored_noise_shaper(const PulseConfig& cfg,
                            double energy_fraction = 1.0 - 1e-9);

/// Same-length convolution: y_k = sum_i f_i x_{k - i + center}, samples
/// outside x read as zero.
CVec apply_fir(std::span<const cplx> x, const TapSet& f);

}  // namespace imftn
