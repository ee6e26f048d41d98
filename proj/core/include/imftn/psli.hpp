#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "imftn/framing.hpp"
#include "imftn/types.hpp"

namespace imftn {

/// Pilot as seen after ISI and whitening, with its squared autocorrelation.
struct WhitenedPilot {
  CVec p_tilde;
  std::vector<double> autocorr_sq;  // |R_pp(delta)|^2, delta = 0..N_p-1

  std::size_t size() const noexcept { return p_tilde.size(); }
};

/// p~_k = sum_j p_j v_{k-j} for k = 0..N_p-1, with v a causal tap set.
WhitenedPilot whitened_pilot(std::span<const cplx> pilot, const TapSet& v);

/// |sum_m r~_{delta+m} conj(p~_m)|^2. Throws std::out_of_range when the
/// window runs past the end of r~.
double corr_sq(std::span<const cplx> r_tilde, const WhitenedPilot& wp,
               std::size_t delta);

std::map<std::size_t, double> cross_corr_sq(std::span<const cplx> r_tilde,
                                            const WhitenedPilot& wp,
                                            std::span<const std::size_t> deltas);

/// Lazily evaluated |R_rp(delta)|^2 for delta in [0, delta_max] with
/// delta_max = len(r~) - N_p. Each lag is computed at most once.
class CorrelationField {
 public:
  CorrelationField(std::span<const cplx> r_tilde, const WhitenedPilot& wp);

  double operator()(std::size_t delta) const;
  std::size_t delta_max() const noexcept { return delta_max_; }

 private:
  std::span<const cplx> r_;
  const WhitenedPilot* wp_;
  std::size_t delta_max_;
  mutable std::vector<double> cache_;
};

/// Mean of the values in [max(delta - r0, lo), min(delta + r0, hi)] other
/// than the one at delta. `values` is any callable size_t -> double.
template <class Values>
double local_lambda(const Values& values, std::size_t delta, int r0,
                    std::size_t delta_min, std::size_t delta_max) {
  if (delta < delta_min || delta > delta_max)
    throw std::out_of_range("local_lambda: delta outside [delta_min, delta_max]");
  const std::size_t r = static_cast<std::size_t>(std::max(r0, 0));
  const std::size_t lo = delta >= delta_min + r ? delta - r : delta_min;
  const std::size_t hi = std::min(delta + r, delta_max);
  if (hi == lo) throw std::invalid_argument("local_lambda: zero-width window");
  double sum = 0.0;
  for (std::size_t j = lo; j <= hi; ++j) sum += values(j);
  return (sum - values(delta)) / static_cast<double>(hi - lo);
}

/// Map-backed overload; every lag in the window must be present.
double local_lambda(const std::map<std::size_t, double>& values,
                    std::size_t delta, int r0, std::size_t delta_min,
                    std::size_t delta_max);

/// mu = (values[d0] + values[dL]) / (lambda(d0) + lambda(dL)); +inf when
/// the denominator is zero.
template <class Values>
double measure_mu(const Values& values, std::size_t d0, std::size_t d_l,
                  int r0, std::size_t delta_min, std::size_t delta_max) {
  const double den = local_lambda(values, d0, r0, delta_min, delta_max) +
                     local_lambda(values, d_l, r0, delta_min, delta_max);
  const double num = values(d0) + values(d_l);
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

double measure_mu(const std::map<std::size_t, double>& values, std::size_t d0,
                  std::size_t d_l, int r0, std::size_t delta_min,
                  std::size_t delta_max);

struct DetectorConfig {
  double c1 = 0.5;
  double c2 = 1.0;
  /// Local radius; negative selects L_c - 1.
  int r0 = -1;

  int radius(int l_c) const noexcept { return r0 < 0 ? l_c - 1 : r0; }
  void validate(int l_c) const;
};

/// Per-candidate record for diagnostics.
struct CandidateTrace {
  std::size_t delta = 0;
  std::size_t d0 = 0;
  std::size_t d_l = 0;
  double mu = 0.0;
  bool accepted = false;
};

struct IdentifyTrace {
  std::map<std::size_t, double> expected_values;
  double peak = 0.0;
  std::vector<CandidateTrace> candidates;
};

/// Pilot-location identification over one frame of whitened samples.
/// Candidates are visited in ascending delta; the location with the peak
/// correlation is always a candidate.
std::size_t identify(std::span<const cplx> r_tilde, const WhitenedPilot& wp,
                     const PlacementSet& ps, const DetectorConfig& cfg,
                     IdentifyTrace* trace = nullptr);

/// psi(delta) = |R_pp(delta)|^2 / lambda(delta) over the pilot
/// autocorrelation; diagnostic only.
std::vector<double> local_autocorr_characteristic(const WhitenedPilot& wp,
                                                  int r0);

/// CSV rows `delta,corr_sq,expected` for delta in [0, delta_max].
void write_correlation_csv(std::ostream& os, std::span<const cplx> r_tilde,
                           const WhitenedPilot& wp, const PlacementSet& ps);

}  // namespace imftn
