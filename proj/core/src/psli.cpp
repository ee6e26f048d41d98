#include "imftn/psli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace imftn {

namespace {

constexpr double kUnset = -1.0;

}  // namespace

WhitenedPilot whitened_pilot(std::span<const cplx> pilot, const TapSet& v) {
  WhitenedPilot wp;
  const std::size_t n = pilot.size();
  wp.p_tilde.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j <= k; ++j)
      acc += pilot[j] * v.at_lag(static_cast<long>(k - j));
    wp.p_tilde[k] = acc;
  }
  wp.autocorr_sq.assign(n, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k + d < n; ++k)
      acc += wp.p_tilde[k] * std::conj(wp.p_tilde[k + d]);
    wp.autocorr_sq[d] = std::norm(acc);
  }
  return wp;
}

double corr_sq(std::span<const cplx> r_tilde, const WhitenedPilot& wp,
               std::size_t delta) {
  const std::size_t n = wp.p_tilde.size();
  if (delta + n > r_tilde.size())
    throw std::out_of_range("corr_sq: delta " + std::to_string(delta) +
                            " + N_p exceeds received length " +
                            std::to_string(r_tilde.size()));
  cplx acc = 0.0;
  for (std::size_t m = 0; m < n; ++m)
    acc += r_tilde[delta + m] * std::conj(wp.p_tilde[m]);
  return std::norm(acc);
}

std::map<std::size_t, double> cross_corr_sq(std::span<const cplx> r_tilde,
                                            const WhitenedPilot& wp,
                                            std::span<const std::size_t> deltas) {
  std::map<std::size_t, double> out;
  for (std::size_t d : deltas) out[d] = corr_sq(r_tilde, wp, d);
  return out;
}

CorrelationField::CorrelationField(std::span<const cplx> r_tilde,
                                   const WhitenedPilot& wp)
    : r_(r_tilde), wp_(&wp) {
  if (r_tilde.size() < wp.size())
    throw std::invalid_argument("CorrelationField: received window shorter than pilot");
  delta_max_ = r_tilde.size() - wp.size();
  cache_.assign(delta_max_ + 1, kUnset);
}

double CorrelationField::operator()(std::size_t delta) const {
  if (delta > delta_max_)
    throw std::out_of_range("CorrelationField: delta " + std::to_string(delta) +
                            " beyond " + std::to_string(delta_max_));
  double& v = cache_[delta];
  if (v == kUnset) v = corr_sq(r_, *wp_, delta);
  return v;
}

double local_lambda(const std::map<std::size_t, double>& values,
                    std::size_t delta, int r0, std::size_t delta_min,
                    std::size_t delta_max) {
  auto get = [&values](std::size_t j) {
    auto it = values.find(j);
    if (it == values.end())
      throw std::out_of_range("local_lambda: no value at lag " + std::to_string(j));
    return it->second;
  };
  return local_lambda(get, delta, r0, delta_min, delta_max);
}

double measure_mu(const std::map<std::size_t, double>& values, std::size_t d0,
                  std::size_t d_l, int r0, std::size_t delta_min,
                  std::size_t delta_max) {
  auto get = [&values](std::size_t j) {
    auto it = values.find(j);
    if (it == values.end())
      throw std::out_of_range("measure_mu: no value at lag " + std::to_string(j));
    return it->second;
  };
  return measure_mu(get, d0, d_l, r0, delta_min, delta_max);
}

void DetectorConfig::validate(int l_c) const {
  if (!(c1 > 0.0 && c1 <= 1.0))
    throw std::invalid_argument("DetectorConfig: c1 must lie in (0, 1]");
  if (!(c2 > 0.0)) throw std::invalid_argument("DetectorConfig: c2 must be > 0");
  const int r = radius(l_c);
  if (r < 1 || r >= l_c)
    throw std::invalid_argument("DetectorConfig: r0 = " + std::to_string(r) +
                                " must satisfy 1 <= r0 < L_c");
}

std::size_t identify(std::span<const cplx> r_tilde, const WhitenedPilot& wp,
                     const PlacementSet& ps, const DetectorConfig& cfg,
                     IdentifyTrace* trace) {
  const CorrelationField field(r_tilde, wp);
  const std::size_t dmax = field.delta_max();
  const int r0 = cfg.radius(ps.l_c);
  const std::size_t l_c = static_cast<std::size_t>(ps.l_c);

  double peak = -1.0;
  std::size_t peak_at = 0;
  for (std::size_t d : ps.expected) {
    const double v = field(d);
    if (v > peak) {
      peak = v;
      peak_at = d;
    }
  }
  const double th1 = cfg.c1 * peak;

  if (trace) {
    trace->expected_values.clear();
    trace->candidates.clear();
    for (std::size_t d : ps.expected) trace->expected_values[d] = field(d);
    trace->peak = peak;
  }

  std::size_t n_hat = 0;
  double th2 = 0.0;
  std::size_t last_d0 = static_cast<std::size_t>(-1);
  for (std::size_t d : ps.expected) {
    if (!(field(d) > th1) && d != peak_at) continue;
    const std::size_t d0 = d - d % ps.stride;
    if (d0 == last_d0) continue;
    last_d0 = d0;
    const std::size_t d_l = std::min(d0 + l_c, dmax);
    const double mu = measure_mu(field, d0, d_l, r0, 0, dmax);
    const bool accept = mu > th2;
    if (accept) {
      th2 = cfg.c2 * mu;
      n_hat = d0;
    }
    if (trace) trace->candidates.push_back({d, d0, d_l, mu, accept});
  }
  return n_hat;
}

std::vector<double> local_autocorr_characteristic(const WhitenedPilot& wp,
                                                  int r0) {
  const auto& a = wp.autocorr_sq;
  auto get = [&a](std::size_t j) { return a[j]; };
  std::vector<double> psi(a.size(), 0.0);
  if (a.size() < 2) return psi;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double lam = local_lambda(get, d, r0, 0, a.size() - 1);
    psi[d] = lam == 0.0 ? std::numeric_limits<double>::infinity() : a[d] / lam;
  }
  return psi;
}

void write_correlation_csv(std::ostream& os, std::span<const cplx> r_tilde,
                           const WhitenedPilot& wp, const PlacementSet& ps) {
  const CorrelationField field(r_tilde, wp);
  os << "delta,corr_sq,expected\n";
  os.precision(17);
  for (std::size_t d = 0; d <= field.delta_max(); ++d) {
    const bool expected =
        std::binary_search(ps.expected.begin(), ps.expected.end(), d);
    os << d << ',' << field(d) << ',' << (expected ? 1 : 0) << '\n';
  }
}

}  // namespace imftn
