#include "imftn/types.hpp"

#include <cmath>

namespace imftn {

cplx TapSet::at_lag(long k) const noexcept {
  const long idx = k + static_cast<long>(center);
  if (idx < 0 || idx >= static_cast<long>(taps.size())) return {};
  return taps[static_cast<std::size_t>(idx)];
}

void TapSet::validate() const {
  if (taps.empty()) throw std::invalid_argument("TapSet: empty tap vector");
  if (center >= taps.size())
    throw std::invalid_argument("TapSet: center index outside tap vector");
  for (const auto& t : taps)
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
      throw std::invalid_argument("TapSet: non-finite tap");
}

}  // namespace imftn
