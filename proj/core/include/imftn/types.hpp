#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace imftn {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using Bits = std::vector<std::uint8_t>;

/// Thrown when a numerical construction cannot be completed: an indefinite
/// ISI spectrum, a rank-deficient estimation matrix, and similar.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an exhaustive search would exceed its enumeration budget.
class SearchSpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system and parse failures; the message carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite complex tap vector. `center` is the index of the zero-lag tap, so
/// tap `i` sits at lag `i - center`. Causal sets use `center == 0`.
struct TapSet {
  CVec taps;
  std::size_t center = 0;

  std::size_t size() const noexcept { return taps.size(); }

  /// Tap at signed lag `k`; zero outside the support.
  cplx at_lag(long k) const noexcept;

  /// Throws std::invalid_argument when empty, non-finite or `center` is out
  /// of range.
  void validate() const;
};

}  // namespace imftn
