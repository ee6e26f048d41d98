#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "imftn/modem.hpp"
#include "imftn/types.hpp"

namespace imftn {

/// Pilot sequence with its precomputed least-squares machinery.
struct PilotDesign {
  CVec pilot;
  std::vector<int> labels;   // constellation labels, empty if unknown
  Eigen::MatrixXcd t_matrix;  // (N_p - L_h - L_c + 1) x (L_h + L_c)
  Eigen::MatrixXcd v_matrix;  // (L_h + L_c) x (L_c + 1)
  Eigen::MatrixXcd pinv;      // (L_c + 1) x (N_p - L_h - L_c + 1)
  double predicted_mse = 0.0;  // at sigma^2 = 1
  int l_h = 0;
  int l_c = 0;

  std::size_t n_p() const noexcept { return pilot.size(); }
  /// Offset of the first useful pilot sample from the pilot start.
  std::size_t useful_offset() const noexcept {
    return static_cast<std::size_t>(l_h + l_c - 1);
  }
  std::size_t useful_length() const noexcept {
    return static_cast<std::size_t>(t_matrix.rows());
  }
};

/// T(r, j) = p[L_h + L_c - 1 + r - j].
Eigen::MatrixXcd pilot_toeplitz(std::span<const cplx> pilot, int l_h, int l_c);
/// V(m, l) = v[m - l] for 0 <= m - l < L_h.
Eigen::MatrixXcd isi_matrix(const TapSet& v, int l_h, int l_c);

/// Throws std::invalid_argument if N_p <= L_h + L_c - 1 and NumericalError if
/// T V does not have full column rank.
PilotDesign build_design(std::span<const cplx> pilot, const TapSet& v, int l_h,
                         int l_c);

struct ChannelEstimate {
  CVec c_hat;
  std::size_t frame_index = 0;
  std::vector<CVec> per_symbol;
};

/// c_hat = pinv * r_p, with r_p the useful pilot segment.
ChannelEstimate lsse_estimate(std::span<const cplx> r_p,
                              const PilotDesign& design,
                              std::size_t frame_index = 0);

/// sigma^2 * trace(pinv pinv^H).
double mse_predict(const PilotDesign& design, double sigma_sq) noexcept;

/// trace(((TV)^H TV)^-1) for a candidate pilot; +inf when singular.
double pilot_mse(std::span<const cplx> pilot, const Eigen::MatrixXcd& v_matrix,
                 int l_h, int l_c);

/// Minimizes the predicted MSE over every sequence in the constellation.
/// Ties keep the lexicographically first label sequence. Throws
/// SearchSpaceError when M^N_p exceeds `limit`.
PilotDesign pilot_search_exhaustive(const Constellation& c, int n_p,
                                    const TapSet& v, int l_h, int l_c,
                                    std::uint64_t limit = 1ULL << 24);

struct RelaxedSearchOptions {
  int restarts = 100;
  std::uint64_t seed = 1;
  int workers = 1;
  int max_iterations = 500;
};

/// Multi-start continuous minimization over per-symbol phases, each result
/// rounded to the nearest constellation point. Every restart starts from a
/// random feasible sequence and keeps the better of start and rounded
/// optimum; the best restart wins (ties to the lower restart index).
PilotDesign pilot_search_relaxed(const Constellation& c, int n_p,
                                 const TapSet& v, int l_h, int l_c,
                                 const RelaxedSearchOptions& opt = {});

/// Objective and phase gradient used by the relaxed search; exposed for
/// testing. Returns +inf (gradient untouched) when singular.
double relaxed_objective(std::span<const double> phases,
                         const Eigen::MatrixXcd& v_matrix, int l_h, int l_c,
                         double* gradient);

/// c_{i,k} = c_i + k (c_next - c_i) / N_s for k = 0..N_s; the last row is
/// c_next exactly.
std::vector<CVec> interpolate(std::span<const cplx> c_i,
                              std::span<const cplx> c_next, std::size_t n_s);

/// Pilot files: one constellation label per line, '#' starts a comment.
void write_pilot_file(const std::filesystem::path& path,
                      const std::vector<int>& labels, const Constellation& c,
                      const std::string& comment = {});
std::vector<int> read_pilot_file(const std::filesystem::path& path,
                                 const Constellation& c);
CVec labels_to_symbols(const std::vector<int>& labels, const Constellation& c);

/// File name used by the design cache.
std::string design_cache_name(const Constellation& c, int n_p, double tau,
                              double beta, int l_h, int l_c);

}  // namespace imftn
