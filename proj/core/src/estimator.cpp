#include "imftn/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <ceres/ceres.h>
#include <glog/logging.h>

#include "imftn/rng.hpp"

namespace imftn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// trace(G^-1) of the Gram matrix, or +inf if not positive definite.
double gram_trace_inverse(const Eigen::MatrixXcd& a, Eigen::MatrixXcd* g_inv) {
  const Eigen::MatrixXcd g = a.adjoint() * a;
  Eigen::LLT<Eigen::MatrixXcd> llt(g);
  if (llt.info() != Eigen::Success) return kInf;
  Eigen::MatrixXcd inv = llt.solve(
      Eigen::MatrixXcd::Identity(g.rows(), g.cols()));
  const double tr = inv.trace().real();
  if (!std::isfinite(tr) || tr <= 0.0) return kInf;
  if (g_inv) *g_inv = std::move(inv);
  return tr;
}

class PhaseObjective final : public ceres::FirstOrderFunction {
 public:
  PhaseObjective(const Eigen::MatrixXcd& v_matrix, int n_p, int l_h, int l_c)
      : v_(v_matrix), n_p_(n_p), l_h_(l_h), l_c_(l_c) {}

  bool Evaluate(const double* parameters, double* cost,
                double* gradient) const override {
    const double f = relaxed_objective(
        std::span<const double>(parameters, static_cast<std::size_t>(n_p_)), v_,
        l_h_, l_c_, gradient);
    if (!std::isfinite(f)) return false;
    *cost = f;
    return true;
  }

  int NumParameters() const override { return n_p_; }

 private:
  const Eigen::MatrixXcd& v_;
  int n_p_, l_h_, l_c_;
};

struct RestartResult {
  std::vector<int> labels;
  double mse = kInf;
};

RestartResult run_restart(const Constellation& c, int n_p,
                          const Eigen::MatrixXcd& v_matrix, int l_h, int l_c,
                          const RelaxedSearchOptions& opt, int restart) {
  Rng rng = make_stream(opt.seed, 0x5053, static_cast<std::uint64_t>(restart));
  std::vector<int> start(static_cast<std::size_t>(n_p));
  for (auto& s : start) s = static_cast<int>(uniform_index(rng, c.size()));

  RestartResult best;
  best.labels = start;
  best.mse = pilot_mse(labels_to_symbols(start, c), v_matrix, l_h, l_c);

  // Jitter inside each decision sector: a PSK vertex is a stationary point
  // of the objective whenever pilot and ISI are real.
  const double sector = 2.0 * std::numbers::pi / static_cast<double>(c.size());
  std::vector<double> phases(start.size());
  for (std::size_t i = 0; i < start.size(); ++i)
    phases[i] = std::arg(c.points[static_cast<std::size_t>(start[i])]) +
                0.9 * sector * (uniform01(rng) - 0.5);

  // Ceres reports recoverable BFGS resets through glog; keep stderr quiet.
  static const bool quiet = [] {
    FLAGS_minloglevel = 2;
    return true;
  }();
  (void)quiet;

  ceres::GradientProblem problem(new PhaseObjective(v_matrix, n_p, l_h, l_c));
  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::BFGS;
  options.max_num_iterations = opt.max_iterations;
  options.logging_type = ceres::SILENT;
  options.minimizer_progress_to_stdout = false;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, phases.data(), &summary);
  if (!summary.IsSolutionUsable()) return best;

  std::vector<int> rounded(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i)
    rounded[i] = static_cast<int>(c.nearest(std::polar(1.0, phases[i])));
  const double mse = pilot_mse(labels_to_symbols(rounded, c), v_matrix, l_h, l_c);
  if (mse < best.mse) {
    best.labels = std::move(rounded);
    best.mse = mse;
  }
  return best;
}

}  // namespace

Eigen::MatrixXcd pilot_toeplitz(std::span<const cplx> pilot, int l_h, int l_c) {
  const int n_p = static_cast<int>(pilot.size());
  const int rows = n_p - l_h - l_c + 1;
  const int cols = l_h + l_c;
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("pilot_toeplitz: N_p = " + std::to_string(n_p) +
                                " must exceed L_h + L_c - 1 = " +
                                std::to_string(l_h + l_c - 1));
  Eigen::MatrixXcd t(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < cols; ++j)
      t(r, j) = pilot[static_cast<std::size_t>(l_h + l_c - 1 + r - j)];
  return t;
}

Eigen::MatrixXcd isi_matrix(const TapSet& v, int l_h, int l_c) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(l_h + l_c, l_c + 1);
  for (int l = 0; l <= l_c; ++l)
    for (int i = 0; i < l_h; ++i) m(l + i, l) = v.at_lag(i);
  return m;
}

PilotDesign build_design(std::span<const cplx> pilot, const TapSet& v, int l_h,
                         int l_c) {
  if (l_h < 1 || l_c < 0)
    throw std::invalid_argument("build_design: need L_h >= 1 and L_c >= 0");
  PilotDesign d;
  d.pilot.assign(pilot.begin(), pilot.end());
  d.l_h = l_h;
  d.l_c = l_c;
  d.t_matrix = pilot_toeplitz(pilot, l_h, l_c);
  d.v_matrix = isi_matrix(v, l_h, l_c);
  const Eigen::MatrixXcd a = d.t_matrix * d.v_matrix;
  if (a.rows() < a.cols())
    throw NumericalError("build_design: T V has fewer rows than channel taps");

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 1e-10 * s(0))
    throw NumericalError("build_design: T V is rank deficient");
  const Eigen::VectorXd s_inv = s.cwiseInverse();
  d.pinv = svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().adjoint();
  d.predicted_mse = d.pinv.squaredNorm();
  return d;
}

ChannelEstimate lsse_estimate(std::span<const cplx> r_p,
                              const PilotDesign& design,
                              std::size_t frame_index) {
  if (static_cast<Eigen::Index>(r_p.size()) != design.pinv.cols())
    throw std::invalid_argument("lsse_estimate: expected " +
                                std::to_string(design.pinv.cols()) +
                                " useful samples, got " + std::to_string(r_p.size()));
  const Eigen::Map<const Eigen::VectorXcd> r(r_p.data(),
                                             static_cast<Eigen::Index>(r_p.size()));
  const Eigen::VectorXcd c = design.pinv * r;
  ChannelEstimate e;
  e.c_hat.assign(c.data(), c.data() + c.size());
  e.frame_index = frame_index;
  return e;
}

double mse_predict(const PilotDesign& design, double sigma_sq) noexcept {
  return sigma_sq * design.pinv.squaredNorm();
}

double pilot_mse(std::span<const cplx> pilot, const Eigen::MatrixXcd& v_matrix,
                 int l_h, int l_c) {
  return gram_trace_inverse(pilot_toeplitz(pilot, l_h, l_c) * v_matrix, nullptr);
}

double relaxed_objective(std::span<const double> phases,
                         const Eigen::MatrixXcd& v_matrix, int l_h, int l_c,
                         double* gradient) {
  CVec p(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i) p[i] = std::polar(1.0, phases[i]);
  const Eigen::MatrixXcd a = pilot_toeplitz(p, l_h, l_c) * v_matrix;
  Eigen::MatrixXcd g_inv;
  const double f = gram_trace_inverse(a, &g_inv);
  if (!std::isfinite(f) || gradient == nullptr) return f;

  // d tr(G^-1) = -2 Re tr(G^-2 A^H dA), dA = dT V. T(r, j) depends on
  // p[n] with n = L_h + L_c - 1 + r - j, and dp_n / dtheta_n = i p_n.
  const Eigen::MatrixXcd w = v_matrix * (g_inv * g_inv) * a.adjoint();
  const int offset = l_h + l_c - 1;
  std::fill(gradient, gradient + phases.size(), 0.0);
  CVec acc(phases.size(), 0.0);
  for (Eigen::Index r = 0; r < w.cols(); ++r)
    for (Eigen::Index j = 0; j < w.rows(); ++j)
      acc[static_cast<std::size_t>(offset + r - j)] += w(j, r);
  const cplx i_unit(0.0, 1.0);
  for (std::size_t n = 0; n < phases.size(); ++n)
    gradient[n] = -2.0 * (i_unit * p[n] * acc[n]).real();
  return f;
}

PilotDesign pilot_search_exhaustive(const Constellation& c, int n_p,
                                    const TapSet& v, int l_h, int l_c,
                                    std::uint64_t limit) {
  if (n_p < 1) throw std::invalid_argument("pilot_search_exhaustive: N_p must be >= 1");
  const std::uint64_t m = c.size();
  std::uint64_t total = 1;
  for (int i = 0; i < n_p; ++i) {
    if (total > limit / m)
      throw SearchSpaceError("pilot_search_exhaustive: " + std::to_string(m) + "^" +
                             std::to_string(n_p) +
                             " sequences exceed the search budget; use the relaxed search");
    total *= m;
  }
  if (total > limit)
    throw SearchSpaceError("pilot_search_exhaustive: search space exceeds budget");

  const Eigen::MatrixXcd vm = isi_matrix(v, l_h, l_c);
  std::vector<int> labels(static_cast<std::size_t>(n_p), 0);
  std::vector<int> best_labels;
  double best = kInf;
  CVec p(labels.size());
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t x = idx;
    for (int i = n_p - 1; i >= 0; --i) {
      labels[static_cast<std::size_t>(i)] = static_cast<int>(x % m);
      x /= m;
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
      p[i] = c.points[static_cast<std::size_t>(labels[i])];
    const double mse = pilot_mse(p, vm, l_h, l_c);
    if (mse < best) {
      best = mse;
      best_labels = labels;
    }
  }
  if (best_labels.empty())
    throw NumericalError("pilot_search_exhaustive: every sequence is rank deficient");
  PilotDesign d = build_design(labels_to_symbols(best_labels, c), v, l_h, l_c);
  d.labels = std::move(best_labels);
  return d;
}

PilotDesign pilot_search_relaxed(const Constellation& c, int n_p,
                                 const TapSet& v, int l_h, int l_c,
                                 const RelaxedSearchOptions& opt) {
  if (opt.restarts < 1)
    throw std::invalid_argument("pilot_search_relaxed: restarts must be >= 1");
  if (n_p <= l_h + l_c - 1)
    throw std::invalid_argument("pilot_search_relaxed: N_p too short for L_h + L_c");
  const Eigen::MatrixXcd vm = isi_matrix(v, l_h, l_c);
  std::vector<RestartResult> results(static_cast<std::size_t>(opt.restarts));

  const int workers = std::clamp(opt.workers, 1, opt.restarts);
  auto job = [&](int w) {
    for (int r = w; r < opt.restarts; r += workers)
      results[static_cast<std::size_t>(r)] = run_restart(c, n_p, vm, l_h, l_c, opt, r);
  };
  if (workers == 1) {
    job(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(job, w);
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].mse < results[best].mse) best = r;
  if (!std::isfinite(results[best].mse))
    throw NumericalError("pilot_search_relaxed: no restart produced a full-rank design");
  PilotDesign d = build_design(labels_to_symbols(results[best].labels, c), v, l_h, l_c);
  d.labels = results[best].labels;
  return d;
}

std::vector<CVec> interpolate(std::span<const cplx> c_i,
                              std::span<const cplx> c_next, std::size_t n_s) {
  if (c_i.size() != c_next.size())
    throw std::invalid_argument("interpolate: tap vectors differ in length");
  if (n_s < 1) throw std::invalid_argument("interpolate: N_s must be >= 1");
  std::vector<CVec> out(n_s + 1, CVec(c_i.size()));
  for (std::size_t k = 0; k < n_s; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(n_s);
    for (std::size_t l = 0; l < c_i.size(); ++l)
      out[k][l] = c_i[l] + a * (c_next[l] - c_i[l]);
  }
  out[n_s].assign(c_next.begin(), c_next.end());
  return out;
}

CVec labels_to_symbols(const std::vector<int>& labels, const Constellation& c) {
  CVec out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c.size())
      throw std::invalid_argument("labels_to_symbols: label " + std::to_string(labels[i]) +
                                  " outside " + c.name);
    out[i] = c.points[static_cast<std::size_t>(labels[i])];
  }
  return out;
}

}  // namespace imftn
