#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "twoscale/direct.hpp"
#include "twoscale/error.hpp"
#include "twoscale/grid.hpp"
#include "twoscale/homogenized.hpp"
#include "twoscale/reconstruction.hpp"

namespace twoscale {

// ---------------------------------------------------------------------------
// Built-in initial data: u₀ = 1 + cos(x)/2, ρ₀ = 1 + sin(x)/2

inline double default_u0(double x) { return 1.0 + std::cos(x) / 2.0; }
inline double default_rho0(double x) { return 1.0 + std::sin(x) / 2.0; }

struct InitialData {
  PeriodicField u0;
  PeriodicField rho0;
};

inline InitialData default_initial_data(const GridSpec& grid) {
  return {sample_field(grid, default_u0), sample_field(grid, default_rho0)};
}

// ---------------------------------------------------------------------------
// Exact pre-shock solution of ∂t q + ∂x(α q² + β q) = 0 by characteristics

/// Solves q = q0(x − (2αq + β)t) for smooth periodic q0. Queries past 0.99 of
/// the characteristic-crossing time are refused.
class CharacteristicsOracle {
 public:
  using Profile = std::function<double(double)>;

  static constexpr double shock_guard = 0.99;
  static constexpr double residual_tolerance = 1e-12;

  CharacteristicsOracle(Profile q0, double alpha, double beta, std::size_t probes = 1 << 14)
      : q0_(std::move(q0)), alpha_(alpha), beta_(beta) {
    if (probes < 16) throw std::invalid_argument("CharacteristicsOracle: too few probes");
    const double dx = two_pi / static_cast<double>(probes);
    double prev = q0_(0.0);
    const double first = prev;
    lo_ = hi_ = prev;
    double max_neg_slope = 0.0;
    for (std::size_t j = 1; j <= probes; ++j) {
      const double v = j == probes ? first : q0_(static_cast<double>(j) * dx);
      if (!std::isfinite(v)) throw std::invalid_argument("CharacteristicsOracle: non-finite q0");
      lo_ = std::min(lo_, v);
      hi_ = std::max(hi_, v);
      max_neg_slope = std::max(max_neg_slope, -(v - prev) / dx);
      prev = v;
    }
    const double steepening = 2.0 * alpha_ * max_neg_slope;
    crossing_time_ =
        steepening > 0.0 ? 1.0 / steepening : std::numeric_limits<double>::infinity();
    const double pad = 1e-3 * (hi_ - lo_) + 1e-12;
    lo_ -= pad;
    hi_ += pad;
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  /// 1/(2α·max(−q0′)), or +∞ when characteristics never cross.
  double crossing_time() const noexcept { return crossing_time_; }
  double initial(double x) const { return q0_(x); }

  double operator()(double x, double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("characteristics_oracle: t must be >= 0");
    if (t == 0.0) return q0_(x);
    if (t > shock_guard * crossing_time_) {
      throw NumericalError("characteristics_oracle",
                           "post-shock query t = " + std::to_string(t) +
                               " (crossing time " + std::to_string(crossing_time_) + ")");
    }
    auto g = [&](double q) { return q - q0_(x - (2.0 * alpha_ * q + beta_) * t); };
    double lo = lo_, hi = hi_;
    double glo = g(lo), ghi = g(hi);
    for (int expand = 0; glo > 0.0 || ghi < 0.0; ++expand) {
      if (expand > 60) {
        throw NumericalError("characteristics_oracle", "could not bracket the root");
      }
      const double w = hi - lo;
      if (glo > 0.0) glo = g(lo -= w);
      if (ghi < 0.0) ghi = g(hi += w);
    }
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(52), iters);
    const double q = std::abs(g(a)) <= std::abs(g(b)) ? a : b;
    if (!(std::abs(g(q)) <= residual_tolerance)) {
      throw NumericalError("characteristics_oracle",
                           "root solve did not converge (residual " +
                               std::to_string(std::abs(g(q))) + ")");
    }
    return q;
  }

 private:
  Profile q0_;
  double alpha_;
  double beta_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double crossing_time_ = 0.0;
};

inline double characteristics_oracle(CharacteristicsOracle::Profile q0, double alpha,
                                     double beta, double x, double t) {
  return CharacteristicsOracle(std::move(q0), alpha, beta)(x, t);
}

// ---------------------------------------------------------------------------
// Local truncation error of the scalar Roe scheme

/// Sign case of the two interface speeds a₊ = α(q_{i+1}+q_i)+β, a₋ = α(q_i+q_{i−1})+β.
enum class SpeedCase : std::uint8_t {
  both_nonnegative = 0,  ///< a₊ ≥ 0, a₋ ≥ 0
  both_nonpositive = 1,  ///< a₊ ≤ 0, a₋ ≤ 0
  expansion = 2,         ///< a₊ ≥ 0, a₋ ≤ 0
  compression = 3,       ///< a₊ ≤ 0, a₋ ≥ 0
};

inline SpeedCase classify_speeds(double right_speed, double left_speed) noexcept {
  if (right_speed >= 0.0 && left_speed >= 0.0) return SpeedCase::both_nonnegative;
  if (right_speed <= 0.0 && left_speed <= 0.0) return SpeedCase::both_nonpositive;
  if (right_speed >= 0.0) return SpeedCase::expansion;
  return SpeedCase::compression;
}

struct TruncationReport {
  double h = 0.0;
  double k = 0.0;
  double t = 0.0;
  double max_abs = 0.0;  ///< max_i |e(x_i, t_n)|
  double l1 = 0.0;       ///< h Σ_i |e(x_i, t_n)|
  std::size_t worst_cell = 0;
  std::array<std::size_t, 4> case_counts{};
  std::size_t points = 0;
};

/// k = ν·h / max_i |α(q_i + q_{i−1}) + β| evaluated on the exact solution at t.
inline double oracle_cfl_step(const CharacteristicsOracle& oracle, const GridSpec& grid,
                              double t, double courant = default_courant) {
  std::vector<double> q(grid.n_cells());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = oracle(grid.center(i), t);
  const double speed = max_roe_speed(q, oracle.alpha(), oracle.beta());
  if (speed == 0.0) throw NumericalError("oracle_cfl_step", "stationary profile");
  return courant * grid.spacing() / speed;
}

inline TruncationReport truncation_error(const CharacteristicsOracle& oracle,
                                         const GridSpec& grid, double k, double t_n) {
  if (!(k > 0.0)) throw std::invalid_argument("truncation_error: k must be > 0");
  const std::size_t n = grid.n_cells();
  const double h = grid.spacing();
  const double alpha = oracle.alpha();
  const double beta = oracle.beta();
  std::vector<double> now(n), next(n);
  for (std::size_t i = 0; i < n; ++i) {
    now[i] = oracle(grid.center(i), t_n);
    next[i] = oracle(grid.center(i), t_n + k);
  }
  TruncationReport rep;
  rep.h = h;
  rep.k = k;
  rep.t = t_n;
  rep.points = n;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double qm = now[i == 0 ? n - 1 : i - 1];
    const double q = now[i];
    const double qp = now[i + 1 == n ? 0 : i + 1];
    const double a_right = roe_speed(qp, q, alpha, beta);
    const double a_left = roe_speed(q, qm, alpha, beta);
    const double e = (q - next[i]) / k -
                     (scalar_flux(qp, alpha, beta) - scalar_flux(qm, alpha, beta) -
                      std::abs(a_right) * (qp - q) + std::abs(a_left) * (q - qm)) /
                         (2.0 * h);
    ++rep.case_counts[static_cast<std::size_t>(classify_speeds(a_right, a_left))];
    const double ae = std::abs(e);
    sum += ae;
    if (ae > rep.max_abs) {
      rep.max_abs = ae;
      rep.worst_cell = i;
    }
  }
  rep.l1 = h * sum;
  return rep;
}

// ---------------------------------------------------------------------------
// ε-comparison between the direct solver and the two-scale reconstruction

struct NormTriple {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

struct ErrorReport {
  double epsilon = 0.0;
  NormTriple u;
  NormTriple rho;
  std::size_t n_cells = 0;
  double t_final = 0.0;
  std::size_t steps_homogenized = 0;
  std::size_t steps_direct = 0;
};

struct CompareConfig {
  double epsilon = 0.05;
  double gamma = 1.0;
  double t_final = 2.5;
  double courant = default_courant;
};

/// Space-time norms of a − b for two series sampled at identical times. Each
/// snapshot stands for the slab up to the next one; the last up to end_time.
inline std::pair<NormTriple, NormTriple> difference_norms(const SnapshotSeries& a,
                                                          const SnapshotSeries& b,
                                                          double end_time) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("difference_norms: series lengths differ");
  }
  SnapshotSeries diffs;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a[n].time != b[n].time) {
      throw std::invalid_argument("difference_norms: snapshot times differ");
    }
    std::vector<PeriodicField> d;
    for (std::size_t f = 0; f < 2; ++f) {
      const auto& x = a[n].fields.at(f);
      const auto& y = b[n].fields.at(f);
      require_same_grid(x, y, "difference_norms");
      std::vector<double> v(x.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] - y[i];
      d.emplace_back(x.grid(), std::move(v));
    }
    diffs.push_back(a[n].time, std::move(d));
  }
  const auto nu = spacetime_norms_until(diffs, end_time, 0);
  const auto nr = spacetime_norms_until(diffs, end_time, 1);
  return {{nu.l1, nu.l2, nu.linf}, {nr.l1, nr.l2, nr.linf}};
}

struct ComparisonRun {
  SnapshotSeries direct;         ///< {u^ε, ρ^ε} at the homogenized output times
  SnapshotSeries reconstructed;  ///< {U_h, R_h} at the same times
  ErrorReport report;
};

/// Runs both solvers on [0, T). The direct solver is clipped onto every
/// homogenized output time so no interpolation enters the differences.
inline ComparisonRun compare_runs_detailed(const PeriodicField& u0, const PeriodicField& rho0,
                                           const CompareConfig& cfg) {
  if (!(cfg.t_final > 0.0)) throw std::invalid_argument("compare_runs: T must be > 0");
  const auto params = derive_params(u0, rho0, cfg.gamma);
  const auto homog = advance(split_initial(u0, rho0, params), cfg.t_final,
                             AdvanceOptions{cfg.courant, 1, std::nullopt});
  EulerState direct = init_direct(u0, rho0, cfg.epsilon, cfg.gamma);

  ComparisonRun out;
  std::size_t direct_steps = 0;
  auto advance_direct_until = [&](double t) {
    try {
      direct_steps += advance_direct_to(direct, t, cfg.courant);
    } catch (const NumericalError& e) {
      throw e.at_step(direct_steps + e.step().value_or(0));
    }
  };
  // the final snapshot sits at T and is excluded from [0, T)
  for (std::size_t n = 0; n + 1 < homog.series.size(); ++n) {
    const auto& snap = homog.series[n];
    advance_direct_until(snap.time);
    const HomogenizedState hs{snap.fields[0], snap.fields[1], snap.time, params};
    auto rec = reconstruct_field(hs, ReconstructionQuery::from_time(snap.time, cfg.epsilon));
    auto prim = to_primitive(direct);
    out.direct.push_back(snap.time, {std::move(prim.u), std::move(prim.rho)});
    out.reconstructed.push_back(snap.time, {std::move(rec.U), std::move(rec.R)});
  }
  advance_direct_until(cfg.t_final);

  const auto [nu, nr] = difference_norms(out.direct, out.reconstructed, cfg.t_final);
  out.report = ErrorReport{cfg.epsilon, nu, nr, u0.size(), cfg.t_final, homog.steps,
                           direct_steps};
  return out;
}

inline ErrorReport compare_runs(const PeriodicField& u0, const PeriodicField& rho0,
                                const CompareConfig& cfg) {
  return compare_runs_detailed(u0, rho0, cfg).report;
}

// ---------------------------------------------------------------------------
// Linear-in-ε fits

struct SlopeFit {
  double K = 0.0;
  /// ‖e − Kε‖₂ / ‖e‖₂ (0 when all errors vanish)
  double relative_residual = 0.0;
};

/// Least squares through the origin for error ≈ K·ε.
inline SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 1) throw std::invalid_argument("fit_slope: need at least one point");
  double see = 0.0, sed = 0.0, sdd = 0.0;
  for (auto [eps, err] : points) {
    if (!(eps > 0.0)) throw std::invalid_argument("fit_slope: epsilon must be > 0");
    see += eps * err;
    sed += eps * eps;
    sdd += err * err;
  }
  SlopeFit fit;
  fit.K = see / sed;
  double res = 0.0;
  for (auto [eps, err] : points) res += (err - fit.K * eps) * (err - fit.K * eps);
  fit.relative_residual = sdd > 0.0 ? std::sqrt(res / sdd) : 0.0;
  return fit;
}

/// Column order of the error table: u L¹, u L², u L∞, ρ L¹, ρ L², ρ L∞.
inline constexpr std::array<const char*, 6> error_columns = {"u_l1",   "u_l2",   "u_linf",
                                                             "rho_l1", "rho_l2", "rho_linf"};

inline std::array<double, 6> error_row(const ErrorReport& r) {
  return {r.u.l1, r.u.l2, r.u.linf, r.rho.l1, r.rho.l2, r.rho.linf};
}

struct SweepResult {
  std::vector<ErrorReport> reports;
  std::array<SlopeFit, 6> fits{};
};

inline SweepResult fit_sweep(std::vector<ErrorReport> reports) {
  SweepResult out;
  for (std::size_t c = 0; c < 6; ++c) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : reports) pts.emplace_back(r.epsilon, error_row(r)[c]);
    out.fits[c] = fit_slope(pts);
  }
  out.reports = std::move(reports);
  return out;
}

inline void require_strictly_monotone(std::span<const double> eps, const char* op) {
  if (eps.empty()) throw std::invalid_argument(std::string(op) + ": empty epsilon list");
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < eps.size(); ++i) {
    inc = inc && eps[i] > eps[i - 1];
    dec = dec && eps[i] < eps[i - 1];
  }
  if (!inc && !dec) {
    throw std::invalid_argument(std::string(op) + ": epsilon list must be strictly monotone");
  }
}

/// One compare_runs per ε, dispatched concurrently; results keep input order.
inline SweepResult sweep(const PeriodicField& u0, const PeriodicField& rho0,
                         std::span<const double> epsilons, CompareConfig base) {
  require_strictly_monotone(epsilons, "sweep");
  if (epsilons.size() < 2) throw std::invalid_argument("sweep: need at least two epsilons");
  std::vector<std::future<ErrorReport>> jobs;
  for (double eps : epsilons) {
    CompareConfig cfg = base;
    cfg.epsilon = eps;
    jobs.push_back(std::async(std::launch::async,
                              [&u0, &rho0, cfg] { return compare_runs(u0, rho0, cfg); }));
  }
  std::vector<ErrorReport> reports;
  for (auto& j : jobs) reports.push_back(j.get());
  return fit_sweep(std::move(reports));
}

// ---------------------------------------------------------------------------
// Shock detection

/// max_i |Q_{i+1} − Q_i| / h with periodic wrap.
inline double max_gradient(const PeriodicField& f) {
  const auto q = f.values();
  double g = std::abs(q.front() - q.back());
  for (std::size_t i = 1; i < q.size(); ++i) g = std::max(g, std::abs(q[i] - q[i - 1]));
  return g / f.grid().spacing();
}

/// On the exact solution the slope reaches f× its initial value at
/// (1 − 1/f)·t*, so f = 20 keeps the refined-grid limit within 5% of the
/// crossing time t*.
inline constexpr double default_shock_threshold = 20.0;

/// First snapshot time whose discrete slope exceeds threshold_factor × the
/// initial slope; nullopt if it never does.
inline std::optional<double> detect_shock_time(const SnapshotSeries& run, double threshold_factor,
                                               std::size_t field = 0) {
  if (run.empty()) throw std::invalid_argument("detect_shock_time: empty series");
  if (!(threshold_factor > 1.0)) {
    throw std::invalid_argument("detect_shock_time: threshold_factor must be > 1");
  }
  const double threshold = threshold_factor * max_gradient(run.front().fields.at(field));
  for (const auto& snap : run) {
    const double g = max_gradient(snap.fields.at(field));
    if (g > threshold || (threshold == 0.0 && g > 0.0)) return snap.time;
  }
  return std::nullopt;
}

/// Series of reconstructed {U_h, R_h} at every snapshot of a homogenized run.
inline SnapshotSeries reconstruct_series(const SnapshotSeries& homog,
                                         const HomogenizedParams& params, double epsilon) {
  SnapshotSeries out;
  for (const auto& snap : homog) {
    const HomogenizedState hs{snap.fields.at(0), snap.fields.at(1), snap.time, params};
    auto rec = reconstruct_field(hs, ReconstructionQuery::from_time(snap.time, epsilon));
    out.push_back(snap.time, {std::move(rec.U), std::move(rec.R)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cost benchmark

struct BenchmarkRow {
  double epsilon = 0.0;
  std::size_t steps_homogenized = 0;
  std::size_t steps_direct = 0;
  double seconds_homogenized = 0.0;
  double seconds_direct = 0.0;
};

struct BenchmarkConfig {
  double gamma = 1.0;
  double t_final = 2.5;
  double courant = default_courant;
  bool run_direct = true;
};

/// Step counts are the deterministic result; wall times are informative only.
inline std::vector<BenchmarkRow> benchmark_steps(const PeriodicField& u0,
                                                 const PeriodicField& rho0,
                                                 std::span<const double> epsilons,
                                                 const BenchmarkConfig& cfg) {
  if (epsilons.empty()) throw std::invalid_argument("benchmark_steps: empty epsilon list");
  using clock = std::chrono::steady_clock;
  std::vector<BenchmarkRow> rows;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw std::invalid_argument("benchmark_steps: epsilon must be > 0");
    BenchmarkRow row;
    row.epsilon = eps;

    auto t0 = clock::now();
    const auto params = derive_params(u0, rho0, cfg.gamma);
    const auto homog = advance(split_initial(u0, rho0, params), cfg.t_final,
                               AdvanceOptions{cfg.courant, 1, std::nullopt});
    [[maybe_unused]] const auto rec = reconstruct_series(homog.series, params, eps);
    row.steps_homogenized = homog.steps;
    row.seconds_homogenized = std::chrono::duration<double>(clock::now() - t0).count();

    if (cfg.run_direct) {
      t0 = clock::now();
      EulerState direct = init_direct(u0, rho0, eps, cfg.gamma);
      row.steps_direct = advance_direct_to(direct, cfg.t_final, cfg.courant);
      row.seconds_direct = std::chrono::duration<double>(clock::now() - t0).count();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace twoscale
