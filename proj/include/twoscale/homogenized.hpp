#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twoscale/error.hpp"
#include "twoscale/grid.hpp"

namespace twoscale {

inline constexpr double default_courant = 0.9;

/// Means of the initial data and the flux coefficients of the two decoupled
/// Burgers-type laws  ∂t Q + ∂x(α Q² + β± Q) = 0.
struct HomogenizedParams {
  double gamma = 1.0;
  double u_bar = 0.0;
  double rho_bar = 0.0;
  double alpha = 0.5;
  double beta_plus = 0.0;
  double beta_minus = 0.0;

  static HomogenizedParams from_means(double gamma, double u_bar, double rho_bar) {
    if (!(gamma >= 1.0)) {
      throw std::invalid_argument("HomogenizedParams: gamma must be >= 1");
    }
    HomogenizedParams p;
    p.gamma = gamma;
    p.u_bar = u_bar;
    p.rho_bar = rho_bar;
    p.alpha = (gamma + 1.0) / 4.0;
    p.beta_plus = (2.0 * u_bar + (gamma - 1.0) * rho_bar) / (4.0 * std::numbers::pi);
    p.beta_minus = (2.0 * u_bar - (gamma - 1.0) * rho_bar) / (4.0 * std::numbers::pi);
    return p;
  }
};

/// Forward profile F and backward profile B at slow time t. Both have zero mean.
struct HomogenizedState {
  PeriodicField F;
  PeriodicField B;
  double t = 0.0;
  HomogenizedParams params;

  const GridSpec& grid() const noexcept { return F.grid(); }
};

inline HomogenizedParams derive_params(const PeriodicField& u0, const PeriodicField& rho0,
                                       double gamma) {
  require_same_grid(u0, rho0, "derive_params");
  return HomogenizedParams::from_means(gamma, integral(u0), integral(rho0));
}

inline HomogenizedState split_initial(const PeriodicField& u0, const PeriodicField& rho0,
                                      const HomogenizedParams& params) {
  require_same_grid(u0, rho0, "split_initial");
  const double sum_mean = (params.u_bar + params.rho_bar) / two_pi;
  const double diff_mean = (params.u_bar - params.rho_bar) / two_pi;
  const std::size_t n = u0.size();
  std::vector<double> f(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = 0.5 * (u0[i] + rho0[i] - sum_mean);
    b[i] = 0.5 * (u0[i] - rho0[i] - diff_mean);
  }
  return HomogenizedState{PeriodicField(u0.grid(), std::move(f)),
                          PeriodicField(u0.grid(), std::move(b)), 0.0, params};
}

// ---------------------------------------------------------------------------
// Scalar Roe scheme for  ∂t q + ∂x(α q² + β q) = 0

inline double scalar_flux(double q, double alpha, double beta) noexcept {
  return alpha * q * q + beta * q;
}

/// Roe speed α(q_left + q_right) + β at the interface between two cells.
inline double roe_speed(double q_right, double q_left, double alpha, double beta) noexcept {
  return alpha * (q_right + q_left) + beta;
}

/// Interface flux between cell i−1 (q_im1) and cell i (q_i). No entropy fix.
inline double roe_flux_scalar(double q_i, double q_im1, double alpha, double beta) noexcept {
  return 0.5 * (scalar_flux(q_i, alpha, beta) + scalar_flux(q_im1, alpha, beta)) -
         0.5 * std::abs(roe_speed(q_i, q_im1, alpha, beta)) * (q_i - q_im1);
}

/// max_i |α(Q_i + Q_{i−1}) + β| with periodic wrap.
inline double max_roe_speed(std::span<const double> q, double alpha, double beta) noexcept {
  double m = 0.0;
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double left = q[i == 0 ? n - 1 : i - 1];
    m = std::max(m, std::abs(roe_speed(q[i], left, alpha, beta)));
  }
  return m;
}

/// One conservative update Q_i ← Q_i − (k/h)(𝓕_{i+1/2} − 𝓕_{i−1/2}).
inline std::vector<double> roe_step(std::span<const double> q, double alpha, double beta,
                                    double k_over_h) {
  const std::size_t n = q.size();
  // flux[i] sits on the interface between cells i−1 and i
  std::vector<double> flux(n);
  for (std::size_t i = 0; i < n; ++i) {
    flux[i] = roe_flux_scalar(q[i], q[i == 0 ? n - 1 : i - 1], alpha, beta);
  }
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double right = flux[i + 1 == n ? 0 : i + 1];
    next[i] = q[i] - k_over_h * (right - flux[i]);
  }
  return next;
}

/// Largest admissible interface speed over both profiles.
inline double max_pair_speed(const HomogenizedState& s) noexcept {
  return std::max(max_roe_speed(s.F.values(), s.params.alpha, s.params.beta_plus),
                  max_roe_speed(s.B.values(), s.params.alpha, s.params.beta_minus));
}

/// k = ν·h / max speed, shared by F and B. Independent of ε.
inline double cfl_timestep(const HomogenizedState& state, double courant = default_courant) {
  if (!(courant > 0.0 && courant <= 1.0)) {
    throw std::invalid_argument("cfl_timestep: courant number must lie in (0, 1]");
  }
  const double speed = max_pair_speed(state);
  if (speed == 0.0) {
    throw NumericalError("cfl_timestep",
                         "stationary field (zero max speed); supply the time step explicitly");
  }
  return courant * state.grid().spacing() / speed;
}

namespace detail {

inline constexpr double cfl_slack = 1e-12;

inline PeriodicField checked_field(const GridSpec& grid, std::vector<double> v,
                                   const char* op, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericalError(op, std::string("non-finite ") + name, std::nullopt, i);
    }
  }
  return PeriodicField(grid, std::move(v));
}

}  // namespace detail

inline HomogenizedState step_pair(const HomogenizedState& state, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::invalid_argument("step_pair: time step must be positive and finite");
  }
  const double h = state.grid().spacing();
  const double courant = k * max_pair_speed(state) / h;
  if (courant > 1.0 + detail::cfl_slack) {
    throw NumericalError("step_pair",
                         "CFL violated: courant number " + std::to_string(courant) + " > 1");
  }
  const auto& p = state.params;
  auto f = roe_step(state.F.values(), p.alpha, p.beta_plus, k / h);
  auto b = roe_step(state.B.values(), p.alpha, p.beta_minus, k / h);
  return HomogenizedState{detail::checked_field(state.grid(), std::move(f), "step_pair", "F"),
                          detail::checked_field(state.grid(), std::move(b), "step_pair", "B"),
                          state.t + k, p};
}

struct AdvanceOptions {
  double courant = default_courant;
  std::size_t record_every = 1;
  /// Fixed step used instead of the CFL step (required for stationary data).
  std::optional<double> fixed_step;
};

struct HomogenizedRun {
  SnapshotSeries series;  ///< fields {F, B}
  HomogenizedState final_state;
  std::size_t steps = 0;
};

/// Time loop around step_pair. Lands exactly on t_target by clipping the last
/// step. Records the initial state, every record_every-th step and the final state.
inline HomogenizedRun advance(const HomogenizedState& state, double t_target,
                              const AdvanceOptions& opts = {}) {
  if (opts.record_every == 0) {
    throw std::invalid_argument("advance: record_every must be positive");
  }
  if (t_target < state.t) {
    throw std::invalid_argument("advance: t_target precedes the state time");
  }
  HomogenizedRun run{SnapshotSeries{}, state, 0};
  run.series.push_back(state.t, {state.F, state.B});
  HomogenizedState cur = state;
  while (cur.t < t_target) {
    double k = opts.fixed_step ? *opts.fixed_step : cfl_timestep(cur, opts.courant);
    const bool last = cur.t + k >= t_target;
    if (last) k = t_target - cur.t;
    try {
      cur = step_pair(cur, k);
    } catch (const NumericalError& e) {
      throw e.at_step(run.steps);
    }
    if (last) cur.t = t_target;
    ++run.steps;
    if (last || run.steps % opts.record_every == 0) {
      run.series.push_back(cur.t, {cur.F, cur.B});
    }
  }
  run.final_state = std::move(cur);
  return run;
}

}  // namespace twoscale
