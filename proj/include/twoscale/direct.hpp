#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twoscale/error.hpp"
#include "twoscale/grid.hpp"
#include "twoscale/homogenized.hpp"

namespace twoscale {

/// Conservative state (ρ̃, m = ρ̃u) of the isentropic Euler system with
/// pressure p(ρ̃) = ρ̃^γ/γ scaled by 1/ε².
struct EulerState {
  PeriodicField rho_tilde;
  PeriodicField momentum;
  double t = 0.0;
  double epsilon = 1.0;
  double gamma = 1.0;

  const GridSpec& grid() const noexcept { return rho_tilde.grid(); }
};

struct CellState {
  double rho_tilde = 1.0;
  double velocity = 0.0;
};

struct RoeAverage {
  double u_hat = 0.0;
  double p_bar = 1.0;  ///< Δp/Δρ̃, the averaged pressure derivative
};

/// (ρ̃^γ − 1)/γ, i.e. the pressure minus its value at the reference density.
inline double pressure_excess(double rho_tilde, double gamma) noexcept {
  if (gamma == 1.0) return rho_tilde - 1.0;
  return std::expm1(gamma * std::log1p(rho_tilde - 1.0)) / gamma;
}

inline RoeAverage roe_average(const CellState& left, const CellState& right, double gamma) {
  const double sl = std::sqrt(left.rho_tilde);
  const double sr = std::sqrt(right.rho_tilde);
  RoeAverage avg;
  avg.u_hat = (right.velocity * sr + left.velocity * sl) / (sr + sl);
  if (gamma == 1.0) {
    avg.p_bar = 1.0;
  } else if (right.rho_tilde == left.rho_tilde) {
    avg.p_bar = std::pow(right.rho_tilde, gamma - 1.0);
  } else {
    // y^{γ−1}·((1+d)^γ − 1)/(γ d) with d = Δρ̃/y, stable as Δρ̃ → 0
    const double y = left.rho_tilde;
    const double d = (right.rho_tilde - y) / y;
    avg.p_bar = std::pow(y, gamma - 1.0) * std::expm1(gamma * std::log1p(d)) / (gamma * d);
  }
  return avg;
}

inline EulerState init_direct(const PeriodicField& u0, const PeriodicField& rho0, double epsilon,
                              double gamma) {
  require_same_grid(u0, rho0, "init_direct");
  if (!(epsilon > 0.0)) throw std::invalid_argument("init_direct: epsilon must be > 0");
  if (!(gamma >= 1.0)) throw std::invalid_argument("init_direct: gamma must be >= 1");
  const std::size_t n = u0.size();
  std::vector<double> rho(n), mom(n);
  for (std::size_t i = 0; i < n; ++i) {
    rho[i] = 1.0 + epsilon * rho0[i];
    if (!(rho[i] > 0.0)) {
      throw std::invalid_argument("init_direct: nonpositive initial density (vacuum) at cell " +
                                  std::to_string(i));
    }
    mom[i] = rho[i] * u0[i];
  }
  return EulerState{PeriodicField(u0.grid(), std::move(rho)),
                    PeriodicField(u0.grid(), std::move(mom)), 0.0, epsilon, gamma};
}

struct FluxPair {
  double mass = 0.0;
  double momentum = 0.0;
};

/// Physical flux (m, m²/ρ̃ + (p(ρ̃) − p(1))/ε²). The constant p(1) drops out of
/// every flux difference.
inline FluxPair euler_flux(double rho_tilde, double momentum, double epsilon, double gamma) {
  return {momentum, momentum * (momentum / rho_tilde) +
                        pressure_excess(rho_tilde, gamma) / (epsilon * epsilon)};
}

namespace detail {

inline CellState cell_state(const EulerState& s, std::size_t i) {
  return {s.rho_tilde[i], s.momentum[i] / s.rho_tilde[i]};
}

inline double max_acoustic_speed(const EulerState& s) {
  const std::size_t n = s.rho_tilde.size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto avg = roe_average(cell_state(s, i == 0 ? n - 1 : i - 1), cell_state(s, i), s.gamma);
    m = std::max(m, std::abs(avg.u_hat) + std::sqrt(avg.p_bar) / s.epsilon);
  }
  return m;
}

}  // namespace detail

/// Two-wave Roe flux between cells with states (ρL, mL) and (ρR, mR).
inline FluxPair euler_roe_flux(double rl, double ml, double rr, double mr, double epsilon,
                               double gamma) {
  const double ul = ml / rl;
  const double ur = mr / rr;
  const auto fl = euler_flux(rl, ml, epsilon, gamma);
  const auto fr = euler_flux(rr, mr, epsilon, gamma);
  const auto avg = roe_average({rl, ul}, {rr, ur}, gamma);
  const double c = std::sqrt(avg.p_bar) / epsilon;
  const double lam1 = avg.u_hat - c;
  const double lam2 = avg.u_hat + c;
  const double d_rho = rr - rl;
  const double d_mom = mr - ml;
  const double a1 = (lam2 * d_rho - d_mom) / (2.0 * c);
  const double a2 = (d_mom - lam1 * d_rho) / (2.0 * c);
  const double w1 = std::abs(lam1) * a1;
  const double w2 = std::abs(lam2) * a2;
  return {0.5 * (fl.mass + fr.mass) - 0.5 * (w1 + w2),
          0.5 * (fl.momentum + fr.momentum) - 0.5 * (w1 * lam1 + w2 * lam2)};
}

/// k = ν·h / max_i(|û_i| + √P̄_i/ε). Shrinks like ε.
inline double direct_timestep(const EulerState& state, double courant = default_courant) {
  if (!(courant > 0.0 && courant <= 1.0)) {
    throw std::invalid_argument("direct_timestep: courant number must lie in (0, 1]");
  }
  return courant * state.grid().spacing() / detail::max_acoustic_speed(state);
}

inline EulerState direct_step(const EulerState& state, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::invalid_argument("direct_step: time step must be positive and finite");
  }
  const double h = state.grid().spacing();
  const double courant = k * detail::max_acoustic_speed(state) / h;
  if (courant > 1.0 + detail::cfl_slack) {
    throw NumericalError("direct_step",
                         "CFL violated: courant number " + std::to_string(courant) + " > 1");
  }
  const std::size_t n = state.rho_tilde.size();
  const auto rho = state.rho_tilde.values();
  const auto mom = state.momentum.values();
  std::vector<FluxPair> flux(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i == 0 ? n - 1 : i - 1;
    flux[i] = euler_roe_flux(rho[l], mom[l], rho[i], mom[i], state.epsilon, state.gamma);
  }
  const double r = k / h;
  std::vector<double> rho_next(n), mom_next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& fr = flux[i + 1 == n ? 0 : i + 1];
    rho_next[i] = rho[i] - r * (fr.mass - flux[i].mass);
    mom_next[i] = mom[i] - r * (fr.momentum - flux[i].momentum);
    if (!std::isfinite(rho_next[i]) || !std::isfinite(mom_next[i])) {
      throw NumericalError("direct_step", "non-finite state", std::nullopt, i);
    }
    if (!(rho_next[i] > 0.0)) {
      throw NumericalError("direct_step", "vacuum (nonpositive density)", std::nullopt, i);
    }
  }
  return EulerState{PeriodicField(state.grid(), std::move(rho_next)),
                    PeriodicField(state.grid(), std::move(mom_next)), state.t + k,
                    state.epsilon, state.gamma};
}

/// Primitive fields u = m/ρ̃ and ρ = (ρ̃ − 1)/ε.
struct PrimitiveFields {
  PeriodicField u;
  PeriodicField rho;
};

inline PrimitiveFields to_primitive(const EulerState& s) {
  const std::size_t n = s.rho_tilde.size();
  std::vector<double> u(n), rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = s.momentum[i] / s.rho_tilde[i];
    rho[i] = (s.rho_tilde[i] - 1.0) / s.epsilon;
  }
  return {PeriodicField(s.grid(), std::move(u)), PeriodicField(s.grid(), std::move(rho))};
}

struct DirectRun {
  SnapshotSeries series;  ///< fields {u, ρ}
  EulerState final_state;
  std::size_t steps = 0;
};

/// Advances to exactly t_target (last step clipped) and calls on_step after
/// every step with the new state and the running step count.
inline std::size_t advance_direct_to(
    EulerState& state, double t_target, double courant = default_courant,
    const std::function<void(const EulerState&, std::size_t, bool)>& on_step = {}) {
  if (t_target < state.t) {
    throw std::invalid_argument("advance_direct: t_target precedes the state time");
  }
  std::size_t steps = 0;
  while (state.t < t_target) {
    double k = direct_timestep(state, courant);
    const bool last = state.t + k >= t_target;
    if (last) k = t_target - state.t;
    try {
      state = direct_step(state, k);
    } catch (const NumericalError& e) {
      throw e.at_step(steps);
    }
    if (last) state.t = t_target;
    ++steps;
    if (on_step) on_step(state, steps, last);
  }
  return steps;
}

inline DirectRun advance_direct(const EulerState& state, double t_target,
                                const AdvanceOptions& opts = {}) {
  if (opts.record_every == 0) {
    throw std::invalid_argument("advance_direct: record_every must be positive");
  }
  DirectRun run{SnapshotSeries{}, state, 0};
  auto prim = to_primitive(state);
  run.series.push_back(state.t, {prim.u, prim.rho});
  run.steps = advance_direct_to(run.final_state, t_target, opts.courant,
                                [&](const EulerState& s, std::size_t step, bool last) {
                                  if (last || step % opts.record_every == 0) {
                                    auto p = to_primitive(s);
                                    run.series.push_back(s.t, {p.u, p.rho});
                                  }
                                });
  return run;
}

}  // namespace twoscale
