#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "twoscale/grid.hpp"
#include "twoscale/homogenized.hpp"

namespace twoscale {

/// Fast phase τ on the torus, optionally carrying the ε it was derived from.
class ReconstructionQuery {
 public:
  static ReconstructionQuery from_tau(double tau) {
    if (!std::isfinite(tau)) throw std::invalid_argument("ReconstructionQuery: non-finite tau");
    return ReconstructionQuery(reduce(static_cast<long double>(tau)), std::nullopt);
  }

  /// τ = t/ε mod 2π. The quotient and the reduction are carried in extended
  /// precision so t/ε of order 10⁷ still lands in the right cell.
  static ReconstructionQuery from_time(double t, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("ReconstructionQuery: epsilon must be > 0");
    if (!std::isfinite(t)) throw std::invalid_argument("ReconstructionQuery: non-finite t");
    const long double phase = static_cast<long double>(t) / static_cast<long double>(epsilon);
    return ReconstructionQuery(reduce(phase), epsilon);
  }

  double tau() const noexcept { return tau_; }
  std::optional<double> epsilon() const noexcept { return epsilon_; }

 private:
  ReconstructionQuery(double tau, std::optional<double> eps) : tau_(tau), epsilon_(eps) {}

  static double reduce(long double phase) {
    constexpr long double period = 6.283185307179586476925286766559005768L;
    long double r = std::fmod(phase, period);
    if (r < 0) r += period;
    auto tau = static_cast<double>(r);
    return tau >= two_pi ? 0.0 : tau;
  }

  double tau_;
  std::optional<double> epsilon_;
};

/// F_h(x): the value of the cell whose half-open interval contains x mod 2π.
inline double evaluate_piecewise(const PeriodicField& field, double x) {
  return field[field.grid().cell_of(x)];
}

struct ReconstructedPair {
  double U = 0.0;
  double R = 0.0;
};

inline ReconstructedPair reconstruct_pair(const HomogenizedState& state,
                                          const ReconstructionQuery& query, double x) {
  const double tau = query.tau();
  const double fwd = evaluate_piecewise(state.F, x - tau);
  const double bwd = evaluate_piecewise(state.B, x + tau);
  return {fwd + bwd + state.params.u_bar / two_pi, fwd - bwd + state.params.rho_bar / two_pi};
}

struct ReconstructedFields {
  PeriodicField U;
  PeriodicField R;
};

inline ReconstructedFields reconstruct_field(const HomogenizedState& state,
                                             const ReconstructionQuery& query) {
  const GridSpec& grid = state.grid();
  std::vector<double> u(grid.n_cells()), r(grid.n_cells());
  for (std::size_t i = 0; i < grid.n_cells(); ++i) {
    const auto p = reconstruct_pair(state, query, grid.center(i));
    u[i] = p.U;
    r[i] = p.R;
  }
  return {PeriodicField(grid, std::move(u)), PeriodicField(grid, std::move(r))};
}

}  // namespace twoscale
