#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace twoscale {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Uniform periodic mesh on [0, 2π). Cell i is centered at x_i = i·h and
/// covers the half-open interval [x_i − h/2, x_i + h/2), wrapped on the torus.
class GridSpec {
 public:
  static constexpr std::size_t min_cells = 4;

  explicit GridSpec(std::size_t n_cells) : n_cells_(n_cells) {
    if (n_cells < min_cells) {
      throw std::invalid_argument("make_grid: n_cells must be >= 4, got " +
                                  std::to_string(n_cells));
    }
    spacing_ = two_pi / static_cast<double>(n_cells);
  }

  std::size_t n_cells() const noexcept { return n_cells_; }
  double spacing() const noexcept { return spacing_; }
  double center(std::size_t i) const noexcept {
    return static_cast<double>(i) * spacing_;
  }

  std::vector<double> centers() const {
    std::vector<double> xs(n_cells_);
    for (std::size_t i = 0; i < n_cells_; ++i) xs[i] = center(i);
    return xs;
  }

  /// Index of the cell whose half-open interval contains x (any real x).
  std::size_t cell_of(double x) const noexcept {
    const long double s =
        static_cast<long double>(x) / static_cast<long double>(spacing_) + 0.5L;
    const long double n = static_cast<long double>(n_cells_);
    long double idx = std::floor(s);
    idx = std::fmod(idx, n);
    if (idx < 0) idx += n;
    auto i = static_cast<std::size_t>(idx);
    return i == n_cells_ ? 0 : i;
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
    return a.n_cells_ == b.n_cells_;
  }

 private:
  std::size_t n_cells_;
  double spacing_;
};

inline GridSpec make_grid(std::size_t n_cells) { return GridSpec(n_cells); }

/// Piecewise-constant cell values on a GridSpec.
class PeriodicField {
 public:
  PeriodicField(GridSpec grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_cells()) {
      throw std::invalid_argument("PeriodicField: " +
                                  std::to_string(values_.size()) +
                                  " values for a grid of " +
                                  std::to_string(grid_.n_cells()) + " cells");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw std::invalid_argument("PeriodicField: non-finite value at cell " +
                                    std::to_string(i));
      }
    }
  }

  static PeriodicField constant(GridSpec grid, double c) {
    return PeriodicField(grid, std::vector<double>(grid.n_cells(), c));
  }

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Value at i with periodic wrap for i in [-n, 2n).
  double at_wrapped(std::ptrdiff_t i) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(values_.size());
    if (i < 0) i += n;
    if (i >= n) i -= n;
    return values_[static_cast<std::size_t>(i)];
  }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const PeriodicField& a, const PeriodicField& b,
                              const char* op) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument(std::string(op) + ": fields live on different grids (" +
                                std::to_string(a.grid().n_cells()) + " vs " +
                                std::to_string(b.grid().n_cells()) + " cells)");
  }
}

struct Snapshot {
  double time = 0.0;
  std::vector<PeriodicField> fields;
};

/// Time-ordered trajectory of one or more fields.
class SnapshotSeries {
 public:
  void push_back(Snapshot snap) {
    if (!snaps_.empty() && !(snap.time > snaps_.back().time)) {
      throw std::invalid_argument("SnapshotSeries: times must be strictly increasing");
    }
    snaps_.push_back(std::move(snap));
  }
  void push_back(double time, std::vector<PeriodicField> fields) {
    push_back(Snapshot{time, std::move(fields)});
  }

  bool empty() const noexcept { return snaps_.empty(); }
  std::size_t size() const noexcept { return snaps_.size(); }
  const Snapshot& operator[](std::size_t i) const { return snaps_[i]; }
  const Snapshot& front() const { return snaps_.front(); }
  const Snapshot& back() const { return snaps_.back(); }
  auto begin() const noexcept { return snaps_.begin(); }
  auto end() const noexcept { return snaps_.end(); }

 private:
  std::vector<Snapshot> snaps_;
};

// ---------------------------------------------------------------------------
// Sampling

template <typename Fn>
  requires std::is_invocable_r_v<double, Fn, double>
PeriodicField sample_field(const GridSpec& grid, Fn&& source) {
  std::vector<double> v(grid.n_cells());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = source(grid.center(i));
    if (!std::isfinite(v[i])) {
      throw std::invalid_argument("sample_field: non-finite sample at x = " +
                                  std::to_string(grid.center(i)));
    }
  }
  return PeriodicField(grid, std::move(v));
}

/// Nearest-point assignment from tabulated (x, value) pairs. x is taken mod 2π.
inline PeriodicField sample_field(const GridSpec& grid,
                                  std::span<const std::pair<double, double>> table) {
  if (table.size() < grid.n_cells()) {
    throw std::invalid_argument("sample_field: table has " + std::to_string(table.size()) +
                                " points, need at least " +
                                std::to_string(grid.n_cells()));
  }
  std::vector<std::pair<double, double>> pts;
  pts.reserve(table.size());
  for (auto [x, v] : table) {
    if (!std::isfinite(x) || !std::isfinite(v)) {
      throw std::invalid_argument("sample_field: non-finite table entry");
    }
    double w = std::fmod(x, two_pi);
    if (w < 0) w += two_pi;
    if (w >= two_pi) w = 0.0;
    pts.emplace_back(w, v);
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const double h = grid.spacing();
  double max_gap = pts.front().first + two_pi - pts.back().first;
  for (std::size_t j = 1; j < pts.size(); ++j) {
    max_gap = std::max(max_gap, pts[j].first - pts[j - 1].first);
  }
  if (max_gap > 2.0 * h) {
    throw std::invalid_argument("sample_field: table coverage gap " +
                                std::to_string(max_gap) + " exceeds 2h = " +
                                std::to_string(2.0 * h));
  }

  auto periodic_dist = [](double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, two_pi - d);
  };

  std::vector<double> v(grid.n_cells());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = grid.center(i);
    auto it = std::lower_bound(pts.begin(), pts.end(), x,
                               [](const auto& p, double val) { return p.first < val; });
    const std::size_t hi = it == pts.end() ? 0 : static_cast<std::size_t>(it - pts.begin());
    const std::size_t lo = hi == 0 ? pts.size() - 1 : hi - 1;
    v[i] = periodic_dist(pts[lo].first, x) <= periodic_dist(pts[hi].first, x)
               ? pts[lo].second
               : pts[hi].second;
  }
  return PeriodicField(grid, std::move(v));
}

// ---------------------------------------------------------------------------
// Functionals

/// Midpoint rule h·Σ values.
inline double integral(const PeriodicField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return f.grid().spacing() * s;
}

/// Discrete periodic total variation Σ|Q_i − Q_{i−1}|.
inline double total_variation(std::span<const double> q) {
  if (q.empty()) return 0.0;
  double tv = std::abs(q.front() - q.back());
  for (std::size_t i = 1; i < q.size(); ++i) tv += std::abs(q[i] - q[i - 1]);
  return tv;
}

inline double total_variation(const PeriodicField& f) {
  return total_variation(f.values());
}

/// Discrete L¹ norm h·Σ|Q_i|.
inline double l1_norm(const PeriodicField& f) {
  double s = 0.0;
  for (double v : f.values()) s += std::abs(v);
  return f.grid().spacing() * s;
}

struct SpacetimeNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

namespace detail {

template <typename DurationOf>
SpacetimeNorms accumulate_norms(const SnapshotSeries& diffs, std::size_t field,
                                DurationOf duration_of) {
  if (diffs.empty()) {
    throw std::invalid_argument("spacetime_norms: empty series");
  }
  SpacetimeNorms out;
  double sq = 0.0;
  for (std::size_t n = 0; n < diffs.size(); ++n) {
    const PeriodicField& d = diffs[n].fields.at(field);
    const double w = duration_of(n) * d.grid().spacing();
    double s1 = 0.0;
    double s2 = 0.0;
    for (double v : d.values()) {
      const double a = std::abs(v);
      s1 += a;
      s2 += a * a;
      out.linf = std::max(out.linf, a);
    }
    out.l1 += w * s1;
    sq += w * s2;
  }
  out.l2 = std::sqrt(sq);
  return out;
}

}  // namespace detail

/// Space-time Riemann sums over snapshots that each stand for a slab of
/// duration `step`: L1 = Σₙ k Σᵢ h|dᵢⁿ|, L2 its quadratic analogue, L∞ = max.
inline SpacetimeNorms spacetime_norms(const SnapshotSeries& diffs, double step,
                                      std::size_t field = 0) {
  if (!(step >= 0.0)) throw std::invalid_argument("spacetime_norms: negative step");
  return detail::accumulate_norms(diffs, field, [step](std::size_t) { return step; });
}

/// Same sums with non-uniform slabs: snapshot n covers [tₙ, tₙ₊₁), the last
/// one covers [t_last, end_time).
inline SpacetimeNorms spacetime_norms_until(const SnapshotSeries& diffs, double end_time,
                                            std::size_t field = 0) {
  if (!diffs.empty() && end_time < diffs.back().time) {
    throw std::invalid_argument("spacetime_norms_until: end_time precedes last snapshot");
  }
  return detail::accumulate_norms(diffs, field, [&](std::size_t n) {
    return (n + 1 < diffs.size() ? diffs[n + 1].time : end_time) - diffs[n].time;
  });
}

}  // namespace twoscale
