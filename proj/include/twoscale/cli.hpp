#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twoscale/analysis.hpp"
#include "twoscale/direct.hpp"
#include "twoscale/error.hpp"
#include "twoscale/grid.hpp"
#include "twoscale/homogenized.hpp"
#include "twoscale/io.hpp"
#include "twoscale/reconstruction.hpp"

namespace twoscale::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* output_dir_env = "TWOSCALE_OUT_DIR";

enum ExitCode : int { ok = 0, numerical_failure = 1, usage_error = 2 };

struct RunConfig {
  std::string command;
  std::size_t n_cells = 1024;
  double gamma = 1.0;
  std::optional<double> epsilon;
  std::vector<double> epsilons;
  double t_final = 2.5;
  double courant = default_courant;
  std::string out_dir;
  std::size_t record_every = 1;
  std::string initial;  ///< empty: built-in u₀ = 1 + cos/2, ρ₀ = 1 + sin/2
  // truncation
  std::size_t levels = 2;
  double t_probe = 1.0;
  // shock
  double threshold = default_shock_threshold;
};

/// Thrown for inadmissible parameter values; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw UsageError(what);
}

inline void validate(const RunConfig& c) {
  require(c.n_cells >= GridSpec::min_cells, "--n-cells must be >= 4");
  require(c.gamma >= 1.0, "--gamma must be >= 1");
  require(c.courant > 0.0 && c.courant <= 1.0, "--courant must lie in (0, 1]");
  require(c.t_final > 0.0 && std::isfinite(c.t_final), "--T must be positive");
  require(c.record_every > 0, "--record-every must be positive");
  if (c.epsilon) require(*c.epsilon > 0.0, "--epsilon must be > 0");
  for (double e : c.epsilons) require(e > 0.0, "--epsilons entries must be > 0");
}

inline std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::filesystem::path p = dir.empty() ? std::filesystem::path(".") : std::filesystem::path(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  const auto probe = p / ".twoscale_write_probe";
  try {
    io::write_file_atomic(probe, "");
    std::filesystem::remove(probe);
  } catch (const std::exception&) {
    throw UsageError("output directory '" + p.string() + "' is not writable");
  }
  return p;
}

/// Three-column table x,u0,rho0 ('#' lines ignored), sampled nearest-point.
inline InitialData load_initial(const RunConfig& c, const GridSpec& grid) {
  if (c.initial.empty()) return default_initial_data(grid);
  const std::string text = io::read_file(c.initial);
  std::vector<std::pair<double, double>> u, rho;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cells = io::detail::split(line, ',');
    if (cells.size() != 3) throw UsageError("initial-data rows must be x,u0,rho0");
    const double x = io::parse_double(cells[0]);
    u.emplace_back(x, io::parse_double(cells[1]));
    rho.emplace_back(x, io::parse_double(cells[2]));
  }
  return {sample_field(grid, u), sample_field(grid, rho)};
}

inline std::vector<io::CsvSnapshot> series_csv(const SnapshotSeries& s,
                                               const std::vector<std::string>& names,
                                               const std::function<io::KeyValues(double)>& extra) {
  std::vector<io::CsvSnapshot> out;
  for (const auto& snap : s) out.push_back(io::make_csv_snapshot(snap, names, extra(snap.time)));
  return out;
}

inline std::string error_table(const std::vector<ErrorReport>& reports) {
  std::string out = "epsilon";
  for (const char* c : error_columns) out += std::string(",") + c;
  out += "\n";
  for (const auto& r : reports) {
    out += io::format_double(r.epsilon);
    for (double v : error_row(r)) out += "," + io::format_double(v);
    out += "\n";
  }
  return out;
}

inline io::KeyValues homog_meta(const RunConfig& c, const HomogenizedRun& run) {
  const auto& p = run.final_state.params;
  return {{"gamma", io::format_double(p.gamma)},
          {"u_bar", io::format_double(p.u_bar)},
          {"rho_bar", io::format_double(p.rho_bar)},
          {"courant", io::format_double(c.courant)},
          {"n_cells", std::to_string(c.n_cells)},
          {"steps_taken", std::to_string(run.steps)},
          {"final_t", io::format_double(run.final_state.t)}};
}

inline CompareConfig compare_config(const RunConfig& c, double eps) {
  return CompareConfig{eps, c.gamma, c.t_final, c.courant};
}

// --- subcommands -----------------------------------------------------------

inline void cmd_two_scale(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  const GridSpec grid(c.n_cells);
  const auto init = load_initial(c, grid);
  const auto params = derive_params(init.u0, init.rho0, c.gamma);
  const auto run = advance(split_initial(init.u0, init.rho0, params), c.t_final,
                           AdvanceOptions{c.courant, c.record_every, std::nullopt});
  io::write_file_atomic(dir / "homogenized.csv",
                        io::to_text(series_csv(run.series, {"F", "B"},
                                               [](double) { return io::KeyValues{}; })));
  io::write_file_atomic(dir / "two_scale_meta.txt", io::to_text(homog_meta(c, run)));
  if (c.epsilon) {
    const double eps = *c.epsilon;
    const auto rec = reconstruct_series(run.series, params, eps);
    io::write_file_atomic(
        dir / "reconstructed.csv",
        io::to_text(series_csv(rec, {"U", "R"}, [eps](double t) {
          return io::KeyValues{
              {"tau", io::format_double(ReconstructionQuery::from_time(t, eps).tau())},
              {"epsilon", io::format_double(eps)}};
        })));
  }
  out << "two-scale: " << run.steps << " steps to t = " << run.final_state.t << "\n";
}

inline void cmd_direct(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  require(c.epsilon.has_value(), "direct requires --epsilon");
  const GridSpec grid(c.n_cells);
  const auto init = load_initial(c, grid);
  const double eps = *c.epsilon;
  const EulerState state = [&] {
    try {
      return init_direct(init.u0, init.rho0, eps, c.gamma);
    } catch (const std::invalid_argument& e) {
      throw NumericalError("init_direct", e.what());
    }
  }();
  const auto run =
      advance_direct(state, c.t_final, AdvanceOptions{c.courant, c.record_every, std::nullopt});
  const io::KeyValues hdr{{"epsilon", io::format_double(eps)},
                          {"gamma", io::format_double(c.gamma)},
                          {"form", "primitive"}};
  io::write_file_atomic(dir / "direct.csv",
                        io::to_text(series_csv(run.series, {"u", "rho"},
                                               [&](double) { return hdr; })));
  io::write_file_atomic(dir / "direct_meta.txt",
                        io::to_text(io::KeyValues{{"epsilon", io::format_double(eps)},
                                                  {"gamma", io::format_double(c.gamma)},
                                                  {"courant", io::format_double(c.courant)},
                                                  {"n_cells", std::to_string(c.n_cells)},
                                                  {"steps_taken", std::to_string(run.steps)},
                                                  {"final_t",
                                                   io::format_double(run.final_state.t)}}));
  out << "direct: " << run.steps << " steps to t = " << run.final_state.t << "\n";
}

inline void cmd_compare(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  require(c.epsilon.has_value(), "compare requires --epsilon");
  const GridSpec grid(c.n_cells);
  const auto init = load_initial(c, grid);
  const auto rep = compare_runs(init.u0, init.rho0, compare_config(c, *c.epsilon));
  const std::string table = error_table({rep});
  io::write_file_atomic(dir / "error_table.csv", table);
  out << table;
}

inline void cmd_sweep(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  require(c.epsilons.size() >= 2, "sweep requires --epsilons with at least two values");
  const GridSpec grid(c.n_cells);
  const auto init = load_initial(c, grid);
  SweepResult res;
  try {
    res = sweep(init.u0, init.rho0, c.epsilons, compare_config(c, c.epsilons.front()));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string table = error_table(res.reports);
  io::KeyValues summary{{"n_cells", std::to_string(c.n_cells)},
                        {"gamma", io::format_double(c.gamma)},
                        {"T", io::format_double(c.t_final)},
                        {"courant", io::format_double(c.courant)}};
  for (std::size_t k = 0; k < 6; ++k) {
    summary.emplace_back(std::string("K_") + error_columns[k], io::format_double(res.fits[k].K));
    summary.emplace_back(std::string("residual_") + error_columns[k],
                         io::format_double(res.fits[k].relative_residual));
  }
  io::write_file_atomic(dir / "error_table.csv", table);
  io::write_file_atomic(dir / "sweep_summary.txt", io::to_text(summary));
  out << table << io::to_text(summary);
}

inline void cmd_truncation(const RunConfig& c, const std::filesystem::path& dir,
                           std::ostream& out) {
  require(c.levels >= 1, "--levels must be >= 1");
  require(c.t_probe >= 0.0, "--t must be >= 0");
  require(c.initial.empty(), "truncation needs smooth data; --initial is not supported");
  const GridSpec grid(c.n_cells);
  const auto init = default_initial_data(grid);
  const auto params = derive_params(init.u0, init.rho0, c.gamma);
  // forward profile of the built-in data
  const double shift = (params.u_bar + params.rho_bar) / two_pi;
  CharacteristicsOracle oracle(
      [shift](double x) { return 0.5 * (default_u0(x) + default_rho0(x) - shift); },
      params.alpha, params.beta_plus);
  std::string csv =
      "n_cells,h,k,max_abs,l1,case_nonneg,case_nonpos,case_expansion,case_compression\n";
  double prev = 0.0;
  for (std::size_t lvl = 0; lvl < c.levels; ++lvl) {
    const GridSpec g(c.n_cells << lvl);
    const double k = oracle_cfl_step(oracle, g, c.t_probe, c.courant);
    const auto rep = truncation_error(oracle, g, k, c.t_probe);
    csv += std::to_string(g.n_cells()) + "," + io::format_double(rep.h) + "," +
           io::format_double(rep.k) + "," + io::format_double(rep.max_abs) + "," +
           io::format_double(rep.l1);
    for (auto n : rep.case_counts) csv += "," + std::to_string(n);
    csv += "\n";
    if (lvl > 0) out << "ratio " << (c.n_cells << (lvl - 1)) << "->" << g.n_cells() << ": "
                     << prev / rep.max_abs << "\n";
    prev = rep.max_abs;
  }
  io::write_file_atomic(dir / "truncation.csv", csv);
  out << csv;
}

inline void cmd_shock(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  require(c.threshold > 1.0, "--threshold must be > 1");
  const GridSpec grid(c.n_cells);
  const auto init = load_initial(c, grid);
  const auto params = derive_params(init.u0, init.rho0, c.gamma);
  const auto run = advance(split_initial(init.u0, init.rho0, params), c.t_final,
                           AdvanceOptions{c.courant, 1, std::nullopt});
  auto fmt = [](std::optional<double> t) { return t ? io::format_double(*t) : std::string("none"); };
  io::KeyValues kv{{"n_cells", std::to_string(c.n_cells)},
                   {"threshold_factor", io::format_double(c.threshold)},
                   {"shock_time_F", fmt(detect_shock_time(run.series, c.threshold, 0))},
                   {"shock_time_B", fmt(detect_shock_time(run.series, c.threshold, 1))}};
  if (c.epsilon) {
    const auto rec = reconstruct_series(run.series, params, *c.epsilon);
    kv.emplace_back("epsilon", io::format_double(*c.epsilon));
    kv.emplace_back("shock_time_U", fmt(detect_shock_time(rec, c.threshold, 0)));
    kv.emplace_back("shock_time_R", fmt(detect_shock_time(rec, c.threshold, 1)));
  }
  io::write_file_atomic(dir / "shock.txt", io::to_text(kv));
  out << io::to_text(kv);
}

inline void cmd_bench(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  std::vector<double> eps = c.epsilons;
  if (eps.empty() && c.epsilon) eps.push_back(*c.epsilon);
  require(!eps.empty(), "bench requires --epsilons or --epsilon");
  const GridSpec grid(c.n_cells);
  const auto init = load_initial(c, grid);
  const auto rows =
      benchmark_steps(init.u0, init.rho0, eps, BenchmarkConfig{c.gamma, c.t_final, c.courant, true});
  std::string csv = "epsilon,steps_homog,steps_direct,seconds_homog,seconds_direct\n";
  for (const auto& r : rows) {
    csv += io::format_double(r.epsilon) + "," + std::to_string(r.steps_homogenized) + "," +
           std::to_string(r.steps_direct) + "," + io::format_double(r.seconds_homogenized) + "," +
           io::format_double(r.seconds_direct) + "\n";
  }
  io::write_file_atomic(dir / "bench.csv", csv);
  out << csv;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  RunConfig cfg;
  if (const char* env = std::getenv(output_dir_env)) cfg.out_dir = env;

  CLI::App app{"Two-scale and direct solvers for the weakly compressible 1D isentropic Euler "
               "equations",
               "twoscale"};
  app.require_subcommand(1);

  auto common = [&cfg](CLI::App* sub) {
    sub->add_option("--n-cells", cfg.n_cells, "number of cells on [0, 2pi)")
        ->capture_default_str();
    sub->add_option("--gamma", cfg.gamma, "adiabatic coefficient")->capture_default_str();
    sub->add_option("--T", cfg.t_final, "final time")->capture_default_str();
    sub->add_option("--courant", cfg.courant, "Courant number in (0, 1]")->capture_default_str();
    sub->add_option("--out", cfg.out_dir,
                    std::string("output directory (default $") + output_dir_env + " or .)");
    sub->add_option("--initial", cfg.initial, "tabulated initial data file (x,u0,rho0)");
  };
  auto with_epsilon = [&cfg](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--epsilon", cfg.epsilon, "Mach number");
    if (required) o->required();
  };
  auto with_epsilons = [&cfg](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--epsilons", cfg.epsilons, "comma-separated Mach numbers")
                  ->delimiter(',');
    if (required) o->required();
  };
  auto with_record = [&cfg](CLI::App* sub) {
    sub->add_option("--record-every", cfg.record_every, "snapshot every n steps")
        ->capture_default_str();
  };

  auto* two = app.add_subcommand("two-scale", "split, advance and reconstruct");
  common(two);
  with_epsilon(two, false);
  with_record(two);
  auto* dir = app.add_subcommand("direct", "Roe solver on the stiff system");
  common(dir);
  with_epsilon(dir, true);
  with_record(dir);
  auto* cmp = app.add_subcommand("compare", "space-time error norms for one epsilon");
  common(cmp);
  with_epsilon(cmp, true);
  auto* swp = app.add_subcommand("sweep", "error table and fitted slopes over epsilons");
  common(swp);
  with_epsilons(swp, true);
  auto* trn = app.add_subcommand("truncation", "local truncation error refinement study");
  common(trn);
  trn->add_option("--levels", cfg.levels, "number of grids (each doubles n-cells)")
      ->capture_default_str();
  trn->add_option("--t", cfg.t_probe, "evaluation time (pre-shock)")->capture_default_str();
  auto* shk = app.add_subcommand("shock", "detect gradient blow-up time");
  common(shk);
  with_epsilon(shk, false);
  shk->add_option("--threshold", cfg.threshold, "slope growth factor (> 1)")
      ->capture_default_str();
  auto* bch = app.add_subcommand("bench", "step counts and wall time per epsilon");
  common(bch);
  with_epsilon(bch, false);
  with_epsilons(bch, false);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    // help requests count as usage errors as well: nothing is computed
    err << (e.get_exit_code() == 0 ? "" : std::string("error: ") + e.what() + "\n");
    const CLI::App* target = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << target->help();
    return usage_error;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    detail::validate(cfg);
    const auto out_dir = detail::prepare_output_dir(cfg.out_dir);
    if (cfg.command == "two-scale") detail::cmd_two_scale(cfg, out_dir, out);
    else if (cfg.command == "direct") detail::cmd_direct(cfg, out_dir, out);
    else if (cfg.command == "compare") detail::cmd_compare(cfg, out_dir, out);
    else if (cfg.command == "sweep") detail::cmd_sweep(cfg, out_dir, out);
    else if (cfg.command == "truncation") detail::cmd_truncation(cfg, out_dir, out);
    else if (cfg.command == "shock") detail::cmd_shock(cfg, out_dir, out);
    else if (cfg.command == "bench") detail::cmd_bench(cfg, out_dir, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const NumericalError& e) {
    err << "error: " << cfg.command << ": " << e.what() << "\n";
    return numerical_failure;
  } catch (const std::exception& e) {
    err << "error: " << cfg.command << ": " << e.what() << "\n";
    return numerical_failure;
  }
  return ok;
}

}  // namespace twoscale::cli
