#include "thermoflux/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "thermoflux/errors.hpp"

namespace thermoflux {

MaterialModel SimulationConfig::default_material() {
  return MaterialModel(1.4, {1.0}, 1.0e4, {1.0});
}

std::vector<SpectralBand> SimulationConfig::default_bands() {
  return {make_band(0.5e-6, 2e-6, 2.0, 0.2), make_band(2e-6, 5e-6, 6.0, 0.2),
          make_band(5e-6, 10e-6, 15.0, 0.1),
          make_band(10e-6, 50e-6, 30.0, 0.0)};
}

void SimulationConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("time.dt_s must be > 0");
  if (!(t_end >= dt)) throw ConfigError("time.t_end_s must be >= time.dt_s");
  if (!(coupling.couple_tol > 0.0))
    throw ConfigError("coupling.couple_tol must be > 0");
  if (coupling.couple_max < 1)
    throw ConfigError("coupling.couple_max must be >= 1");
  if (!(solver.picard_tol > 0.0))
    throw ConfigError("solver.picard_tol must be > 0");
  if (solver.picard_max < 1) throw ConfigError("solver.picard_max must be >= 1");
  if (steady.window < 2) throw ConfigError("steady.window must be >= 2");
  if (!(steady.eps > 0.0)) throw ConfigError("steady.eps must be > 0");
  if (sweep.emission_panels < 2)
    throw ConfigError("radiation.emission_panels must be >= 2");
  if (sweep.max_scatter_iters < 1)
    throw ConfigError("radiation.max_scatter_iters must be >= 1");
  if (!(sweep.scatter_tol > 0.0))
    throw ConfigError("radiation.scatter_tol must be > 0");
  if (n_ordinates < 1 || n_ordinates > 64)
    throw ConfigError("radiation.n_ordinates must be in [1, 64]");
  validate_bands(bands);
  for (double s : snapshot_times)
    if (s < 0.0 || s > t_end) {
      std::ostringstream msg;
      msg << "snapshots: time " << s << " outside [0, " << t_end << "]";
      throw ConfigError(msg.str());
    }
}

namespace {

std::vector<long> snapshot_steps(const SimulationConfig& config, long n_steps) {
  std::set<long> steps;
  for (double s : config.snapshot_times) {
    long idx = std::lround(s / config.dt);
    idx = std::max(0L, std::min(n_steps, idx));
    steps.insert(idx);
  }
  return {steps.begin(), steps.end()};
}

Snapshot take_snapshot(const SimulationConfig& config, const Grid1D& grid,
                       const OrdinateSet& ordinates, const ThermalState& state) {
  Snapshot snap;
  snap.t = state.t;
  snap.temperature = state.temperature;
  snap.q_cond = conductive_flux(config.material, state, grid);
  if (config.radiation_enabled) {
    auto field = sweep_intensity(grid, config.bands, ordinates,
                                 state.temperature,
                                 {state.temperature.front(), config.bc.back_temperature},
                                 config.sweep);
    snap.q_rad = radiative_flux(field, ordinates, config.bands);
  } else {
    snap.q_rad.assign(state.temperature.size(), 0.0);
  }
  snap.q_total.resize(snap.q_cond.size());
  for (std::size_t i = 0; i < snap.q_cond.size(); ++i)
    snap.q_total[i] = snap.q_cond[i] + snap.q_rad[i];
  return snap;
}

}  // namespace

SimulationResult run_simulation(const SimulationConfig& config) {
  config.validate();
  const Grid1D& grid = config.grid;
  const int n = grid.n_nodes();
  const OrdinateSet ordinates = build_quadrature(config.n_ordinates);

  const long n_steps = std::lround(config.t_end / config.dt);
  const auto snap_steps = snapshot_steps(config, n_steps);

  SimulationResult result;
  ThermalState state{0.0, std::vector<double>(n, config.bc.back_temperature)};
  std::vector<double> zero_source(n, 0.0);

  std::size_t snap_cursor = 0;
  if (snap_cursor < snap_steps.size() && snap_steps[snap_cursor] == 0) {
    result.snapshots.push_back(take_snapshot(config, grid, ordinates, state));
    ++snap_cursor;
  }

  for (long step = 1; step <= n_steps; ++step) {
    StepDiagnostics step_diag;
    if (!config.radiation_enabled) {
      state = implicit_step(state, zero_source, config.material, grid,
                            config.bc, config.dt, config.solver, &step_diag);
      result.diagnostics.max_coupling_iters =
          std::max(result.diagnostics.max_coupling_iters, 1);
    } else {
      ThermalState accepted;
      std::vector<double> iterate = state.temperature;
      double change = 0.0;
      bool converged = false;
      for (int c = 1; c <= config.coupling.couple_max; ++c) {
        auto field = sweep_intensity(grid, config.bands, ordinates, iterate,
                                     {boundary_temperature(config.bc, state.t + config.dt),
                                      config.bc.back_temperature},
                                     config.sweep);
        auto q_r = radiative_flux(field, ordinates, config.bands);
        auto s_r = radiative_source(q_r, grid);
        accepted = implicit_step(state, s_r, config.material, grid, config.bc,
                                 config.dt, config.solver, &step_diag);
        change = 0.0;
        for (int i = 0; i < n; ++i)
          change = std::max(change,
                            std::abs(accepted.temperature[i] - iterate[i]));
        iterate = accepted.temperature;
        result.diagnostics.max_coupling_iters =
            std::max(result.diagnostics.max_coupling_iters, c);
        // c=1 compares against the old state: if the whole step moved less
        // than couple_tol the lagged source is already consistent.
        if (change < config.coupling.couple_tol) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        std::ostringstream msg;
        msg << "run_simulation: coupling did not converge at step " << step
            << " (t=" << state.t + config.dt << " s)";
        throw ConvergenceError(msg.str(), change);
      }
      result.diagnostics.max_couple_residual =
          std::max(result.diagnostics.max_couple_residual, change);
      state = std::move(accepted);
    }

    state.t = static_cast<double>(step) * config.dt;  // keep the clock exact

    result.diagnostics.total_steps = step;
    result.diagnostics.max_picard_iters =
        std::max(result.diagnostics.max_picard_iters, step_diag.picard_iters);
    result.diagnostics.max_energy_residual = std::max(
        result.diagnostics.max_energy_residual, step_diag.energy_residual_rel);

    if (snap_cursor < snap_steps.size() && snap_steps[snap_cursor] == step) {
      result.snapshots.push_back(take_snapshot(config, grid, ordinates, state));
      ++snap_cursor;
    }
  }

  result.steady_state_time =
      detect_steady_state(result.snapshots, config.steady.window, config.steady.eps);
  return result;
}

std::optional<double> detect_steady_state(std::span<const Snapshot> history,
                                          int window, double eps) {
  if (window < 2) throw ConfigError("detect_steady_state: window must be >= 2");
  const int n = static_cast<int>(history.size());
  for (int start = 0; start + window <= n; ++start) {
    bool settled = true;
    for (int j = start + 1; j < start + window && settled; ++j) {
      double change = 0.0;
      const auto& a = history[j - 1].temperature;
      const auto& b = history[j].temperature;
      for (std::size_t i = 0; i < a.size(); ++i)
        change = std::max(change, std::abs(b[i] - a[i]));
      if (!(change < eps)) settled = false;
    }
    if (settled) return history[start].t;
  }
  return std::nullopt;
}

std::vector<DatasetRow> emit_dataset(const SimulationResult& result,
                                     const Grid1D& grid) {
  if (result.snapshots.empty())
    throw std::invalid_argument("emit_dataset: empty result");
  std::vector<DatasetRow> rows;
  rows.reserve(result.snapshots.size() * grid.n_nodes());
  for (const auto& snap : result.snapshots)
    for (int i = 0; i < grid.n_nodes(); ++i)
      rows.push_back({snap.t, grid.x(i), snap.temperature[i], snap.q_rad[i],
                      snap.q_cond[i]});
  return rows;
}

}  // namespace thermoflux
