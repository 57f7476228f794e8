#pragma once

#include <optional>
#include <span>
#include <vector>

#include "thermoflux/conduction.hpp"
#include "thermoflux/grid.hpp"
#include "thermoflux/material.hpp"
#include "thermoflux/radiation.hpp"

namespace thermoflux {

struct CouplingControls {
  double couple_tol = 1e-6;  // K
  int couple_max = 20;
};

struct SteadyDetection {
  double eps = 0.05;  // K
  int window = 2;     // snapshots
};

/// Everything one run needs. Defaults describe the demo slab: 0.1 m, 201
/// nodes, ramp held at its 350 K peak, 100 s horizon, radiation on.
struct SimulationConfig {
  Grid1D grid{0.1, 201};
  MaterialModel material = default_material();
  std::vector<SpectralBand> bands = default_bands();
  int n_ordinates = 8;
  SweepControls sweep;
  BoundarySchedule bc{50.0, 1.0, 300.0, 300.0, /*hold_peak=*/true};
  double dt = 0.05;      // s
  double t_end = 100.0;  // s
  CouplingControls coupling;
  StepControls solver;
  std::vector<double> snapshot_times = {1.0, 5.0, 10.0, 50.0, 100.0};
  bool radiation_enabled = true;
  SteadyDetection steady;

  /// Throws ConfigError on any violated constraint.
  void validate() const;

  /// Demo material: diffusive enough that the default run settles well
  /// inside the 100 s horizon.
  static MaterialModel default_material();

  /// Placeholder band set (not measured data): mild, mostly absorbing.
  static std::vector<SpectralBand> default_bands();
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> temperature;  // K
  std::vector<double> q_cond;      // W/m^2
  std::vector<double> q_rad;       // W/m^2
  std::vector<double> q_total;     // q_cond + q_rad, stored exactly as summed
};

struct SimulationDiagnostics {
  long total_steps = 0;
  int max_coupling_iters = 0;
  int max_picard_iters = 0;
  double max_energy_residual = 0.0;
  double max_couple_residual = 0.0;  // K, worst accepted coupling change
};

struct SimulationResult {
  std::vector<Snapshot> snapshots;
  std::optional<double> steady_state_time;
  SimulationDiagnostics diagnostics;
};

/// Advance the coupled system from the uniform initial state T = T_E.
/// Each step alternates radiation (sweep, flux, source from the current
/// iterate) with an implicit conduction step from the old state until the
/// iterate changes by less than couple_tol. Deterministic for a fixed config.
SimulationResult run_simulation(const SimulationConfig& config);

/// Earliest snapshot time after which every consecutive change inside the
/// window stays below eps (max over nodes). none if the history never
/// settles. window counts snapshots and must be >= 2.
std::optional<double> detect_steady_state(std::span<const Snapshot> history,
                                          int window, double eps);

/// One row per (snapshot, node), columns (t, x, T, q_r, q_c).
struct DatasetRow {
  double t;
  double x;
  double temperature;
  double q_rad;
  double q_cond;
};

std::vector<DatasetRow> emit_dataset(const SimulationResult& result,
                                     const Grid1D& grid);

}  // namespace thermoflux
