#pragma once

#include <span>
#include <vector>

#include "thermoflux/grid.hpp"
#include "thermoflux/material.hpp"

namespace thermoflux {

/// Front-face temperature schedule: a linear ramp from base_temperature at
/// ramp_rate for t <= ramp_end. After ramp_end the face either drops back to
/// base_temperature (hold_peak = false) or stays at the ramp peak
/// (hold_peak = true). The back face is fixed at back_temperature.
struct BoundarySchedule {
  double ramp_rate = 50.0;          // K/s
  double ramp_end = 1.0;            // s
  double base_temperature = 300.0;  // K
  double back_temperature = 300.0;  // K (T at x = length)
  bool hold_peak = false;
};

/// f(t) at the front face. Throws std::domain_error for t < 0.
double boundary_temperature(const BoundarySchedule& schedule, double t);

/// Temperature profile at one time level.
struct ThermalState {
  double t = 0.0;                   // s
  std::vector<double> temperature;  // K per node
};

struct StepControls {
  double picard_tol = 1e-8;  // K
  int picard_max = 50;
};

/// Per-step bookkeeping. The energy terms use the scheme's own two-point
/// boundary fluxes and the heat capacity frozen at the converged iterate, so
/// lhs == rhs up to the Picard tolerance.
struct StepDiagnostics {
  int picard_iters = 0;
  double picard_residual = 0.0;      // max node change of the last iterate, K
  double energy_lhs = 0.0;           // sum rho*cp*dT*dx over interior, J/m^2
  double energy_rhs = 0.0;           // dt*(q(0) - q(E) + sum S_r dx), J/m^2
  double energy_residual_rel = 0.0;  // |lhs-rhs| / max(|lhs|,|rhs|,dt*gross)
  double boundary_flux_hot = 0.0;    // scheme flux at x=0, W/m^2
  double boundary_flux_cold = 0.0;   // scheme flux at x=length, W/m^2
};

/// One backward-Euler step of rho*cp dT/dt = d/dx(K dT/dx) + S_r, solved in
/// the Kirchhoff variable so the spatial operator is linear. Property
/// nonlinearity is handled by Picard iteration (relinearize, solve the
/// tridiagonal system in delta form by the Thomas algorithm, invert the
/// transform). Dirichlet rows are pinned to boundary_temperature(t+dt) and
/// back_temperature.
///
/// Throws ConvergenceError when Picard does not reach picard_tol within
/// picard_max iterations.
ThermalState implicit_step(const ThermalState& state,
                           std::span<const double> radiative_source,
                           const MaterialModel& material, const Grid1D& grid,
                           const BoundarySchedule& schedule, double dt,
                           const StepControls& controls = {},
                           StepDiagnostics* diagnostics = nullptr);

/// q_c(x) = -K(T) dT/dx, central differences in the interior and
/// second-order one-sided stencils at the boundaries. W/m^2.
std::vector<double> conductive_flux(const MaterialModel& material,
                                    const ThermalState& state,
                                    const Grid1D& grid);

}  // namespace thermoflux
