#include "thermoflux/conduction.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "thermoflux/errors.hpp"

namespace thermoflux {

Grid1D::Grid1D(double length, int n_nodes) : length_(length), n_nodes_(n_nodes) {
  if (!(length > 0.0)) throw ConfigError("grid.length_m must be > 0");
  if (n_nodes < 3) throw ConfigError("grid.n_nodes must be >= 3");
  dx_ = length_ / (n_nodes_ - 1);
}

double boundary_temperature(const BoundarySchedule& schedule, double t) {
  if (t < 0.0) {
    std::ostringstream msg;
    msg << "boundary_temperature: negative time " << t;
    throw std::domain_error(msg.str());
  }
  if (t <= schedule.ramp_end)
    return schedule.ramp_rate * t + schedule.base_temperature;
  if (schedule.hold_peak)
    return schedule.ramp_rate * schedule.ramp_end + schedule.base_temperature;
  return schedule.base_temperature;
}

namespace {

// Thomas algorithm; diag/rhs are overwritten, solution lands in rhs.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

ThermalState implicit_step(const ThermalState& state,
                           std::span<const double> radiative_source,
                           const MaterialModel& material, const Grid1D& grid,
                           const BoundarySchedule& schedule, double dt,
                           const StepControls& controls,
                           StepDiagnostics* diagnostics) {
  const int n = grid.n_nodes();
  if (static_cast<int>(state.temperature.size()) != n)
    throw std::invalid_argument("implicit_step: state does not match the grid");
  if (static_cast<int>(radiative_source.size()) != n)
    throw std::invalid_argument("implicit_step: source does not match the grid");
  if (!(dt > 0.0)) throw std::invalid_argument("implicit_step: dt must be > 0");

  const double t_new = state.t + dt;
  const double bc_hot = boundary_temperature(schedule, t_new);
  const double bc_cold = schedule.back_temperature;
  const double dx = grid.dx();
  const double r = material.k_ref() / (dx * dx);

  // Current Picard iterate, boundary nodes already at the new values.
  std::vector<double> t_iter = state.temperature;
  t_iter[0] = bc_hot;
  t_iter[n - 1] = bc_cold;

  std::vector<double> theta(n), lower(n), diag(n), upper(n), rhs(n);
  StepDiagnostics diag_out;

  for (int iter = 1; iter <= controls.picard_max; ++iter) {
    for (int i = 0; i < n; ++i) theta[i] = material.kirchhoff_theta(t_iter[i]);

    // Delta form: solve for the Kirchhoff-variable correction so that an
    // already-converged state yields an exactly zero right-hand side.
    lower[0] = 0.0;
    diag[0] = 1.0;
    upper[0] = 0.0;
    rhs[0] = 0.0;
    lower[n - 1] = 0.0;
    diag[n - 1] = 1.0;
    upper[n - 1] = 0.0;
    rhs[n - 1] = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double cap = material.volumetric_heat_capacity(t_iter[i]);
      const double slope = material.dtheta_dt(t_iter[i]);  // dtheta/dT
      lower[i] = -r;
      upper[i] = -r;
      diag[i] = cap / (slope * dt) + 2.0 * r;
      rhs[i] = radiative_source[i] +
               (cap / dt) * (state.temperature[i] - t_iter[i]) +
               r * (theta[i + 1] - 2.0 * theta[i] + theta[i - 1]);
    }
    solve_tridiagonal(lower, diag, upper, rhs);

    double change = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double t_next = rhs[i] == 0.0
                                ? t_iter[i]
                                : material.kirchhoff_inverse(theta[i] + rhs[i],
                                                             t_iter[i]);
      change = std::max(change, std::abs(t_next - t_iter[i]));
      t_iter[i] = t_next;
    }

    diag_out.picard_iters = iter;
    diag_out.picard_residual = change;
    if (change < controls.picard_tol) break;
    if (iter == controls.picard_max) {
      std::ostringstream msg;
      msg << "implicit_step: Picard iteration did not reach " << controls.picard_tol
          << " K at t=" << t_new;
      throw ConvergenceError(msg.str(), change);
    }
  }

  // Discrete energy balance of the accepted step, using the scheme's own
  // two-point boundary fluxes and interior source sum.
  for (int i = 0; i < n; ++i) theta[i] = material.kirchhoff_theta(t_iter[i]);
  const double q_hot = -material.k_ref() * (theta[1] - theta[0]) / dx;
  const double q_cold = -material.k_ref() * (theta[n - 1] - theta[n - 2]) / dx;
  double lhs = 0.0, source_sum = 0.0, gross = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    const double cap = material.volumetric_heat_capacity(t_iter[i]);
    lhs += cap * (t_iter[i] - state.temperature[i]) * dx;
    source_sum += radiative_source[i] * dx;
    gross += std::abs(radiative_source[i]) * dx;
  }
  const double rhs_energy = dt * (q_hot - q_cold + source_sum);
  gross = dt * (gross + std::abs(q_hot) + std::abs(q_cold));
  const double denom = std::max({std::abs(lhs), std::abs(rhs_energy), gross});
  diag_out.energy_lhs = lhs;
  diag_out.energy_rhs = rhs_energy;
  diag_out.energy_residual_rel = denom > 0.0 ? std::abs(lhs - rhs_energy) / denom : 0.0;
  diag_out.boundary_flux_hot = q_hot;
  diag_out.boundary_flux_cold = q_cold;
  if (diagnostics) *diagnostics = diag_out;

  ThermalState next;
  next.t = t_new;
  next.temperature = std::move(t_iter);
  return next;
}

std::vector<double> conductive_flux(const MaterialModel& material,
                                    const ThermalState& state,
                                    const Grid1D& grid) {
  const int n = grid.n_nodes();
  if (static_cast<int>(state.temperature.size()) != n)
    throw std::invalid_argument("conductive_flux: state does not match the grid");
  const auto& t = state.temperature;
  const double inv2dx = 1.0 / (2.0 * grid.dx());
  std::vector<double> q(n);
  q[0] = -material.conductivity(t[0]) * (-3.0 * t[0] + 4.0 * t[1] - t[2]) * inv2dx;
  for (int i = 1; i + 1 < n; ++i)
    q[i] = -material.conductivity(t[i]) * (t[i + 1] - t[i - 1]) * inv2dx;
  q[n - 1] = -material.conductivity(t[n - 1]) *
             (3.0 * t[n - 1] - 4.0 * t[n - 2] + t[n - 3]) * inv2dx;
  return q;
}

}  // namespace thermoflux
