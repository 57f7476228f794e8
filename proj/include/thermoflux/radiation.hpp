#pragma once

#include <span>
#include <vector>

#include "thermoflux/grid.hpp"

namespace thermoflux {

/// Planck-law radiation constants. Fixed, never configurable.
inline constexpr double kPlanckC1 = 1.19e-16;  // W m^2
inline constexpr double kPlanckC2 = 1.44e-2;   // m K

/// One spectral band with direction-independent properties.
/// kappa = beta * (1 - albedo) by construction.
struct SpectralBand {
  double lambda_lo = 0.0;  // m
  double lambda_hi = 0.0;  // m
  double beta = 0.0;       // extinction coefficient, 1/m
  double kappa = 0.0;      // absorption coefficient, 1/m
  double albedo = 0.0;     // scattering fraction sigma_s/beta

  double width() const { return lambda_hi - lambda_lo; }
};

SpectralBand make_band(double lambda_lo, double lambda_hi, double beta,
                       double albedo);

/// Throws ConfigError unless bands are contiguous, non-overlapping, and each
/// band satisfies its own bounds (lo < hi, beta >= 0, 0 <= albedo <= 1,
/// kappa == beta*(1-albedo)).
void validate_bands(std::span<const SpectralBand> bands);

/// Gauss-Legendre direction cosines on (0, 1], one hemisphere; the other
/// hemisphere reuses the same set with negated mu. Weights sum to 1.
struct OrdinateSet {
  std::vector<double> mu;
  std::vector<double> weight;

  int size() const { return static_cast<int>(mu.size()); }
};

/// n points per hemisphere, 1 <= n <= 64. Exact for polynomials in mu of
/// degree <= 2n-1 on (0, 1].
OrdinateSet build_quadrature(int n);

/// Spectral blackbody intensity C1 / (lambda^5 (exp(C2/(lambda T)) - 1)),
/// W/(m^2 m sr). Throws std::domain_error for non-positive inputs.
double planck_intensity(double lambda, double temperature);

/// Band-integrated blackbody intensity, W/(m^2 sr): composite Gauss-Legendre
/// over [lambda_lo, lambda_hi] with n_panels panels (8 points each).
double band_emission(const SpectralBand& band, double temperature,
                     int n_panels);

/// Sum of band_emission over a band set (total blackbody intensity the band
/// model can represent).
double band_set_intensity(std::span<const SpectralBand> bands,
                          double temperature, int n_panels);

/// Discrete intensities I[band][signed ordinate][node] as band-averaged
/// spectral values, W/(m^2 m sr). Ordinate index k < n_ordinates is the
/// forward hemisphere (+mu_k, marching from x=0), k >= n_ordinates the
/// backward hemisphere (-mu_{k-n}, marching from x=length).
struct IntensityField {
  int n_bands = 0;
  int n_ordinates = 0;  // per hemisphere
  int n_nodes = 0;

  std::vector<double> data;

  double& at(int band, int signed_ordinate, int node) {
    return data[(static_cast<std::size_t>(band) * 2 * n_ordinates +
                 signed_ordinate) * n_nodes + node];
  }
  double at(int band, int signed_ordinate, int node) const {
    return data[(static_cast<std::size_t>(band) * 2 * n_ordinates +
                 signed_ordinate) * n_nodes + node];
  }
};

struct SweepControls {
  double scatter_tol = 1e-8;
  int max_scatter_iters = 200;
  int emission_panels = 8;
};

/// Black boundary temperatures at x=0 and x=length.
struct RadiativeBoundary {
  double t_hot = 300.0;   // K, x = 0
  double t_cold = 300.0;  // K, x = length
};

/// Solve the quasi-steady band RTE by upwind marching per (band, ordinate)
/// with source iteration on the isotropic scattering term. The per-cell
/// update uses a positivity-preserving rational attenuation factor
/// 1/(1 + tau + tau^2/2) with linearly reconstructed source, which is
/// second-order accurate and exact for a spatially constant source.
///
/// OpenMP-parallel over (band, ordinate) pairs; bitwise identical to
/// sweep_intensity_serial (fixed reduction order throughout).
/// Throws ConvergenceError if the scattering iteration exceeds its cap.
IntensityField sweep_intensity(const Grid1D& grid,
                               std::span<const SpectralBand> bands,
                               const OrdinateSet& ordinates,
                               std::span<const double> temperature,
                               const RadiativeBoundary& bc,
                               const SweepControls& controls = {});

/// Serial reference implementation of sweep_intensity, kept for testing and
/// benchmarking against the parallel kernel.
IntensityField sweep_intensity_serial(const Grid1D& grid,
                                      std::span<const SpectralBand> bands,
                                      const OrdinateSet& ordinates,
                                      std::span<const double> temperature,
                                      const RadiativeBoundary& bc,
                                      const SweepControls& controls = {});

/// q_r(x) = 2 pi * sum_bands dlambda * sum_{+-k} w_k mu_k I, W/m^2,
/// positive toward increasing x.
std::vector<double> radiative_flux(const IntensityField& field,
                                   const OrdinateSet& ordinates,
                                   std::span<const SpectralBand> bands);

/// S_r(x) = -dq_r/dx, second-order central differences (one-sided
/// second-order at the boundaries). W/m^3.
std::vector<double> radiative_source(std::span<const double> q_r,
                                     const Grid1D& grid);

namespace detail {
/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);
}  // namespace detail

}  // namespace thermoflux
