#include "thermoflux/radiation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "thermoflux/errors.hpp"

namespace thermoflux {

namespace detail {

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

}  // namespace detail

namespace {

// Folded quadrature table for one band: integral of the Planck function over
// the band reduces to sum_q a_q / expm1(b_q / T).
struct BandTable {
  std::vector<double> a;  // w_q * C1 / lambda_q^5
  std::vector<double> b;  // C2 / lambda_q
};

BandTable make_band_table(const SpectralBand& band, int n_panels) {
  if (n_panels < 2)
    throw std::invalid_argument("band_emission: n_panels must be >= 2");
  if (!(band.lambda_hi >= band.lambda_lo))
    throw std::invalid_argument("band_emission: lambda_hi < lambda_lo");
  BandTable table;
  if (band.width() <= 0.0) return table;  // zero-width band integrates to 0
  if (!(band.lambda_lo > 0.0))
    throw std::domain_error("band_emission: wavelengths must be positive");

  static const int kPanelPoints = 8;
  std::vector<double> gx, gw;
  detail::gauss_legendre(kPanelPoints, gx, gw);

  const double panel_width = band.width() / n_panels;
  table.a.reserve(static_cast<std::size_t>(n_panels) * kPanelPoints);
  table.b.reserve(static_cast<std::size_t>(n_panels) * kPanelPoints);
  for (int p = 0; p < n_panels; ++p) {
    const double lo = band.lambda_lo + p * panel_width;
    const double mid = lo + 0.5 * panel_width;
    const double half = 0.5 * panel_width;
    for (int q = 0; q < kPanelPoints; ++q) {
      const double lambda = mid + half * gx[q];
      const double l2 = lambda * lambda;
      const double l5 = l2 * l2 * lambda;
      table.a.push_back(gw[q] * half * kPlanckC1 / l5);
      table.b.push_back(kPlanckC2 / lambda);
    }
  }
  return table;
}

double table_emission(const BandTable& table, double temperature) {
  double sum = 0.0;
  for (std::size_t q = 0; q < table.a.size(); ++q)
    sum += table.a[q] / std::expm1(table.b[q] / temperature);
  return sum;
}

// One upwind march along a single ray. tau is the cell optical depth along
// the ray; the attenuation factor 1/(1+tau+tau^2/2) keeps intensities
// non-negative for any tau and matches exp(-tau) to second order. Source
// coefficients are chosen so that a constant source J = beta*Ib reproduces
// I = Ib exactly (radiative equilibrium is a fixed point).
inline void march_ray(double mu, double beta, double dx, int n_nodes,
                      const double* source, double boundary_intensity,
                      bool forward, double* intensity) {
  const double tau = beta * dx / mu;
  const double attenuation = 1.0 / (1.0 + tau + 0.5 * tau * tau);
  const double c_up = 0.5 * dx * attenuation / mu;
  const double c_dn = 0.5 * dx * (1.0 + tau) * attenuation / mu;
  if (forward) {
    intensity[0] = boundary_intensity;
    for (int i = 0; i + 1 < n_nodes; ++i)
      intensity[i + 1] = attenuation * intensity[i] + c_up * source[i] +
                         c_dn * source[i + 1];
  } else {
    intensity[n_nodes - 1] = boundary_intensity;
    for (int i = n_nodes - 1; i > 0; --i)
      intensity[i - 1] = attenuation * intensity[i] + c_up * source[i] +
                         c_dn * source[i - 1];
  }
}

struct SweepWork {
  std::vector<BandTable> tables;
  std::vector<double> emission;  // [band][node] band-averaged Ib
  std::vector<double> i_hot;     // per band, boundary at x=0
  std::vector<double> i_cold;    // per band, boundary at x=length
  bool has_scattering = false;
};

void check_sweep_args(const Grid1D& grid, std::span<const SpectralBand> bands,
                      const OrdinateSet& ordinates,
                      std::span<const double> temperature) {
  if (bands.empty()) throw ConfigError("sweep_intensity: no spectral bands");
  if (ordinates.size() < 1)
    throw ConfigError("sweep_intensity: empty ordinate set");
  if (static_cast<int>(temperature.size()) != grid.n_nodes())
    throw std::invalid_argument(
        "sweep_intensity: temperature profile does not cover the grid");
}

SweepWork prepare_sweep(std::span<const SpectralBand> bands,
                        std::span<const double> temperature,
                        const RadiativeBoundary& bc,
                        const SweepControls& controls, bool parallel) {
  const int nb = static_cast<int>(bands.size());
  const int nn = static_cast<int>(temperature.size());
  SweepWork work;
  work.tables.reserve(nb);
  for (const auto& band : bands) {
    work.tables.push_back(make_band_table(band, controls.emission_panels));
    if (band.beta > 0.0 && band.albedo > 0.0) work.has_scattering = true;
  }

  work.emission.assign(static_cast<std::size_t>(nb) * nn, 0.0);
  work.i_hot.assign(nb, 0.0);
  work.i_cold.assign(nb, 0.0);
  for (int b = 0; b < nb; ++b) {
    const double w = bands[b].width();
    if (w <= 0.0) continue;
    work.i_hot[b] = table_emission(work.tables[b], bc.t_hot) / w;
    work.i_cold[b] = table_emission(work.tables[b], bc.t_cold) / w;
  }

  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int idx = 0; idx < nb * nn; ++idx) {
      const int b = idx / nn;
      const double w = bands[b].width();
      if (w > 0.0)
        work.emission[idx] =
            table_emission(work.tables[b], temperature[idx % nn]) / w;
    }
  } else {
    for (int idx = 0; idx < nb * nn; ++idx) {
      const int b = idx / nn;
      const double w = bands[b].width();
      if (w > 0.0)
        work.emission[idx] =
            table_emission(work.tables[b], temperature[idx % nn]) / w;
    }
  }
  return work;
}

// Isotropic source for one band at every node given the angular integral g.
void build_source(const SpectralBand& band, const double* emission,
                  const double* g, int n_nodes, double* source) {
  const double half_scatter = 0.5 * band.albedo * band.beta;
  for (int i = 0; i < n_nodes; ++i)
    source[i] = band.kappa * emission[i] + half_scatter * g[i];
}

// Angular integral sum_k w_k (I+ + I-) at every node, fixed k order.
void angular_integral(const IntensityField& field, const OrdinateSet& ords,
                      int band, double* g) {
  const int n_ord = ords.size();
  const int nn = field.n_nodes;
  for (int i = 0; i < nn; ++i) {
    double sum = 0.0;
    for (int k = 0; k < n_ord; ++k)
      sum += ords.weight[k] * (field.at(band, k, i) + field.at(band, n_ord + k, i));
    g[i] = sum;
  }
}

double scatter_change(const std::vector<double>& g_new,
                      const std::vector<double>& g_old, int nb, int nn) {
  double worst = 0.0;
  for (int b = 0; b < nb; ++b) {
    double scale = 0.0, delta = 0.0;
    for (int i = 0; i < nn; ++i) {
      const std::size_t idx = static_cast<std::size_t>(b) * nn + i;
      scale = std::max(scale, std::abs(g_new[idx]));
      delta = std::max(delta, std::abs(g_new[idx] - g_old[idx]));
    }
    if (scale > 0.0) worst = std::max(worst, delta / scale);
  }
  return worst;
}

}  // namespace

SpectralBand make_band(double lambda_lo, double lambda_hi, double beta,
                       double albedo) {
  SpectralBand band;
  band.lambda_lo = lambda_lo;
  band.lambda_hi = lambda_hi;
  band.beta = beta;
  band.albedo = albedo;
  band.kappa = beta * (1.0 - albedo);
  return band;
}

void validate_bands(std::span<const SpectralBand> bands) {
  if (bands.empty()) throw ConfigError("radiation.bands must be non-empty");
  for (std::size_t j = 0; j < bands.size(); ++j) {
    const auto& b = bands[j];
    std::ostringstream key;
    key << "radiation.bands[" << j << "]";
    if (!(b.lambda_lo > 0.0 && b.lambda_lo < b.lambda_hi))
      throw ConfigError(key.str() + ": need 0 < lambda_lo < lambda_hi");
    if (!(b.beta >= 0.0)) throw ConfigError(key.str() + ": beta must be >= 0");
    if (!(b.albedo >= 0.0 && b.albedo <= 1.0))
      throw ConfigError(key.str() + ": albedo must be in [0, 1]");
    if (std::abs(b.kappa - b.beta * (1.0 - b.albedo)) >
        1e-12 * std::max(1.0, b.beta))
      throw ConfigError(key.str() + ": kappa != beta*(1-albedo)");
    if (j + 1 < bands.size() &&
        std::abs(bands[j + 1].lambda_lo - b.lambda_hi) > 1e-12 * b.lambda_hi)
      throw ConfigError(key.str() + ": bands must be contiguous");
  }
}

OrdinateSet build_quadrature(int n) {
  if (n < 1 || n > 64)
    throw ConfigError("radiation.n_ordinates must be in [1, 64]");
  std::vector<double> x, w;
  detail::gauss_legendre(n, x, w);
  OrdinateSet set;
  set.mu.resize(n);
  set.weight.resize(n);
  for (int i = 0; i < n; ++i) {
    set.mu[i] = 0.5 * (x[i] + 1.0);
    set.weight[i] = 0.5 * w[i];
  }
  return set;
}

double planck_intensity(double lambda, double temperature) {
  if (!(lambda > 0.0))
    throw std::domain_error("planck_intensity: wavelength must be positive");
  if (!(temperature > 0.0))
    throw std::domain_error("planck_intensity: temperature must be positive");
  const double l2 = lambda * lambda;
  const double l5 = l2 * l2 * lambda;
  return kPlanckC1 / (l5 * std::expm1(kPlanckC2 / (lambda * temperature)));
}

double band_emission(const SpectralBand& band, double temperature,
                     int n_panels) {
  if (!(temperature > 0.0))
    throw std::domain_error("band_emission: temperature must be positive");
  const BandTable table = make_band_table(band, n_panels);
  if (table.a.empty()) return 0.0;
  return table_emission(table, temperature);
}

double band_set_intensity(std::span<const SpectralBand> bands,
                          double temperature, int n_panels) {
  double total = 0.0;
  for (const auto& band : bands) total += band_emission(band, temperature, n_panels);
  return total;
}

IntensityField sweep_intensity_serial(const Grid1D& grid,
                                      std::span<const SpectralBand> bands,
                                      const OrdinateSet& ordinates,
                                      std::span<const double> temperature,
                                      const RadiativeBoundary& bc,
                                      const SweepControls& controls) {
  check_sweep_args(grid, bands, ordinates, temperature);
  const int nb = static_cast<int>(bands.size());
  const int n_ord = ordinates.size();
  const int nn = grid.n_nodes();
  const SweepWork work = prepare_sweep(bands, temperature, bc, controls, false);

  IntensityField field;
  field.n_bands = nb;
  field.n_ordinates = n_ord;
  field.n_nodes = nn;
  field.data.assign(static_cast<std::size_t>(nb) * 2 * n_ord * nn, 0.0);

  std::vector<double> g(static_cast<std::size_t>(nb) * nn, 0.0);
  std::vector<double> g_new(g.size(), 0.0);
  std::vector<double> source(static_cast<std::size_t>(nb) * nn, 0.0);

  for (int iter = 1;; ++iter) {
    for (int b = 0; b < nb; ++b)
      build_source(bands[b], &work.emission[static_cast<std::size_t>(b) * nn],
                   &g[static_cast<std::size_t>(b) * nn], nn,
                   &source[static_cast<std::size_t>(b) * nn]);

    for (int b = 0; b < nb; ++b) {
      for (int sk = 0; sk < 2 * n_ord; ++sk) {
        const bool forward = sk < n_ord;
        const int k = forward ? sk : sk - n_ord;
        march_ray(ordinates.mu[k], bands[b].beta, grid.dx(), nn,
                  &source[static_cast<std::size_t>(b) * nn],
                  forward ? work.i_hot[b] : work.i_cold[b], forward,
                  &field.data[(static_cast<std::size_t>(b) * 2 * n_ord + sk) * nn]);
      }
    }

    if (!work.has_scattering) break;

    for (int b = 0; b < nb; ++b)
      angular_integral(field, ordinates, b, &g_new[static_cast<std::size_t>(b) * nn]);
    const double rel = scatter_change(g_new, g, nb, nn);
    g.swap(g_new);
    if (rel < controls.scatter_tol) break;
    if (iter >= controls.max_scatter_iters)
      throw ConvergenceError("sweep_intensity: scattering source iteration did not converge",
                             rel);
  }
  return field;
}

IntensityField sweep_intensity(const Grid1D& grid,
                               std::span<const SpectralBand> bands,
                               const OrdinateSet& ordinates,
                               std::span<const double> temperature,
                               const RadiativeBoundary& bc,
                               const SweepControls& controls) {
  check_sweep_args(grid, bands, ordinates, temperature);
  const int nb = static_cast<int>(bands.size());
  const int n_ord = ordinates.size();
  const int nn = grid.n_nodes();
  const SweepWork work = prepare_sweep(bands, temperature, bc, controls, true);

  IntensityField field;
  field.n_bands = nb;
  field.n_ordinates = n_ord;
  field.n_nodes = nn;
  field.data.assign(static_cast<std::size_t>(nb) * 2 * n_ord * nn, 0.0);

  std::vector<double> g(static_cast<std::size_t>(nb) * nn, 0.0);
  std::vector<double> g_new(g.size(), 0.0);
  std::vector<double> source(static_cast<std::size_t>(nb) * nn, 0.0);

  for (int iter = 1;; ++iter) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int b = 0; b < nb; ++b)
      build_source(bands[b], &work.emission[static_cast<std::size_t>(b) * nn],
                   &g[static_cast<std::size_t>(b) * nn], nn,
                   &source[static_cast<std::size_t>(b) * nn]);

    // Each (band, signed ordinate) ray is independent given the lagged
    // scattering source, so the collapsed loop runs in any thread order with
    // bitwise-reproducible results.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int ray = 0; ray < nb * 2 * n_ord; ++ray) {
      const int b = ray / (2 * n_ord);
      const int sk = ray % (2 * n_ord);
      const bool forward = sk < n_ord;
      const int k = forward ? sk : sk - n_ord;
      march_ray(ordinates.mu[k], bands[b].beta, grid.dx(), nn,
                &source[static_cast<std::size_t>(b) * nn],
                forward ? work.i_hot[b] : work.i_cold[b], forward,
                &field.data[(static_cast<std::size_t>(b) * 2 * n_ord + sk) * nn]);
    }

    if (!work.has_scattering) break;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int b = 0; b < nb; ++b)
      angular_integral(field, ordinates, b, &g_new[static_cast<std::size_t>(b) * nn]);
    const double rel = scatter_change(g_new, g, nb, nn);
    g.swap(g_new);
    if (rel < controls.scatter_tol) break;
    if (iter >= controls.max_scatter_iters)
      throw ConvergenceError("sweep_intensity: scattering source iteration did not converge",
                             rel);
  }
  return field;
}

std::vector<double> radiative_flux(const IntensityField& field,
                                   const OrdinateSet& ordinates,
                                   std::span<const SpectralBand> bands) {
  if (field.n_bands != static_cast<int>(bands.size()) ||
      field.n_ordinates != ordinates.size())
    throw std::invalid_argument("radiative_flux: field/ordinates/bands shape mismatch");
  const int nn = field.n_nodes;
  const int n_ord = ordinates.size();
  std::vector<double> q(nn, 0.0);
  for (int i = 0; i < nn; ++i) {
    double total = 0.0;
    for (int b = 0; b < field.n_bands; ++b) {
      double moment = 0.0;
      for (int k = 0; k < n_ord; ++k)
        moment += ordinates.weight[k] * ordinates.mu[k] *
                  (field.at(b, k, i) - field.at(b, n_ord + k, i));
      total += bands[b].width() * moment;
    }
    q[i] = 2.0 * M_PI * total;
  }
  return q;
}

std::vector<double> radiative_source(std::span<const double> q_r,
                                     const Grid1D& grid) {
  const int n = static_cast<int>(q_r.size());
  if (n != grid.n_nodes() || n < 3)
    throw std::invalid_argument("radiative_source: need q_r on >= 3 grid nodes");
  const double inv2dx = 1.0 / (2.0 * grid.dx());
  std::vector<double> s(n, 0.0);
  s[0] = -(-3.0 * q_r[0] + 4.0 * q_r[1] - q_r[2]) * inv2dx;
  for (int i = 1; i + 1 < n; ++i) s[i] = -(q_r[i + 1] - q_r[i - 1]) * inv2dx;
  s[n - 1] = -(3.0 * q_r[n - 1] - 4.0 * q_r[n - 2] + q_r[n - 3]) * inv2dx;
  return s;
}

}  // namespace thermoflux
