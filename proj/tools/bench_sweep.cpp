// Times the OpenMP radiation sweep against the serial reference on a larger
// problem and checks that the two agree bitwise.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "thermoflux/radiation.hpp"

using namespace thermoflux;
using clock_type = std::chrono::steady_clock;

namespace {

double run_ms(const char* label, int reps, const auto& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    fn();
    const auto t1 = clock_type::now();
    const double ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
            .count();
    if (ms < best) best = ms;
  }
  std::printf("%-28s %10.2f ms (best of %d)\n", label, best, reps);
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int n_nodes = argc > 1 ? std::atoi(argv[1]) : 2001;
  const int n_ord = argc > 2 ? std::atoi(argv[2]) : 16;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 3;

  Grid1D grid(0.1, n_nodes);
  std::vector<SpectralBand> bands = {
      make_band(0.5e-6, 2e-6, 5.0, 0.5),   make_band(2e-6, 5e-6, 20.0, 0.5),
      make_band(5e-6, 8e-6, 40.0, 0.4),    make_band(8e-6, 12e-6, 60.0, 0.3),
      make_band(12e-6, 20e-6, 80.0, 0.2),  make_band(20e-6, 30e-6, 60.0, 0.1),
      make_band(30e-6, 40e-6, 40.0, 0.05), make_band(40e-6, 50e-6, 20.0, 0.0)};
  auto ords = build_quadrature(n_ord);
  std::vector<double> temperature(n_nodes);
  for (int i = 0; i < n_nodes; ++i)
    temperature[i] = 350.0 - 50.0 * grid.x(i) / grid.length();
  RadiativeBoundary bc{350.0, 300.0};
  SweepControls ctrl;
  ctrl.scatter_tol = 1e-10;

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("compiled without OpenMP\n");
#endif
  std::printf("problem: %zu bands x %d ordinates/hemisphere x %d nodes\n\n",
              bands.size(), n_ord, n_nodes);

  IntensityField serial_field, parallel_field;
  const double t_serial = run_ms("sweep_intensity_serial", reps, [&] {
    serial_field = sweep_intensity_serial(grid, bands, ords, temperature, bc, ctrl);
  });
  const double t_parallel = run_ms("sweep_intensity (OpenMP)", reps, [&] {
    parallel_field = sweep_intensity(grid, bands, ords, temperature, bc, ctrl);
  });

  const bool identical =
      serial_field.data.size() == parallel_field.data.size() &&
      std::memcmp(serial_field.data.data(), parallel_field.data.data(),
                  serial_field.data.size() * sizeof(double)) == 0;
  std::printf("\nspeedup: %.2fx, bitwise identical: %s\n", t_serial / t_parallel,
              identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
