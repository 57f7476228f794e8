#pragma once

#include <vector>

namespace thermoflux {

/// Temperature-dependent thermophysical properties of the slab material.
///
/// Thermal conductivity and volumetric heat capacity are polynomials in
/// T/298.15 whose coefficients sum to 1, so the reference values are
/// recovered exactly at 298.15 K.  The Kirchhoff variable
///   theta(T) = (1/k_ref) * integral_{298.15}^{T} K(T') dT'
/// turns the nonlinear conduction operator into a linear one; because K is
/// polynomial the integral has a closed form.
///
/// Immutable after construction; every method is a pure function and safe to
/// call from any thread.
class MaterialModel {
 public:
  static constexpr double kReferenceTemperature = 298.15;  // K

  /// Constant-property model: K == k_ref, rho*cp == rho_cp_ref.
  MaterialModel() : MaterialModel(1.0, {1.0}, 1.0e6, {1.0}) {}

  /// Throws ConfigError unless: coefficients sum to 1 within 1e-12,
  /// k_ref > 0, rho_cp_ref > 0, and K(T) > 0 over [t_min, t_max].
  MaterialModel(double k_ref, std::vector<double> k_coeffs, double rho_cp_ref,
                std::vector<double> rho_cp_coeffs, double t_min = 250.0,
                double t_max = 450.0);

  /// Representative literature values for PMMA (not fitted to any dataset).
  static MaterialModel pmma_default();

  double conductivity(double temperature) const;              // W/(m K)
  double volumetric_heat_capacity(double temperature) const;  // J/(m^3 K)

  /// theta(T); strictly increasing, theta(298.15) == 0.
  double kirchhoff_theta(double temperature) const;

  /// d theta / dT == K(T)/k_ref.
  double dtheta_dt(double temperature) const;

  /// Inverse of kirchhoff_theta to within 1e-10 K (safeguarded Newton with
  /// bisection fallback). Throws std::out_of_range when theta lies outside
  /// the image of [t_min, t_max].
  double kirchhoff_inverse(double theta) const;
  double kirchhoff_inverse(double theta, double guess) const;

  double k_ref() const { return k_ref_; }
  double rho_cp_ref() const { return rho_cp_ref_; }
  const std::vector<double>& k_coeffs() const { return k_coeffs_; }
  const std::vector<double>& rho_cp_coeffs() const { return rho_cp_coeffs_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }

 private:
  void check_range(double temperature, const char* what) const;
  double k_poly(double temperature) const;   // sum a_i (T/298.15)^i
  double cp_poly(double temperature) const;  // sum b_i (T/298.15)^i

  double k_ref_;
  double rho_cp_ref_;
  std::vector<double> k_coeffs_;
  std::vector<double> rho_cp_coeffs_;
  double t_min_;
  double t_max_;
};

}  // namespace thermoflux
