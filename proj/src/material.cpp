#include "thermoflux/material.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "thermoflux/errors.hpp"

namespace thermoflux {

namespace {

double coeff_sum(const std::vector<double>& c) {
  double s = 0.0;
  for (double v : c) s += v;
  return s;
}

}  // namespace

MaterialModel::MaterialModel(double k_ref, std::vector<double> k_coeffs,
                             double rho_cp_ref,
                             std::vector<double> rho_cp_coeffs, double t_min,
                             double t_max)
    : k_ref_(k_ref),
      rho_cp_ref_(rho_cp_ref),
      k_coeffs_(std::move(k_coeffs)),
      rho_cp_coeffs_(std::move(rho_cp_coeffs)),
      t_min_(t_min),
      t_max_(t_max) {
  if (!(k_ref_ > 0.0)) throw ConfigError("material.k_ref must be > 0");
  if (!(rho_cp_ref_ > 0.0)) throw ConfigError("material.rho_cp_ref must be > 0");
  if (k_coeffs_.empty()) throw ConfigError("material.k_coeffs must be non-empty");
  if (rho_cp_coeffs_.empty())
    throw ConfigError("material.rho_cp_coeffs must be non-empty");
  if (!(t_min_ < t_max_))
    throw ConfigError("material temperature range must satisfy t_min < t_max");
  for (double c : k_coeffs_)
    if (!std::isfinite(c)) throw ConfigError("material.k_coeffs must be finite");
  for (double c : rho_cp_coeffs_)
    if (!std::isfinite(c))
      throw ConfigError("material.rho_cp_coeffs must be finite");
  if (std::abs(coeff_sum(k_coeffs_) - 1.0) > 1e-12)
    throw ConfigError("material.k_coeffs must sum to 1 (reference-value normalization)");
  if (std::abs(coeff_sum(rho_cp_coeffs_) - 1.0) > 1e-12)
    throw ConfigError("material.rho_cp_coeffs must sum to 1");

  // Positivity over the declared range, sampled densely. The property laws
  // are low-order polynomials, so sampling catches any sign change.
  const int kSamples = 1000;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = t_min_ + (t_max_ - t_min_) * (static_cast<double>(i) / kSamples);
    if (!(k_ref_ * k_poly(t) > 0.0)) {
      std::ostringstream msg;
      msg << "conductivity non-positive at T=" << t << " K";
      throw ConfigError(msg.str());
    }
    if (!(rho_cp_ref_ * cp_poly(t) > 0.0)) {
      std::ostringstream msg;
      msg << "volumetric heat capacity non-positive at T=" << t << " K";
      throw ConfigError(msg.str());
    }
  }
}

MaterialModel MaterialModel::pmma_default() {
  return MaterialModel(0.19, {1.0}, 1.7e6, {1.0});
}

void MaterialModel::check_range(double temperature, const char* what) const {
  if (!(temperature >= t_min_ && temperature <= t_max_)) {
    std::ostringstream msg;
    msg << what << ": temperature " << temperature << " K outside valid range ["
        << t_min_ << ", " << t_max_ << "] K";
    throw std::domain_error(msg.str());
  }
}

double MaterialModel::k_poly(double temperature) const {
  const double r = temperature / kReferenceTemperature;
  double acc = 0.0;
  for (auto it = k_coeffs_.rbegin(); it != k_coeffs_.rend(); ++it)
    acc = acc * r + *it;
  return acc;
}

double MaterialModel::cp_poly(double temperature) const {
  const double r = temperature / kReferenceTemperature;
  double acc = 0.0;
  for (auto it = rho_cp_coeffs_.rbegin(); it != rho_cp_coeffs_.rend(); ++it)
    acc = acc * r + *it;
  return acc;
}

double MaterialModel::conductivity(double temperature) const {
  check_range(temperature, "conductivity");
  return k_ref_ * k_poly(temperature);
}

double MaterialModel::volumetric_heat_capacity(double temperature) const {
  check_range(temperature, "volumetric_heat_capacity");
  return rho_cp_ref_ * cp_poly(temperature);
}

double MaterialModel::kirchhoff_theta(double temperature) const {
  check_range(temperature, "kirchhoff_theta");
  // integral of sum a_i (T'/Tref)^i from Tref to T, divided by nothing:
  // theta = sum a_i * Tref/(i+1) * ((T/Tref)^(i+1) - 1)
  const double r = temperature / kReferenceTemperature;
  double theta = 0.0;
  double r_pow = r;  // r^(i+1)
  for (std::size_t i = 0; i < k_coeffs_.size(); ++i) {
    theta += k_coeffs_[i] * (kReferenceTemperature / (i + 1.0)) * (r_pow - 1.0);
    r_pow *= r;
  }
  return theta;
}

double MaterialModel::dtheta_dt(double temperature) const {
  check_range(temperature, "dtheta_dt");
  return k_poly(temperature);
}

double MaterialModel::kirchhoff_inverse(double theta) const {
  return kirchhoff_inverse(theta, kReferenceTemperature + theta);
}

double MaterialModel::kirchhoff_inverse(double theta, double guess) const {
  const double theta_lo = kirchhoff_theta(t_min_);
  const double theta_hi = kirchhoff_theta(t_max_);
  const double slack = 1e-9 * std::max({1.0, std::abs(theta_lo), std::abs(theta_hi)});
  if (theta < theta_lo - slack || theta > theta_hi + slack) {
    std::ostringstream msg;
    msg << "kirchhoff_inverse: theta " << theta << " outside image ["
        << theta_lo << ", " << theta_hi << "]";
    throw std::out_of_range(msg.str());
  }

  double lo = t_min_, hi = t_max_;
  double t = std::min(std::max(guess, lo), hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = kirchhoff_theta(t) - theta;
    if (f == 0.0) return t;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    const double slope = k_poly(t);  // dtheta/dt, strictly positive in range
    double t_next = t - f / slope;
    if (!(t_next > lo && t_next < hi)) t_next = 0.5 * (lo + hi);  // bisect
    if (std::abs(t_next - t) < 1e-13 * std::max(1.0, std::abs(t))) return t_next;
    t = t_next;
  }
  return t;
}

}  // namespace thermoflux
