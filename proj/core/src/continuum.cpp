#include "rrw/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rrw/error.hpp"

namespace rrw::continuum {
namespace {

constexpr const char* kModule = "continuum";
constexpr double kPi = std::numbers::pi;

// Modes with rate * t beyond this contribute below 1e-20 of their amplitude.
constexpr double kNegligibleExponent = 46.0;

// Lower bound on the spacing of consecutive zeros of J_mu for -1/2 <= mu.
constexpr double kZeroGap = 3.0;

// |J_nu(y)|^2 <= 1.5 min(1, 2/(pi y)) for the orders used here.
double envelope(double y) { return std::sqrt(1.5 * std::min(1.0, 2.0 / (kPi * y))); }

void check_model_args(double a, long size, int terms) {
  detail::require(std::isfinite(a) && a >= 0.0 && a < 2.0, kModule,
                  "exponent a must satisfy 0 <= a < 2, got " + std::to_string(a));
  detail::require(size >= 2, kModule, "system size L must be >= 2");
  detail::require(terms >= 1, kModule, "need at least one series term");
}

std::vector<double> coefficients_from(double a, long size, std::span<const double> zeros) {
  const double nu = 1.0 / (2.0 - a);
  const double k = 1.0 - 0.5 * a;
  const double stretch = std::pow(static_cast<double>(size), k);
  const double root = std::sqrt(static_cast<double>(size));
  std::vector<double> out;
  out.reserve(zeros.size());
  for (double z : zeros) {
    const double jz = specfun::bessel_j(nu, z);
    out.push_back(2.0 * k / (jz * jz * root) * specfun::bessel_j(nu, z / stretch));
  }
  return out;
}

double check_tolerance(const SeriesValue& v, double tolerance, const char* what) {
  detail::require(v.truncation_bound <= tolerance, kModule,
                  std::string(what) + " truncation bound " + std::to_string(v.truncation_bound) +
                      " exceeds tolerance " + std::to_string(tolerance) + "; use more terms");
  return v.value;
}

}  // namespace

ContinuumModel::ContinuumModel(double a, long size, int terms)
    : a_(a), size_(size), terms_(terms), nu_(0.0), k_(0.0) {
  check_model_args(a, size, terms);
  nu_ = 1.0 / (2.0 - a);
  k_ = 1.0 - 0.5 * a;
  const specfun::ZeroTable table = specfun::bessel_zeros(nu_ - 1.0, terms + 1);
  zeros_.assign(table.values().begin(), table.values().end());
  coeffs_ = coefficients_from(a, size, zeros());

  const double stretch = std::pow(static_cast<double>(size), k_);
  const double gamma = std::tgamma(nu_ + 1.0);
  return_terms_.resize(coeffs_.size());
  current_terms_.resize(coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    return_terms_[i] = coeffs_[i] * specfun::bessel_j(nu_, zeros_[i] / stretch);
    current_terms_[i] = coeffs_[i] * std::pow(0.5 * zeros_[i], nu_) / gamma;
  }
}

double ContinuumModel::decay_rate(int n) const {
  detail::require(n >= 1 && n <= terms_ + 1, kModule, "mode index out of range");
  const double z = zeros_[static_cast<std::size_t>(n - 1)];
  return (2.0 - a_) * (2.0 - a_) * z * z / (8.0 * static_cast<double>(size_));
}

// Bound on sum_{n > N} 2k/(J_nu(z_n)^2 sqrt(L)) |J_nu(z_n w1) J_nu(z_n w2)| e^{-rate_n t}.
// With 1/J_nu(z_n)^2 <= pi z_n (a factor 2 of slack) and the J_nu envelope,
// each omitted term is at most C z e^{-kappa t z^2}, which decreases past
// 1/sqrt(2 kappa t) and shrinks geometrically across zero gaps.
double ContinuumModel::tail_bound(double w1, double w2, double t) const {
  const double z0 = zeros_.back();
  const double kappa = (2.0 - a_) * (2.0 - a_) / (8.0 * static_cast<double>(size_));
  const double gap = terms_ >= 10 ? kZeroGap : 2.0;
  if (t <= 0.0 || 2.0 * kappa * t * z0 * z0 < 1.0) return std::numeric_limits<double>::infinity();
  const double ratio = (z0 + gap) / z0 * std::exp(-kappa * t * (2.0 * z0 * gap + gap * gap));
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  const double amplitude = 2.0 * k_ * kPi * z0 / std::sqrt(static_cast<double>(size_)) *
                           envelope(z0 * w1) * envelope(z0 * w2);
  return 2.0 * amplitude * std::exp(-kappa * t * z0 * z0) / (1.0 - ratio);
}

SeriesValue ContinuumModel::evaluate_density(double x, double t) const {
  detail::require(x > 0.0 && x <= 1.0, kModule, "density requires x in (0, 1]");
  detail::require(t > 0.0, kModule, "density requires t > 0 (the series is singular at t = 0)");
  const double y = std::pow(x, k_);
  const bool near_origin = x < 1e-6;
  const double prefactor = near_origin ? std::pow(x, 1.0 - a_) : std::pow(x, 0.5 - a_);
  double sum = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const double rate = decay_rate(static_cast<int>(i) + 1);
    if (rate * t > kNegligibleExponent && i > 0) break;
    const double z = zeros_[i];
    const double mode = near_origin ? specfun::bessel_j_scaled(nu_, z * y) * std::pow(z, nu_)
                                    : specfun::bessel_j(nu_, z * y);
    sum += coeffs_[i] * mode * std::exp(-rate * t);
  }
  const double w1 = std::pow(static_cast<double>(size_), -k_);
  return {prefactor * sum, prefactor * tail_bound(w1, y, t)};
}

double ContinuumModel::density(double x, double t, double tolerance) const {
  return check_tolerance(evaluate_density(x, t), tolerance, "density");
}

SeriesValue ContinuumModel::evaluate_return_density(double t) const {
  detail::require(t > 0.0, kModule, "return density requires t > 0");
  double sum = 0.0;
  for (std::size_t i = 0; i < return_terms_.size(); ++i) {
    const double rate = decay_rate(static_cast<int>(i) + 1);
    if (rate * t > kNegligibleExponent && i > 0) break;
    sum += return_terms_[i] * std::exp(-rate * t);
  }
  const double prefactor = 0.5 / std::sqrt(static_cast<double>(size_));
  const double w = std::pow(static_cast<double>(size_), -k_);
  return {prefactor * sum, prefactor * tail_bound(w, w, t)};
}

double ContinuumModel::return_density(double t, double tolerance) const {
  return check_tolerance(evaluate_return_density(t), tolerance, "return density");
}

double ContinuumModel::return_probability(long s, double tolerance) const {
  detail::require(s >= 1, kModule, "step index must be >= 1");
  const double dt = 1.0 / static_cast<double>(size_);
  return return_density(static_cast<double>(s) * dt, tolerance * size_) * dt;
}

std::vector<double> ContinuumModel::return_series(long s_max) const {
  detail::require(s_max >= 1, kModule, "horizon must be >= 1");
  constexpr long kRefresh = 4096;
  const double dt = 1.0 / static_cast<double>(size_);
  const double prefactor = 0.5 / std::sqrt(static_cast<double>(size_)) * dt;

  const std::size_t modes = return_terms_.size();
  std::vector<double> rate(modes);
  std::vector<double> step(modes);
  std::vector<double> decay(modes);
  double largest = 0.0;
  for (std::size_t i = 0; i < modes; ++i) {
    rate[i] = decay_rate(static_cast<int>(i) + 1);
    step[i] = std::exp(-rate[i] * dt);
    decay[i] = step[i];
    largest = std::max(largest, std::abs(return_terms_[i]));
  }

  std::vector<double> out(static_cast<std::size_t>(s_max) + 1, 0.0);
  std::size_t active = modes;
  for (long s = 1; s <= s_max; ++s) {
    if (s % kRefresh == 0) {
      const double t = static_cast<double>(s) * dt;
      for (std::size_t i = 0; i < active; ++i) decay[i] = std::exp(-rate[i] * t);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < active; ++i) {
      sum += return_terms_[i] * decay[i];
      decay[i] *= step[i];
    }
    out[static_cast<std::size_t>(s)] = prefactor * sum;
    // decay[] now holds step s+1; modes are ordered by rate, so everything
    // from `active-1` upward is bounded by decay[active-1].
    while (active > 1 &&
           largest * static_cast<double>(active) * decay[active - 1] < 1e-17 * std::abs(sum)) {
      --active;
    }
  }
  return out;
}

double ContinuumModel::boundary_current(double t) const {
  detail::require(t > 0.0, kModule, "boundary current requires t > 0");
  double sum = 0.0;
  for (std::size_t i = 0; i < current_terms_.size(); ++i) {
    const double rate = decay_rate(static_cast<int>(i) + 1);
    if (rate * t > kNegligibleExponent && i > 0) break;
    sum += current_terms_[i] * std::exp(-rate * t);
  }
  return sum / (2.0 * static_cast<double>(size_));
}

double ContinuumModel::mass(double t) const {
  detail::require(t > 0.0, kModule, "mass requires t > 0");
  // With u = x^{1-a/2} the integrand is (1/k) sum_n A_n J_nu(z_n u) u^{1-nu} e^{-rate t},
  // which is smooth and vanishes linearly at u = 0.
  std::size_t active = 1;
  while (active < coeffs_.size() &&
         decay_rate(static_cast<int>(active) + 1) * t <= kNegligibleExponent) {
    ++active;
  }
  std::vector<double> weight(active);
  for (std::size_t i = 0; i < active; ++i) {
    weight[i] = coeffs_[i] * std::exp(-decay_rate(static_cast<int>(i) + 1) * t) / k_;
  }
  auto integrand = [&](double u) {
    if (u == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < active; ++i) {
      sum += weight[i] * specfun::bessel_j_scaled(nu_, zeros_[i] * u) * std::pow(zeros_[i], nu_);
    }
    return sum * u;  // J_nu(zu) u^{1-nu} = [J_nu(zu)/(zu)^nu] z^nu u
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, 1.0, 15, 1e-13, &error);
  detail::require(error < 1e-9, kModule, "mass quadrature did not converge");
  return value;
}

double ContinuumModel::absorbed_between(double t0, double t1) const {
  detail::require(t0 > 0.0 && t1 >= t0, kModule, "need 0 < t0 <= t1");
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [this](double t) { return boundary_current(t); }, t0, t1, 20, 1e-13, &error);
  detail::require(error < 1e-9, kModule, "current quadrature did not converge");
  return value;
}

OdeCheck ContinuumModel::ode_residual(int n, std::span<const double> x_samples, double h) const {
  detail::require(n >= 1 && n <= terms_, kModule, "mode index out of range");
  detail::require(h > 0.0, kModule, "finite-difference step must be positive");
  const double z = zeros_[static_cast<std::size_t>(n - 1)];
  const double lambda = (2.0 - a_) * z;
  auto q = [&](double x) { return std::sqrt(x) * specfun::bessel_j(nu_, z * std::pow(x, k_)); };

  OdeCheck check;
  for (double x : x_samples) {
    detail::require(x - h > 0.0, kModule, "grid point too close to 0 for step h");
    const double second = (q(x + h) - 2.0 * q(x) + q(x - h)) / (h * h);
    const double residual = second + lambda * lambda / (4.0 * std::pow(x, a_)) * q(x);
    check.max_residual = std::max(check.max_residual, std::abs(residual));
  }
  check.origin_value = q(1e-12);
  check.end_slope = (q(1.0 + h) - q(1.0 - h)) / (2.0 * h);
  return check;
}

std::vector<double> coefficients(double a, long size, int terms) {
  check_model_args(a, size, terms);
  const specfun::ZeroTable zeros = specfun::bessel_zeros(1.0 / (2.0 - a) - 1.0, terms);
  return coefficients_from(a, size, zeros.values());
}

double asymptotic_coefficient(double a, long size, int n) {
  check_model_args(a, size, n);
  const double z = specfun::bessel_zeros(1.0 / (2.0 - a) - 1.0, n)(static_cast<std::size_t>(n));
  const double k = 1.0 - 0.5 * a;
  const double phase = z / std::pow(static_cast<double>(size), k) - kPi / (2.0 * (2.0 - a)) - 0.25 * kPi;
  return std::sqrt(2.0 * kPi * z) * k * std::pow(static_cast<double>(size), -0.25 * a) *
         std::cos(phase);
}

namespace linear {

std::vector<double> coefficients(long size, int terms) {
  check_model_args(1.0, size, terms);
  const specfun::ZeroTable zeros = specfun::bessel_zeros(0.0, terms);
  const double root = std::sqrt(static_cast<double>(size));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(terms));
  for (double z : zeros.values()) {
    const double j1 = specfun::bessel_j(1.0, z);
    out.push_back(specfun::bessel_j(1.0, z / root) / (j1 * j1 * root));
  }
  return out;
}

double density(long size, std::span<const double> coeffs, const specfun::ZeroTable& zeros,
               double x, double t) {
  detail::require(x > 0.0 && x <= 1.0 && t > 0.0, kModule, "need x in (0, 1] and t > 0");
  detail::require(zeros.size() >= coeffs.size(), kModule, "zero table shorter than coefficients");
  const double root = std::sqrt(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double z = zeros(i + 1);
    sum += coeffs[i] * specfun::bessel_j(1.0, z * root) / root *
           std::exp(-z * z * t / (8.0 * static_cast<double>(size)));
  }
  return sum;
}

}  // namespace linear
}  // namespace rrw::continuum
