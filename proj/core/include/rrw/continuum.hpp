#pragma once

#include <limits>
#include <span>
#include <vector>

#include "rrw/specfun.hpp"

namespace rrw::continuum {

/// A truncated series value together with an upper bound on the omitted tail.
struct SeriesValue {
  double value = 0.0;
  double truncation_bound = 0.0;
};

/// Result of checking one eigenmode against its differential equation.
struct OdeCheck {
  double max_residual = 0.0;  ///< max |Q'' + lambda^2/(4 x^a) Q| over the grid
  double origin_value = 0.0;  ///< Q at x = 1e-12
  double end_slope = 0.0;     ///< central-difference dQ/dx at x = 1
};

/// Fourier-Bessel solution of the continuum diffusion equation
///   dP/dt = (1/2L) d^2/dx^2 [x^a P]
/// on x in (0, 1], absorbing at 0 and reflecting at 1, started from a unit
/// mass at x = 1/L. With nu = 1/(2-a) and z_n the zeros of J_{nu-1},
///   P(x,t) = sum_n A_n J_nu(z_n x^{1-a/2}) / x^{a-1/2} exp(-(2-a)^2 z_n^2 t / 8L).
///
/// Time is measured in units of L steps (t = s/L). Construction computes the
/// zero table and coefficients once; every evaluation is const.
class ContinuumModel {
 public:
  static constexpr double kNoTolerance = std::numeric_limits<double>::infinity();

  /// Requires 0 <= a < 2, L >= 2 and terms >= 1.
  ContinuumModel(double a, long size, int terms);

  double exponent() const noexcept { return a_; }
  long size() const noexcept { return size_; }
  int terms() const noexcept { return terms_; }
  double order() const noexcept { return nu_; }

  /// Zeros j_{nu-1,n}, n = 1..terms.
  std::span<const double> zeros() const noexcept { return {zeros_.data(), zeros_.size() - 1}; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  /// Decay rate of mode n (1-based) per unit t.
  double decay_rate(int n) const;

  SeriesValue evaluate_density(double x, double t) const;
  /// P(x,t) for x in (0,1] and t > 0. Throws if the truncation bound exceeds
  /// `tolerance`.
  double density(double x, double t, double tolerance = kNoTolerance) const;

  /// First-return density in t, i.e. the probability flux into the absorbing
  /// site g(1)/2 * P(1/L, t) * (1/L) divided by dt = 1/L:
  ///   (1/(2 sqrt(L))) sum_n A_n J_nu(z_n L^{-(1-a/2)}) exp(-rate_n t).
  SeriesValue evaluate_return_density(double t) const;
  double return_density(double t, double tolerance = kNoTolerance) const;

  /// Per-step return probability at step s, return_density(s/L) / L.
  double return_probability(long s, double tolerance = kNoTolerance) const;

  /// return_probability for s = 1..s_max (index 0 unused), evaluated by
  /// advancing each mode's exponential incrementally and retiring modes
  /// once they are negligible.
  std::vector<double> return_series(long s_max) const;

  /// Exact current into x = 0, -(1/2L) d/dx [x^a P] at x -> 0.
  double boundary_current(double t) const;

  /// Probability remaining in (0, 1] at time t, by adaptive quadrature of
  /// the density.
  double mass(double t) const;

  /// Integral of boundary_current over [t0, t1] by adaptive quadrature.
  double absorbed_between(double t0, double t1) const;

  /// Checks mode n against Q'' + lambda_n^2/(4 x^a) Q = 0, Q = sqrt(x) J_nu(z_n x^{1-a/2}),
  /// using central differences with step h at each grid point.
  OdeCheck ode_residual(int n, std::span<const double> x_samples, double h) const;

 private:
  double tail_bound(double w1, double w2, double t) const;

  double a_;
  long size_;
  int terms_;
  double nu_;
  double k_;  // 1 - a/2
  std::vector<double> zeros_;         // terms + 1 zeros; the last one feeds the tail bound
  std::vector<double> coeffs_;        // A_n
  std::vector<double> return_terms_;  // A_n J_nu(z_n L^{-k})
  std::vector<double> current_terms_; // A_n (z_n/2)^nu / Gamma(nu+1)
};

/// A_n = 2(1-a/2) / (J_nu(z_n)^2 sqrt(L)) * J_nu(z_n / L^{1-a/2}), n = 1..terms.
std::vector<double> coefficients(double a, long size, int terms);

/// Large-n form of A_n:
///   sqrt(2 pi z_n) (1-a/2) L^{-a/4} cos(z_n / L^{1-a/2} - pi/(2(2-a)) - pi/4).
double asymptotic_coefficient(double a, long size, int n);

/// Closed forms of the a = 1 case (nu = 1, zeros of J_0).
namespace linear {

/// A_n = J_1(j_{0,n} / sqrt(L)) / (J_1(j_{0,n})^2 sqrt(L)).
std::vector<double> coefficients(long size, int terms);

/// sum_n A_n J_1(j_{0,n} sqrt(x)) / sqrt(x) exp(-j_{0,n}^2 t / 8L).
double density(long size, std::span<const double> coeffs, const specfun::ZeroTable& zeros,
               double x, double t);

}  // namespace linear
}  // namespace rrw::continuum
