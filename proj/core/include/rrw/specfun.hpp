#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rrw::specfun {

/// Bessel function of the first kind J_nu(x) for real order nu > -1 and x >= 0.
///
/// Small arguments use the ascending series, intermediate arguments use
/// Miller's backward recurrence normalised by the Neumann sum
/// (x/2)^nu = sum_k (nu+2k) Gamma(nu+k)/k! J_{nu+2k}(x), and large arguments
/// use the Hankel expansion truncated at its smallest term.
///
/// Throws ContractError for x < 0, non-finite input, nu <= -1, or x == 0
/// with nu < 0 (where J_nu diverges).
double bessel_j(double nu, double x);

/// J_nu(x) / x^nu, which stays finite as x -> 0 (limit 2^-nu / Gamma(nu+1)).
double bessel_j_scaled(double nu, double x);

/// d/dx J_nu(x) = (nu/x) J_nu(x) - J_{nu+1}(x).
double bessel_j_derivative(double nu, double x);

/// McMahon's large-n expansion for the n-th positive zero of J_nu.
double mcmahon_zero(double nu, int n);

/// The first positive zeros of J_nu, immutable once built.
class ZeroTable {
 public:
  ZeroTable(double nu, std::vector<double> zeros);

  double nu() const noexcept { return nu_; }
  std::size_t size() const noexcept { return zeros_.size(); }
  /// n-th zero, 1-based as in j_{nu,n}.
  double operator()(std::size_t n) const { return zeros_.at(n - 1); }
  std::span<const double> values() const noexcept { return zeros_; }

 private:
  double nu_;
  std::vector<double> zeros_;
};

/// First `count` positive zeros of J_nu for nu >= -1/2.
///
/// Each zero is bracketed by a sign change (scanning from the previous zero,
/// since consecutive zeros are more than 2.4 apart on this order range) and
/// refined by Newton steps started from the McMahon estimate, falling back to
/// bisection whenever a step leaves the bracket.
ZeroTable bessel_zeros(double nu, int count);

/// Adaptive Gauss-Kronrod value of
///   int_0^1 J_nu(j_{nu-1,m} x) J_nu(j_{nu-1,n} x) x dx,
/// whose exact value is delta_{mn} J_nu(j_{nu-1,m})^2 / 2. Requires nu >= 1/2.
double orthogonality_integral(double nu, int m, int n);

}  // namespace rrw::specfun
