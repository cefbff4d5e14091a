#include "rrw/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rrw/error.hpp"

namespace rrw::specfun {
namespace {

constexpr const char* kModule = "specfun";
constexpr double kPi = std::numbers::pi;

void check_order(double nu) {
  detail::require(std::isfinite(nu) && nu > -1.0, kModule,
                  "Bessel order must be finite and > -1, got " + std::to_string(nu));
}

// Below this argument the ascending series loses at most a couple of digits
// to cancellation.
double series_limit(double nu) { return 2.0 * std::sqrt(4.0 + std::max(nu, 0.0)); }

// Above this argument the Hankel expansion reaches 1e-17 before diverging.
double hankel_limit(double nu) { return 25.0 + nu * nu; }

// sum_k (-x^2/4)^k / (k! Gamma(nu+k+1)), i.e. J_nu(x) / (x/2)^nu.
double ascending_sum(double nu, double x) {
  const double y = -0.25 * x * x;
  double term = 1.0 / std::tgamma(nu + 1.0);
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= y / (k * (nu + k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double hankel(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 400; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (8.0 * k * x);
    if (next == 0.0) break;  // half-integer order: the expansion terminates
    if (std::abs(next) >= previous) break;  // asymptotic series turned around
    previous = std::abs(next);
    term = next;
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      p += sign * term;
    } else {
      q += sign * term;
    }
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Miller's algorithm: recur J_{nu+k} downward from an order where it is
// negligible, then normalise with the Neumann sum for (x/2)^nu.
double miller(double nu, double x) {
  const int top = 2 * ((static_cast<int>(x) + static_cast<int>(std::sqrt(160.0 * x)) + 20) / 2);

  // weight[j] multiplies J_{nu+2j}; weight[0] is the nu*Gamma(nu) -> Gamma(nu+1) limit.
  std::vector<double> weight(top / 2 + 1);
  weight[0] = std::tgamma(nu + 1.0);
  double ratio = std::tgamma(nu + 1.0);  // Gamma(nu+j)/j! at j = 1
  for (int j = 1; j <= top / 2; ++j) {
    if (j > 1) ratio *= (nu + j - 1.0) / j;
    weight[j] = (nu + 2.0 * j) * ratio;
  }

  double above = 0.0;    // J_{nu+k+1}
  double current = 1e-30;  // J_{nu+k}, unnormalised
  double norm = weight[top / 2] * current;
  for (int k = top; k >= 1; --k) {
    const double below = 2.0 * (nu + k) / x * current - above;
    above = current;
    current = below;
    if ((k - 1) % 2 == 0) norm += weight[(k - 1) / 2] * current;
    if (std::abs(current) > 1e250) {
      above *= 1e-250;
      current *= 1e-250;
      norm *= 1e-250;
    }
  }
  return current * std::pow(0.5 * x, nu) / norm;
}

}  // namespace

double bessel_j(double nu, double x) {
  check_order(nu);
  detail::require(std::isfinite(x) && x >= 0.0, kModule,
                  "Bessel argument must be finite and >= 0, got " + std::to_string(x));
  if (x == 0.0) {
    detail::require(nu >= 0.0, kModule, "J_nu(0) diverges for negative order");
    return nu == 0.0 ? 1.0 : 0.0;
  }
  if (x <= series_limit(nu)) return std::pow(0.5 * x, nu) * ascending_sum(nu, x);
  if (x >= hankel_limit(nu)) return hankel(nu, x);
  return miller(nu, x);
}

double bessel_j_scaled(double nu, double x) {
  check_order(nu);
  detail::require(std::isfinite(x) && x >= 0.0, kModule, "Bessel argument must be >= 0");
  if (x <= series_limit(nu)) return std::pow(0.5, nu) * ascending_sum(nu, x);
  return bessel_j(nu, x) / std::pow(x, nu);
}

double bessel_j_derivative(double nu, double x) {
  detail::require(x > 0.0, kModule, "derivative requires x > 0");
  return nu / x * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

double mcmahon_zero(double nu, int n) {
  const double mu = 4.0 * nu * nu;
  const double beta = (n + 0.5 * nu - 0.25) * kPi;
  const double e = 8.0 * beta;
  return beta - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e) -
         32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * std::pow(e, 5));
}

ZeroTable::ZeroTable(double nu, std::vector<double> zeros) : nu_(nu), zeros_(std::move(zeros)) {
  for (std::size_t i = 1; i < zeros_.size(); ++i) {
    detail::require(zeros_[i] > zeros_[i - 1], kModule, "zero table must be strictly increasing");
  }
}

ZeroTable bessel_zeros(double nu, int count) {
  detail::require(std::isfinite(nu) && nu >= -0.5, kModule, "zero search requires order >= -1/2");
  detail::require(count >= 1, kModule, "zero count must be >= 1");

  constexpr double kScanStep = 0.5;
  std::vector<double> zeros;
  zeros.reserve(static_cast<std::size_t>(count));

  // j_{nu,1} > max(nu, pi/2) on this order range.
  double lo = std::max(0.5, nu);
  for (int n = 1; n <= count; ++n) {
    double f_lo = bessel_j(nu, lo);
    double hi = lo + kScanStep;
    double f_hi = bessel_j(nu, hi);
    for (int guard = 0; std::signbit(f_lo) == std::signbit(f_hi) && f_hi != 0.0; ++guard) {
      detail::require(guard < 100000, kModule, "no sign change found while bracketing a zero");
      lo = hi;
      f_lo = f_hi;
      hi += kScanStep;
      f_hi = bessel_j(nu, hi);
    }

    double x = mcmahon_zero(nu, n);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      const double f = bessel_j(nu, x);
      if (f == 0.0) {
        converged = true;
        break;
      }
      if (std::signbit(f) == std::signbit(f_lo)) {
        lo = x;
        f_lo = f;
      } else {
        hi = x;
      }
      double next = x - f / bessel_j_derivative(nu, x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - x);
      x = next;
      if (step <= 1e-15 * x || hi - lo <= 1e-15 * x) {
        converged = true;
        break;
      }
    }
    detail::require(converged, kModule,
                    "Newton iteration for zero " + std::to_string(n) + " did not converge");
    zeros.push_back(x);
    lo = x + 1.0;
  }
  return ZeroTable(nu, std::move(zeros));
}

double orthogonality_integral(double nu, int m, int n) {
  detail::require(nu >= 0.5, kModule, "orthogonality integral requires nu >= 1/2");
  detail::require(m >= 1 && n >= 1, kModule, "mode indices are 1-based");
  const ZeroTable zeros = bessel_zeros(nu - 1.0, std::max(m, n));
  const double zm = zeros(static_cast<std::size_t>(m));
  const double zn = zeros(static_cast<std::size_t>(n));
  auto integrand = [&](double x) { return bessel_j(nu, zm * x) * bessel_j(nu, zn * x) * x; };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, 1.0, 15, 1e-11, &error);
  detail::require(error < 1e-10, kModule,
                  "orthogonality quadrature did not converge (error estimate " +
                      std::to_string(error) + ")");
  return value;
}

}  // namespace rrw::specfun
