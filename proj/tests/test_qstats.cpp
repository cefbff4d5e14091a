#include <doctest.h>

#include <cmath>
#include <vector>

#include "rrw/chain.hpp"
#include "rrw/error.hpp"
#include "rrw/qstats.hpp"

using namespace rrw::qstats;
using rrw::chain::ReturnSeries;

namespace {

// p[s] = mass * beta (2-q) exp_q(-beta s), normalised as fit_beta assumes.
ReturnSeries synthetic(double q, double beta, long s_max, double mass = 0.97) {
  ReturnSeries series;
  series.s_max = s_max;
  series.p.assign(static_cast<std::size_t>(s_max) + 1, 0.0);
  for (long s = 1; s <= s_max; ++s) {
    series.p[static_cast<std::size_t>(s)] =
        mass * beta * (2.0 - q) * q_exponential(q, -beta * static_cast<double>(s));
  }
  series.captured_mass = mass;
  return series;
}

}  // namespace

TEST_CASE("q-exponential values") {
  CHECK(q_exponential(1.7, 0.0) == 1.0);
  CHECK(q_exponential(1.5, -2.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(q_exponential(0.5, -3.0) == 0.0);
  CHECK(q_exponential(1.0, 0.7) == doctest::Approx(std::exp(0.7)).epsilon(1e-15));
  CHECK(q_exponential(1.0 + 1e-9, -2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("q-Gaussian values") {
  CHECK(q_gaussian(1.0, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(q_gaussian(1.3, 2.5, 0.0) == 1.0);
  CHECK(q_gaussian(1.5, 0.5, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("q-exponential is continuous at q = 1") {
  for (double u = -10.0; u <= 10.0; u += 0.25) {
    for (double q : {1.0 - 1e-4, 1.0 + 1e-4}) {
      CAPTURE(u);
      CAPTURE(q);
      // exp_q(u) = exp(u) (1 - (q-1) u^2 / 2 + ...)
      CHECK(std::abs(q_exponential(q, u) - std::exp(u)) <= 1e-4 * u * u * std::exp(u));
    }
  }
}

TEST_CASE("q-exponential is strictly decreasing with a power-law tail") {
  for (double q : {1.1, 1.5, 1.9}) {
    double previous = 1.0;
    for (double s = 1.0; s < 1e9; s *= 1.5) {
      const double v = q_exponential(q, -1e-3 * s);
      REQUIRE(v < previous);
      previous = v;
    }
    const double s1 = 1e20;
    const double s2 = 1e24;
    const double slope = (std::log(q_exponential(q, -1e-3 * s2)) - std::log(q_exponential(q, -1e-3 * s1))) /
                         std::log(s2 / s1);
    CHECK(slope == doctest::Approx(-1.0 / (q - 1.0)).epsilon(1e-6));
  }
}

TEST_CASE("tail slope of an exact power law") {
  std::vector<double> p(100001, 0.0);
  for (std::size_t s = 1; s < p.size(); ++s) p[s] = 3.0 / (static_cast<double>(s) * s);
  const TailEstimate est = estimate_q_tail(p, {100, 100000});
  CHECK(est.q == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(est.slope == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(est.points >= 10);
  const TailEstimate plain = estimate_q_tail(p, {100, 100000}, {50, 0});
  CHECK(plain.q == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("tail slope recovers q from synthesized q-exponentials") {
  for (double q : {1.2, 1.4, 1.5, 1.7}) {
    const double beta = 1e-3;
    const long lo = static_cast<long>(100.0 / (beta * (q - 1.0)));
    const ReturnSeries series = synthetic(q, beta, 20 * lo);
    CAPTURE(q);
    CHECK(estimate_q_tail(series, {lo, 20 * lo}).q == doctest::Approx(q).epsilon(0.02 / q));
    CHECK(estimate_q_tail(series, {lo, 20 * lo}, {50, 0}).q ==
          doctest::Approx(q).epsilon(0.02 / q));
  }
}

TEST_CASE("tail estimation errors") {
  std::vector<double> rising(1001);
  for (std::size_t s = 0; s < rising.size(); ++s) rising[s] = static_cast<double>(s + 1);
  CHECK_THROWS_AS(estimate_q_tail(rising, {10, 1000}), rrw::ContractError);
  CHECK_THROWS_AS(estimate_q_tail(rising, {10, 14}), rrw::ContractError);
  CHECK_THROWS_AS(estimate_q_tail(rising, {10, 5000}), rrw::ContractError);
  std::vector<double> zeros(1001, 0.0);
  CHECK_THROWS_AS(estimate_q_tail(zeros, {10, 1000}), rrw::ContractError);
}

TEST_CASE("beta round trip on a synthesized series") {
  const double q = 1.5;
  const double beta = 2e-4;
  const ReturnSeries series = synthetic(q, beta, 2000000);
  const QFit fit = fit_beta(series, q);
  CHECK(fit.beta == doctest::Approx(beta).epsilon(1e-3));
  CHECK(fit.amplitude == doctest::Approx(beta * (2 - q) * series.captured_mass).epsilon(1e-3));
  // Brent locates a minimum to about sqrt(machine epsilon) in log beta.
  CHECK(delta_area(series, fit) < 1e-6 * series.captured_mass);
  CHECK(fit.residual < 1e-6);
}

TEST_CASE("a wrong q fits worse") {
  const ReturnSeries series = synthetic(1.5, 1e-3, 200000);
  const double right = fit_beta(series, 1.5).residual;
  CHECK(fit_beta(series, 1.4).residual > right);
  CHECK(fit_beta(series, 1.6).residual > right);
}

TEST_CASE("fit preconditions") {
  ReturnSeries series = synthetic(1.5, 1e-3, 1000);
  CHECK_THROWS_AS(fit_beta(series, 1.0), rrw::ContractError);
  CHECK_THROWS_AS(fit_beta(series, 2.0), rrw::ContractError);
  series.captured_mass = 0.5;
  CHECK_THROWS_AS(fit_beta(series, 1.5), rrw::ContractError);
}

TEST_CASE("Delta vanishes on its own fit and is stable under horizon extension") {
  const ReturnSeries exact = synthetic(1.5, 1e-2, 100000);
  QFit fit;
  fit.q = 1.5;
  fit.beta = 1e-2;
  fit.amplitude = 0.97 * 1e-2 * 0.5;
  CHECK(delta_area(exact, fit) < 1e-15);

  const ReturnSeries walk = rrw::chain::return_distribution(rrw::chain::WalkSpec(1.0, 40), 32000);
  const QFit walk_fit = fit_beta(walk, 1.5, {{1, 160}, 50});
  ReturnSeries shorter = walk;
  shorter.s_max = 16000;
  shorter.p.resize(16001);
  double tail = 0.0;
  for (long s = 16001; s <= 32000; ++s) {
    tail += walk(s) + walk_fit.amplitude * q_exponential(1.5, -walk_fit.beta * static_cast<double>(s));
  }
  CHECK(std::abs(delta_area(walk, walk_fit) - delta_area(shorter, walk_fit)) <= tail);
}

TEST_CASE("default tail window") {
  const ReturnSeries walk = rrw::chain::return_distribution(rrw::chain::WalkSpec(1.0, 100), 100000);
  const Window w = default_tail_window(walk, 100);
  CHECK(w.lo == 100);
  CHECK(w.hi == 1000);
}

TEST_CASE("Delta scan pipeline at a = 1") {
  const std::vector<long> sizes{100, 200, 400};
  const auto rows = delta_scan(1.0, sizes, 10.0);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CAPTURE(row.size);
    CHECK(row.ok);
    CHECK(row.q >= 1.45);
    CHECK(row.q <= 1.55);
    CHECK(row.beta > 0.0);
    CHECK(row.captured_mass > 0.98);
  }
  CHECK(rows[1].delta < rows[0].delta);
  CHECK(rows[2].delta < rows[1].delta);
}

TEST_CASE("Delta scan marks failing rows and keeps going") {
  const std::vector<long> sizes{2, 60};
  const auto rows = delta_scan(1.0, sizes, 10.0);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].ok);
  CHECK_FALSE(rows[0].error.empty());
  CHECK(rows[1].ok);

  const std::vector<long> unsorted{100, 50};
  CHECK_THROWS_AS(delta_scan(1.0, unsorted, 10.0), rrw::ContractError);
}

TEST_CASE("Delta scan is independent of the thread count") {
  const std::vector<long> sizes{40, 60, 80};
  ScanOptions serial;
  ScanOptions parallel;
  parallel.threads = 3;
  const auto a = delta_scan(0.9, sizes, 10.0, serial);
  const auto b = delta_scan(0.9, sizes, 10.0, parallel);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    CHECK(a[i].size == b[i].size);
    CHECK(a[i].q == b[i].q);
    CHECK(a[i].beta == b[i].beta);
    CHECK(a[i].delta == b[i].delta);
  }
}

TEST_CASE("imposed q") {
  const std::vector<long> sizes{100};
  ScanOptions options;
  options.fixed_q = 1.5;
  const auto rows = delta_scan(1.0, sizes, 10.0, options);
  CHECK(rows[0].ok);
  CHECK(rows[0].q == 1.5);
}
