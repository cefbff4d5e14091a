// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance N [M ...]  run only the listed criteria
//
// Exit status is 0 only if every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "rrw/chain.hpp"
#include "rrw/continuum.hpp"
#include "rrw/experiments.hpp"
#include "rrw/qstats.hpp"
#include "rrw/specfun.hpp"

namespace {

using rrw::chain::ReturnSeries;
using rrw::chain::WalkSpec;

void note(const std::string& text) { std::printf("    %s\n", text.c_str()); }

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

long horizon(double mult, long size) {
  return std::lround(mult * static_cast<double>(size) * static_cast<double>(size));
}

// 1. Discrete and continuum series within 5% wherever p_r > 1e-8.
bool criterion_1() {
  const long size = 1000;
  const int terms = 1000;
  bool pass = true;
  for (double a : {0.75, 1.0, 1.25}) {
    const auto start = std::chrono::steady_clock::now();
    // The discrete tail falls below 1e-8 well before 40 L^2 for these exponents.
    const ReturnSeries discrete = rrw::chain::return_distribution(WalkSpec(a, size), horizon(40, size));
    const rrw::continuum::ContinuumModel model(a, size, terms);
    const std::vector<double> analytic = model.return_series(discrete.s_max);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    double worst = 0.0;
    long worst_s = 0;
    long last_above = 0;
    double worst_late = 0.0;
    double worst_late2 = 0.0;
    for (long s = 1; s <= discrete.s_max; ++s) {
      const double p = discrete(s);
      if (!(p > 1e-8)) continue;
      const double rel = std::abs(analytic[static_cast<std::size_t>(s)] - p) / p;
      if (rel > worst) {
        worst = rel;
        worst_s = s;
      }
      if (rel > 0.05) last_above = s;
      if (s >= size * size / 100) worst_late = std::max(worst_late, rel);
      if (s >= size * size / 10) worst_late2 = std::max(worst_late2, rel);
    }
    const bool ok = worst <= 0.05 && seconds < 300.0;
    pass = pass && ok;
    note(fmt("a=%.2f: max rel err %.4g at s=%ld; rel err > 5%% up to s=%ld; %.1f s", a, worst,
             worst_s, last_above, seconds));
    note(fmt("a=%.2f: max rel err for s >= L^2/100: %.4g, for s >= L^2/10: %.4g", a, worst_late,
             worst_late2));
  }
  return pass;
}

// 2. Tail slope at a = 1, L = 4000 over [L, L^2/10].
bool criterion_2() {
  const long size = 4000;
  const auto start = std::chrono::steady_clock::now();
  const ReturnSeries series = rrw::chain::return_distribution(WalkSpec(1.0, size), size * size / 10);
  const rrw::qstats::Window window{size, size * size / 10};
  const auto est = rrw::qstats::estimate_q_tail(series, window);
  const auto plain = rrw::qstats::estimate_q_tail(series, window, {50, 0});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  note(fmt("q=%.5f (slope %.5f +- %.2g), plain log-log slope %.5f (q=%.5f); %.1f s", est.q,
           est.slope, est.slope_stderr, plain.slope, plain.q, seconds));
  return est.q >= 1.45 && est.q <= 1.55 && std::abs(est.slope + 2.0) <= 0.05 && seconds < 1200.0;
}

// 3. Delta decreasing in L at a = 1; a = 0.95 and 1.05 at least twice as far at L = 4000.
bool criterion_3() {
  const double mult = 2.0;
  const std::vector<long> sizes{500, 1000, 2000, 4000};
  const auto linear = rrw::qstats::delta_scan(1.0, sizes, mult);
  bool pass = true;
  for (const auto& row : linear) {
    pass = pass && row.ok;
    note(fmt("a=1.00 L=%ld: q=%.5f beta=%.6g Delta=%.6g captured=%.6f %s", row.size, row.q,
             row.beta, row.delta, row.captured_mass, row.error.c_str()));
  }
  for (std::size_t i = 1; i < linear.size(); ++i) pass = pass && linear[i].delta < linear[i - 1].delta;

  rrw::qstats::ScanOptions imposed;
  imposed.fixed_q = 1.5;
  const std::vector<long> largest{4000};
  const auto fixed = rrw::qstats::delta_scan(1.0, largest, mult, imposed);
  note(fmt("a=1.00 L=4000 with q=3/2 imposed: beta=%.6g Delta=%.6g", fixed[0].beta, fixed[0].delta));

  for (double a : {0.95, 1.05}) {
    const auto row = rrw::qstats::delta_scan(a, largest, mult)[0];
    const double ratio = row.delta / linear.back().delta;
    note(fmt("a=%.2f L=4000: q=%.5f beta=%.6g Delta=%.6g ratio to a=1: %.3f %s", a, row.q,
             row.beta, row.delta, ratio, row.error.c_str()));
    pass = pass && row.ok && ratio >= 2.0;
  }
  return pass;
}

// 4. Captured mass at a = 1 over horizons 10 L^2 and 50 L^2.
bool criterion_4() {
  bool pass = true;
  for (long size : {200L, 400L, 800L, 1600L}) {
    const ReturnSeries series = rrw::chain::return_distribution(WalkSpec(1.0, size), horizon(50, size));
    double prefix = 0.0;
    double previous = 0.0;
    bool monotone = true;
    double at10 = 0.0;
    for (long s = 1; s <= series.s_max; ++s) {
      prefix += series(s);
      if (s % (size * size) == 0) {
        monotone = monotone && prefix >= previous;
        previous = prefix;
      }
      if (s == horizon(10, size)) at10 = prefix;
    }
    const double at50 = series.captured_mass;
    note(fmt("L=%ld: captured mass %.6f at 10 L^2, %.8f at 50 L^2", size, at10, at50));
    pass = pass && at10 > 0.98 && at50 > 0.999 && monotone && at50 >= at10;
  }
  return pass;
}

// 5. log2 of successive mean return time ratios up to L = 2^16.
bool criterion_5() {
  bool pass = true;
  for (double a : {0.5, 1.0, 1.5}) {
    const double target = std::max(1.0, a);
    double previous = 0.0;
    double last = 0.0;
    std::vector<double> excess;
    for (int k = 1; k <= 16; ++k) {
      const long size = 1L << k;
      const double t1 = rrw::chain::mean_return_exact(WalkSpec(a, size)).first_return();
      if (k > 1) {
        last = std::log2(t1 / previous);
        excess.push_back(last - target);
      }
      previous = t1;
    }
    bool shrinking = true;
    for (std::size_t i = excess.size() - 4; i < excess.size(); ++i) {
      shrinking = shrinking && std::abs(excess[i]) <= std::abs(excess[i - 1]);
    }
    std::string line = fmt("a=%.1f: log2 ratio at L=2^16: %.5f (target %.1f, |diff| %.4f)", a,
                           last, target, std::abs(last - target));
    if (a == 1.0) {
      const double lead = 1.0 + std::log2(std::log(65536.0) / std::log(32768.0));
      line += fmt("; L ln L predicts %.5f", lead);
    }
    note(line);
    pass = pass && std::abs(last - target) <= 0.05 && shrinking;
  }
  return pass;
}

// 6. Oracle equivalences.
bool criterion_6() {
  bool pass = true;

  // Catalan first-passage values at a = 0.
  {
    const ReturnSeries series = rrw::chain::return_distribution(WalkSpec(0.0, 64), 11);
    double worst = 0.0;
    for (long s = 1; s <= 11; ++s) {
      double expected = 0.0;
      if (s % 2 == 1) {
        const long m = (s - 1) / 2;
        double catalan = 1.0;
        for (long j = 0; j < m; ++j) catalan = catalan * 2.0 * (2.0 * j + 1.0) / (j + 2.0);
        expected = catalan / std::ldexp(1.0, static_cast<int>(s));
      }
      worst = std::max(worst, std::abs(series(s) - expected));
    }
    note(fmt("Catalan values s<=11: max abs diff %.3g", worst));
    pass = pass && worst <= 1e-12;
  }

  // Monte Carlo against the Master Equation.
  for (double a : {0.5, 1.0, 1.5}) {
    const long size = 100;
    const long walkers = 10000000;
    const long s_max = horizon(5, size);
    const WalkSpec spec(a, size);
    const ReturnSeries exact = rrw::chain::return_distribution(spec, s_max);
    const ReturnSeries mc = rrw::chain::simulate_walkers(spec, walkers, s_max, 20240611, 4);
    // Histogram bins 20 per decade in s; each is a binomial count.
    std::vector<long> edges{1};
    for (int k = 1; edges.back() <= s_max; ++k) {
      const long edge = std::lround(std::pow(10.0, k / 20.0));
      if (edge > edges.back()) edges.push_back(std::min(edge, s_max + 1));
      if (edges.back() == s_max + 1) break;
    }
    int tested = 0;
    int outside = 0;
    double worst = 0.0;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      double p = 0.0;
      double observed = 0.0;
      for (long s = edges[b]; s < edges[b + 1]; ++s) {
        p += exact(s);
        observed += mc(s);
      }
      if (p * walkers < 20) continue;
      ++tested;
      const double z = std::abs(observed - p) / std::sqrt(p * (1 - p) / walkers);
      worst = std::max(worst, z);
      if (z > 4.0) ++outside;
    }
    note(fmt("Monte Carlo a=%.1f L=%ld, 1e7 walkers: %d log bins, %d beyond 4 sigma, max %.2f sigma",
             a, size, tested, outside, worst));

    // Single-step bins, for information: at this many bins a few 4 sigma
    // excursions are expected (tail probability 6.3e-5 per bin).
    int steps = 0;
    int step_outside = 0;
    for (long s = 1; s <= s_max; ++s) {
      const double p = exact(s);
      if (p * walkers < 20) continue;
      ++steps;
      if (std::abs(mc(s) - p) > 4.0 * std::sqrt(p * (1 - p) / walkers)) ++step_outside;
    }
    note(fmt("  single-step bins: %d, %d beyond 4 sigma (%.2f expected)", steps, step_outside,
             6.334e-5 * steps));
    pass = pass && outside == 0 && tested > 0;
  }

  // Bessel recurrence residuals.
  {
    double worst = 0.0;
    for (double nu = 0.1; nu < 3.0; nu += 0.0625) {
      for (double x = 0.05; x < 120.0; x *= 1.07) {
        const double r = rrw::specfun::bessel_j(nu - 1.0, x) + rrw::specfun::bessel_j(nu + 1.0, x) -
                         2.0 * nu / x * rrw::specfun::bessel_j(nu, x);
        worst = std::max(worst, std::abs(r));
      }
    }
    note(fmt("Bessel recurrence: max residual %.3g", worst));
    pass = pass && worst < 1e-10;
  }

  // Orthogonality of the eigenfunctions.
  {
    double worst = 0.0;
    for (double a : {0.5, 0.75, 1.0, 1.25, 1.5}) {
      const double nu = 1.0 / (2.0 - a);
      const auto zeros = rrw::specfun::bessel_zeros(nu - 1.0, 10);
      for (int m = 1; m <= 10; ++m) {
        for (int n = m; n <= 10; ++n) {
          const double jm = rrw::specfun::bessel_j(nu, zeros(static_cast<std::size_t>(m)));
          const double expected = m == n ? 0.5 * jm * jm : 0.0;
          worst = std::max(worst, std::abs(rrw::specfun::orthogonality_integral(nu, m, n) - expected));
        }
      }
    }
    note(fmt("orthogonality integrals, 10 modes, 5 exponents: max abs error %.3g", worst));
    pass = pass && worst <= 1e-8;
  }

  // Reduction of the general solution to the a = 1 closed forms.
  {
    const long size = 1000;
    const int terms = 500;
    const std::vector<double> general = rrw::continuum::coefficients(1.0, size, terms);
    const std::vector<double> closed = rrw::continuum::linear::coefficients(size, terms);
    double worst_coeff = 0.0;
    for (std::size_t i = 0; i < general.size(); ++i) {
      worst_coeff = std::max(worst_coeff, std::abs(general[i] - closed[i]) / std::abs(closed[i]));
    }
    const rrw::continuum::ContinuumModel model(1.0, size, terms);
    const auto zeros = rrw::specfun::bessel_zeros(0.0, terms);
    double worst_density = 0.0;
    for (double x : {1e-4, 0.01, 0.3, 0.77, 1.0}) {
      for (double t : {1.0, 10.0, 100.0, 1000.0}) {
        const double expected = rrw::continuum::linear::density(size, closed, zeros, x, t);
        // Measured against the absolute term sum, since the series cancels.
        double magnitude = std::abs(expected);
        for (std::size_t i = 0; i < closed.size(); ++i) {
          const double z = zeros(i + 1);
          magnitude += std::abs(closed[i] * rrw::specfun::bessel_j(1.0, z * std::sqrt(x)) /
                                std::sqrt(x) * std::exp(-z * z * t / (8.0 * size)));
        }
        worst_density = std::max(worst_density, std::abs(model.density(x, t) - expected) / magnitude);
      }
    }
    note(fmt("a=1 reduction: coefficients rel %.3g, density rel %.3g", worst_coeff, worst_density));
    pass = pass && worst_coeff <= 1e-13 && worst_density <= 1e-13;
  }
  return pass;
}

// 7. Byte-identical output across repeats and thread counts for every command.
bool criterion_7() {
  using namespace rrw::experiments;
  std::vector<RunConfig> configs;
  RunConfig c;
  c.command = "return-dist";
  c.a = 1.25;
  c.L = 200;
  c.with_continuum = true;
  c.terms = 300;
  configs.push_back(c);
  c = RunConfig{};
  c.command = "continuum";
  c.a = 0.75;
  c.L = 200;
  c.terms = 300;
  configs.push_back(c);
  c = RunConfig{};
  c.command = "table1";
  c.L_list = {100, 200};
  c.horizon_list = {10, 50};
  configs.push_back(c);
  c = RunConfig{};
  c.command = "delta-scan";
  c.a_list = {0.95, 1.0, 1.05};
  c.L_list = {100, 200, 300};
  configs.push_back(c);
  c = RunConfig{};
  c.command = "mean-return";
  c.a_list = {0.5, 1.0, 1.5};
  c.L_list = {256, 512, 1024};
  configs.push_back(c);
  c = RunConfig{};
  c.command = "simulate";
  c.a = 1.0;
  c.L = 50;
  c.walkers = 2000000;
  c.seed = 99;
  configs.push_back(c);

  bool pass = true;
  for (RunConfig config : configs) {
    for (Format format : {Format::csv, Format::json}) {
      config.format = format;
      config.threads = 1;
      const std::string first = render(run(config), config);
      const std::string again = render(run(config), config);
      bool same_threads = true;
      for (unsigned threads : {2u, 4u}) {
        RunConfig parallel = config;
        parallel.threads = threads;
        // Rendered with the serial config so that the echoed thread count matches.
        same_threads = same_threads && render(run(parallel), config) == first;
      }
      const bool ok = first == again && same_threads;
      note(fmt("%s (%s): %zu bytes, %s", config.command.c_str(), format == Format::csv ? "csv" : "json",
               first.size(), ok ? "identical" : "DIFFERENT"));
      pass = pass && ok;
    }
  }
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<bool()>>> criteria{
      {"discrete/continuum agreement within 5% (a = 0.75, 1, 1.25; L = N = 1000)", criterion_1},
      {"tail q in [1.45, 1.55] at a = 1, L = 4000", criterion_2},
      {"Delta decreasing at a = 1 and >= 2x larger for a = 0.95, 1.05", criterion_3},
      {"captured mass > 0.98 at 10 L^2, > 0.999 at 50 L^2, monotone", criterion_4},
      {"mean return log2 ratios within 0.05 at L = 2^16", criterion_5},
      {"oracle equivalences", criterion_6},
      {"deterministic output across repeats and thread counts", criterion_7},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(number)) continue;
    bool ok = false;
    try {
      ok = criteria[i].second();
    } catch (const std::exception& e) {
      note(std::string("exception: ") + e.what());
    }
    if (!ok) ++failures;
    std::printf("criterion %d: %s  %s\n", number, ok ? "PASS" : "FAIL", criteria[i].first.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
