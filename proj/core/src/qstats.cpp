#include "rrw/qstats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "rrw/error.hpp"

namespace rrw::qstats {
namespace {

constexpr const char* kModule = "qstats";

// Integer steps spread evenly in log s over [lo, hi], without repeats.
std::vector<long> log_samples(Window w, int per_decade) {
  std::vector<long> out;
  if (w.lo < 1 || w.hi < w.lo) return out;
  const double span = std::log10(static_cast<double>(w.hi) / static_cast<double>(w.lo));
  const int count = std::max(2, static_cast<int>(std::ceil(span * per_decade)) + 1);
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    const long s = std::lround(static_cast<double>(w.lo) * std::pow(10.0, span * f));
    const long clamped = std::clamp(s, w.lo, w.hi);
    if (out.empty() || clamped > out.back()) out.push_back(clamped);
  }
  return out;
}

double log_residual_sum(std::span<const double> p, std::span<const long> steps, double q,
                        double beta, double mass) {
  const double log_amp = std::log(beta * (2.0 - q) * mass);
  double sum = 0.0;
  for (long s : steps) {
    const double model = log_amp + std::log1p((q - 1.0) * beta * static_cast<double>(s)) / (1.0 - q);
    const double r = std::log(p[static_cast<std::size_t>(s)]) - model;
    sum += r * r;
  }
  return sum;
}

}  // namespace

double q_exponential(double q, double u) {
  if (std::abs(q - 1.0) < 1e-8) return std::exp(u);
  const double base = 1.0 + (1.0 - q) * u;
  if (base < 0.0) return 0.0;
  return std::pow(base, 1.0 / (1.0 - q));
}

double q_gaussian(double q, double width, double u) { return q_exponential(q, -width * u * u); }

Window default_tail_window(const chain::ReturnSeries& series, long size) {
  detail::require(size >= 2, kModule, "system size must be >= 2");
  long hi = std::min(series.s_max, size * size / 10);
  while (hi > 0 && !(series.p[static_cast<std::size_t>(hi)] > 1e-10)) --hi;
  return {size, hi};
}

TailEstimate estimate_q_tail(std::span<const double> p_r, Window window, TailOptions options) {
  detail::require(window.lo >= 1 && window.hi >= window.lo &&
                      static_cast<std::size_t>(window.hi) < p_r.size(),
                  kModule, "tail window must lie inside [1, s_max]");
  detail::require(options.transient_terms >= 0 && options.points_per_decade >= 1, kModule,
                  "invalid tail options");

  std::vector<long> steps;
  for (long s : log_samples(window, options.points_per_decade)) {
    const double v = p_r[static_cast<std::size_t>(s)];
    if (v > 0.0 && std::isfinite(v)) steps.push_back(s);
  }
  const int columns = 2 + options.transient_terms;
  const int n = static_cast<int>(steps.size());
  detail::require(n >= 10 && n > columns, kModule,
                  "tail window has only " + std::to_string(n) + " usable points (need 10)");

  Eigen::MatrixXd x(n, columns);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(steps[static_cast<std::size_t>(i)]);
    x(i, 0) = 1.0;
    x(i, 1) = std::log(s);
    const double r = static_cast<double>(window.lo) / s;
    double power = 1.0;
    for (int j = 0; j < options.transient_terms; ++j) {
      power *= r;
      x(i, 2 + j) = power;
    }
    y(i) = std::log(p_r[static_cast<std::size_t>(steps[static_cast<std::size_t>(i)])]);
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  detail::require(qr.rank() == columns, kModule, "tail regression is rank deficient");
  const Eigen::VectorXd beta = qr.solve(y);
  const double rss = (x * beta - y).squaredNorm();
  const double sigma2 = n > columns ? rss / (n - columns) : 0.0;
  const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * sigma2;

  TailEstimate est;
  est.slope = beta(1);
  est.slope_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
  est.window = window;
  est.points = n;
  detail::require(est.slope < 0.0, kModule,
                  "tail slope " + std::to_string(est.slope) + " is not negative; no power-law tail");
  est.q = 1.0 + 1.0 / std::abs(est.slope);
  return est;
}

TailEstimate estimate_q_tail(const chain::ReturnSeries& series, Window window,
                             TailOptions options) {
  return estimate_q_tail(series.values(), window, options);
}

QFit fit_beta(const chain::ReturnSeries& series, double q, FitOptions options) {
  detail::require(q > 1.0 && q < 2.0, kModule, "fit_beta requires 1 < q < 2");
  detail::require(series.captured_mass > 0.9, kModule,
                  "captured mass " + std::to_string(series.captured_mass) +
                      " is below 0.9; extend the horizon");
  Window w = options.window;
  if (w.hi == 0) w.hi = series.s_max;
  w.lo = std::max<long>(w.lo, 1);
  w.hi = std::min(w.hi, series.s_max);
  detail::require(w.hi > w.lo, kModule, "fit window is empty");

  std::vector<long> steps;
  for (long s : log_samples(w, options.points_per_decade)) {
    if (series.p[static_cast<std::size_t>(s)] > 0.0) steps.push_back(s);
  }
  detail::require(steps.size() >= 3, kModule, "too few positive points in the fit window");

  const std::span<const double> p = series.values();
  auto objective = [&](double log_beta) {
    return log_residual_sum(p, steps, q, std::exp(log_beta), series.captured_mass);
  };

  // Coarse scan to land inside the right basin, then Brent around the best node.
  const double lo = std::log(1e-3 / static_cast<double>(w.hi));
  const double hi = std::log(10.0);
  constexpr int kNodes = 121;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kNodes; ++i) {
    const double v = objective(lo + (hi - lo) * i / (kNodes - 1));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  detail::require(best > 0 && best < kNodes - 1, kModule,
                  "beta optimum lies on the edge of the search range");
  const double step = (hi - lo) / (kNodes - 1);
  std::uintmax_t iterations = 200;
  const auto [log_beta, value] = boost::math::tools::brent_find_minima(
      objective, lo + step * (best - 1), lo + step * (best + 1), 52, iterations);
  detail::require(iterations < 200, kModule, "Brent minimisation of beta did not converge");

  QFit fit;
  fit.q = q;
  fit.beta = std::exp(log_beta);
  fit.amplitude = fit.beta * (2.0 - q) * series.captured_mass;
  fit.fit_window = w;
  fit.residual = std::sqrt(value / static_cast<double>(steps.size()));
  return fit;
}

double delta_area(const chain::ReturnSeries& series, const QFit& fit) {
  double sum = 0.0;
  for (long s = 1; s <= series.s_max; ++s) {
    const double model = fit.amplitude * q_exponential(fit.q, -fit.beta * static_cast<double>(s));
    sum += std::abs(series.p[static_cast<std::size_t>(s)] - model);
  }
  return sum;
}

ScanRow analyse_series(double a, long size, const chain::ReturnSeries& series,
                       const ScanOptions& options) {
  ScanRow row;
  row.a = a;
  row.size = size;
  row.s_max = series.s_max;
  row.captured_mass = series.captured_mass;
  try {
    const Window tail = default_tail_window(series, size);
    if (options.fixed_q) {
      row.q = *options.fixed_q;
    } else {
      const TailEstimate est = estimate_q_tail(series, tail, options.tail);
      row.q = est.q;
      row.q_stderr = est.slope_stderr * (row.q - 1.0) * (row.q - 1.0);
    }
    FitOptions fit_options;
    fit_options.window = {1, size * size / 10};
    fit_options.points_per_decade = options.fit_points_per_decade;
    QFit fit = fit_beta(series, row.q, fit_options);
    row.beta = fit.beta;
    row.delta = delta_area(series, fit);
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

std::vector<ScanRow> delta_scan(double a, std::span<const long> sizes, double horizon_mult,
                                const ScanOptions& options) {
  detail::require(!sizes.empty(), kModule, "size list is empty");
  detail::require(std::adjacent_find(sizes.begin(), sizes.end(), std::greater_equal<>()) ==
                      sizes.end(),
                  kModule, "size list must be strictly increasing");
  detail::require(horizon_mult > 0.0, kModule, "horizon multiplier must be positive");

  std::vector<ScanRow> rows(sizes.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < sizes.size(); i = next++) {
      const long size = sizes[i];
      try {
        const chain::WalkSpec spec(a, size);
        const long s_max = std::max<long>(
            1, std::lround(horizon_mult * static_cast<double>(size) * static_cast<double>(size)));
        rows[i] = analyse_series(a, size, chain::return_distribution(spec, s_max), options);
      } catch (const std::exception& e) {
        rows[i].a = a;
        rows[i].size = size;
        rows[i].ok = false;
        rows[i].error = e.what();
      }
    }
  };
  const unsigned workers =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(sizes.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return rows;
}

}  // namespace rrw::qstats
