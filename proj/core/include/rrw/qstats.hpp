#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrw/chain.hpp"

namespace rrw::qstats {

/// exp_q(u) = [1 + (1-q) u]^{1/(1-q)} where the bracket is positive, 0
/// otherwise; exp(u) for |q - 1| < 1e-8.
double q_exponential(double q, double u);

/// Unnormalised q-Gaussian exp_q(-width * u^2).
double q_gaussian(double q, double width, double u);

/// Closed range of steps [lo, hi].
struct Window {
  long lo = 0;
  long hi = 0;
};

struct TailOptions {
  int points_per_decade = 50;
  /// Number of (lo/s)^j correction columns added to the log-log regression
  /// to absorb the approach to the power law. 0 gives the plain slope.
  int transient_terms = 4;
};

struct TailEstimate {
  double q = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  Window window;
  int points = 0;
};

/// [L, min(L^2/10, last s with p_r > 1e-10)], the span between the early
/// transient and the finite-size cutoff.
Window default_tail_window(const chain::ReturnSeries& series, long size);

/// Least-squares fit of log p_r = c + m log s + sum_j b_j (lo/s)^j over
/// log-spaced steps in the window; q = 1 + 1/|m|.
/// Throws with fewer than 10 usable points or when m >= 0.
TailEstimate estimate_q_tail(std::span<const double> p_r, Window window, TailOptions options = {});
TailEstimate estimate_q_tail(const chain::ReturnSeries& series, Window window,
                             TailOptions options = {});

struct QFit {
  double q = 0.0;
  double beta = 0.0;
  double amplitude = 0.0;
  Window fit_window;
  double residual = 0.0;  ///< RMS log residual over the fit samples
  double delta = std::numeric_limits<double>::quiet_NaN();
};

struct FitOptions {
  /// Steps entering the log-space residual; hi = 0 means [1, s_max].
  Window window{1, 0};
  int points_per_decade = 50;
};

/// Fits A exp_q(-beta s) with A = beta (2-q) captured_mass, choosing beta to
/// minimise the squared log residual by Brent's method on log beta.
/// Requires 1 < q < 2 and captured_mass > 0.9.
QFit fit_beta(const chain::ReturnSeries& series, double q, FitOptions options = {});

/// sum_{s=1}^{s_max} |p_r[s] - A exp_q(-beta s)|.
double delta_area(const chain::ReturnSeries& series, const QFit& fit);

struct ScanOptions {
  TailOptions tail;
  int fit_points_per_decade = 50;
  /// Impose this q instead of estimating it from the tail.
  std::optional<double> fixed_q;
  unsigned threads = 1;
};

struct ScanRow {
  double a = 0.0;
  long size = 0;
  long s_max = 0;
  bool ok = false;
  std::string error;
  double q = 0.0;
  double q_stderr = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double captured_mass = 0.0;
};

/// Runs evolution, tail estimate, beta fit and Delta for each size with
/// s_max = horizon_mult * L^2. A failing row is marked and the scan goes on.
/// Rows come back in input order regardless of `threads`.
std::vector<ScanRow> delta_scan(double a, std::span<const long> sizes, double horizon_mult,
                                const ScanOptions& options = {});

/// Same pipeline on an already evolved series.
ScanRow analyse_series(double a, long size, const chain::ReturnSeries& series,
                       const ScanOptions& options = {});

}  // namespace rrw::qstats
