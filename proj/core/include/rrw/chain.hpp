#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rrw::chain {

/// Rule applied at the top site L. Only the upward channel is removed: the
/// walker moves down with probability g(L)/2 and otherwise stays.
enum class TopBoundary { half_reflect };

/// The restricted random walk on sites {0..L}: a move is attempted at site n
/// with probability g(n) = (n/L)^a, up or down with equal odds, and site 0 is
/// absorbing.
class WalkSpec {
 public:
  /// Requires 0 <= a < 2 and L >= 2.
  WalkSpec(double a, long size, TopBoundary top = TopBoundary::half_reflect);

  double exponent() const noexcept { return a_; }
  long size() const noexcept { return size_; }
  TopBoundary top() const noexcept { return top_; }

  /// g(n); exactly 0 at n = 0 (for every a, including a = 0) and 1 at n = L.
  double hop_probability(long n) const;

 private:
  double a_;
  long size_;
  TopBoundary top_;
};

double hop_probability(const WalkSpec& spec, long n);

/// Occupation probabilities over sites 0..L at step s. Mass absorbed at 0
/// stays in p[0].
struct ProbState {
  std::vector<double> p;
  long s = 0;
};

/// All mass on site 1 at s = 0.
ProbState initial_state(const WalkSpec& spec);

/// One step of the Master Equation. Throws if the input is not a valid
/// distribution over 0..L or if total mass drifts by more than 1e-12.
ProbState step_distribution(const ProbState& state, const WalkSpec& spec);

/// First-return probabilities p[s] for s = 1..s_max; p[0] is 0 and unused.
struct ReturnSeries {
  std::vector<double> p;
  long s_max = 0;
  double captured_mass = 0.0;

  double operator()(long s) const { return p.at(static_cast<std::size_t>(s)); }
  std::span<const double> values() const noexcept { return p; }
};

/// Exact distribution of the first return time to 0 from site 1, obtained by
/// iterating the Master Equation s_max times. p[s] is the mass that enters
/// site 0 during step s, i.e. the increment of the absorbed mass.
ReturnSeries return_distribution(const WalkSpec& spec, long s_max);

/// Expected number of steps t[n] to reach 0 from site n.
struct MeanReturn {
  std::vector<double> t;

  /// Mean first-return time from site 1.
  double first_return() const { return t.at(1); }
};

/// Solves the backward equations
///   g(n) t[n] = 1 + g(n)/2 (t[n+1] + t[n-1]),   1 <= n < L,
///   g(L)/2 t[L] = 1 + g(L)/2 t[L-1],
/// with t[0] = 0, by Thomas elimination.
MeanReturn mean_return_exact(const WalkSpec& spec);

/// Monte Carlo estimate of the return series from n_walkers independent
/// trajectories started at site 1. Walkers are split into fixed blocks with
/// their own seeded streams, so the result depends only on (spec, n_walkers,
/// s_max, seed) and not on `threads`.
ReturnSeries simulate_walkers(const WalkSpec& spec, long n_walkers, long s_max,
                              std::uint64_t seed, unsigned threads = 1);

}  // namespace rrw::chain
