#include "rrw/chain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "rrw/error.hpp"

namespace rrw::chain {
namespace {

constexpr const char* kModule = "chain";
constexpr double kMassTolerance = 1e-12;
constexpr long kMassCheckInterval = 1024;
constexpr long kWalkersPerBlock = 1L << 14;

// h[n] = g(n)/2, with h[0] = 0 and one zero pad past L.
std::vector<double> half_rates(const WalkSpec& spec) {
  const long size = spec.size();
  std::vector<double> h(static_cast<std::size_t>(size) + 2, 0.0);
  for (long n = 1; n <= size; ++n) h[static_cast<std::size_t>(n)] = 0.5 * spec.hop_probability(n);
  return h;
}

// One Master-Equation step from `p` into `next`, written in the flux form
//   P(n,s+1) = P(n,s) + h(n-1) P(n-1,s) + h(n+1) P(n+1,s) - 2 h(n) P(n,s)
// so that every outgoing flux is subtracted and added with the same rounding.
// Site 0 is left to the caller, which accumulates it with compensation.
void advance_bulk(const double* __restrict h, const double* __restrict p,
                  double* __restrict next, long size) {
  for (long n = 1; n < size; ++n) {
    next[n] = p[n] + h[n - 1] * p[n - 1] + h[n + 1] * p[n + 1] - 2.0 * h[n] * p[n];
  }
  next[size] = p[size] - h[size] * p[size] + h[size - 1] * p[size - 1];
}

// Kahan-compensated accumulator for the absorbed mass, which grows towards 1
// by increments many orders of magnitude smaller.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double value) {
    const double y = value - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum - carry; }
};

double bulk_mass(const std::vector<double>& p, long size) {
  CompensatedSum total;
  for (long n = 1; n <= size; ++n) total.add(p[static_cast<std::size_t>(n)]);
  return total.value();
}

void check_distribution(const ProbState& state, const WalkSpec& spec) {
  detail::require(state.p.size() == static_cast<std::size_t>(spec.size()) + 1, kModule,
                  "state vector must cover sites 0..L");
  double total = 0.0;
  for (double v : state.p) {
    detail::require(std::isfinite(v) && v >= 0.0, kModule, "probabilities must be finite and >= 0");
    total += v;
  }
  detail::require(std::abs(total - 1.0) < kMassTolerance, kModule,
                  "state is not normalised (mass " + std::to_string(total) + ")");
}

// Uniform on (0, 1] from the top 53 bits.
double uniform_open(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

WalkSpec::WalkSpec(double a, long size, TopBoundary top) : a_(a), size_(size), top_(top) {
  detail::require(std::isfinite(a) && a >= 0.0 && a < 2.0, kModule,
                  "exponent a must satisfy 0 <= a < 2, got " + std::to_string(a));
  detail::require(size >= 2, kModule, "system size L must be >= 2, got " + std::to_string(size));
}

double WalkSpec::hop_probability(long n) const {
  detail::require(n >= 0 && n <= size_, kModule, "site index out of range");
  if (n == 0) return 0.0;
  if (n == size_) return 1.0;
  return std::pow(static_cast<double>(n) / static_cast<double>(size_), a_);
}

double hop_probability(const WalkSpec& spec, long n) { return spec.hop_probability(n); }

ProbState initial_state(const WalkSpec& spec) {
  ProbState state;
  state.p.assign(static_cast<std::size_t>(spec.size()) + 1, 0.0);
  state.p[1] = 1.0;
  return state;
}

ProbState step_distribution(const ProbState& state, const WalkSpec& spec) {
  check_distribution(state, spec);
  const long size = spec.size();
  const std::vector<double> h = half_rates(spec);

  std::vector<double> padded(state.p);
  padded.push_back(0.0);
  std::vector<double> next(padded.size(), 0.0);
  advance_bulk(h.data(), padded.data(), next.data(), size);
  next[0] = padded[0] + h[1] * padded[1];
  next.pop_back();

  double total = 0.0;
  for (double v : next) total += v;
  detail::require(std::abs(total - 1.0) < kMassTolerance, kModule,
                  "mass conservation violated after step " + std::to_string(state.s + 1));
  return ProbState{std::move(next), state.s + 1};
}

ReturnSeries return_distribution(const WalkSpec& spec, long s_max) {
  detail::require(s_max >= 1, kModule, "horizon s_max must be >= 1");
  const long size = spec.size();
  const std::vector<double> h = half_rates(spec);
  std::vector<double> p(h.size(), 0.0);
  std::vector<double> next(h.size(), 0.0);
  p[1] = 1.0;

  ReturnSeries series;
  series.s_max = s_max;
  series.p.assign(static_cast<std::size_t>(s_max) + 1, 0.0);
  CompensatedSum absorbed;

  for (long s = 1; s <= s_max; ++s) {
    const double inflow = h[1] * p[1];
    series.p[static_cast<std::size_t>(s)] = inflow;
    absorbed.add(inflow);
    advance_bulk(h.data(), p.data(), next.data(), size);
    p.swap(next);

    if (s % kMassCheckInterval == 0 || s == s_max) {
      const double total = absorbed.value() + bulk_mass(p, size);
      detail::require(std::isfinite(total), kModule,
                      "non-finite probability at step " + std::to_string(s));
      detail::require(std::abs(total - 1.0) < kMassTolerance, kModule,
                      "mass conservation violated at step " + std::to_string(s) + " (drift " +
                          std::to_string(total - 1.0) + ")");
    }
  }
  series.captured_mass = absorbed.value();
  return series;
}

MeanReturn mean_return_exact(const WalkSpec& spec) {
  const long size = spec.size();
  // Each row divided by g(n)/2 gives the second-difference system
  //   -t[n-1] + 2 t[n] - t[n+1] = 2/g(n),   -t[L-1] + t[L] = 2/g(L).
  std::vector<double> upper(static_cast<std::size_t>(size) + 1, 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(size) + 1, 0.0);
  for (long n = 1; n <= size; ++n) {
    const std::size_t i = static_cast<std::size_t>(n);
    const double diag = (n == size) ? 1.0 : 2.0;
    const double denom = diag + (n > 1 ? upper[i - 1] : 0.0);
    detail::require(std::isfinite(denom) && denom != 0.0, kModule,
                    "singular mean-return system at row " + std::to_string(n));
    upper[i] = -1.0 / denom;
    rhs[i] = (2.0 / spec.hop_probability(n) + (n > 1 ? rhs[i - 1] : 0.0)) / denom;
  }
  MeanReturn result;
  result.t.assign(static_cast<std::size_t>(size) + 1, 0.0);
  result.t[static_cast<std::size_t>(size)] = rhs[static_cast<std::size_t>(size)];
  for (long n = size - 1; n >= 1; --n) {
    const std::size_t i = static_cast<std::size_t>(n);
    result.t[i] = rhs[i] - upper[i] * result.t[i + 1];
  }
  return result;
}

ReturnSeries simulate_walkers(const WalkSpec& spec, long n_walkers, long s_max,
                              std::uint64_t seed, unsigned threads) {
  detail::require(n_walkers >= 1, kModule, "need at least one walker");
  detail::require(s_max >= 1, kModule, "horizon s_max must be >= 1");
  const long size = spec.size();

  // Per-site probability of leaving the site in one step, and log(1 - that)
  // for sampling geometric holding times.
  std::vector<double> leave(static_cast<std::size_t>(size) + 1, 0.0);
  std::vector<double> log_stay(leave.size(), 0.0);
  for (long n = 1; n <= size; ++n) {
    const std::size_t i = static_cast<std::size_t>(n);
    const double g = spec.hop_probability(n);
    leave[i] = (n == size) ? 0.5 * g : g;
    log_stay[i] = std::log1p(-leave[i]);
  }

  const long blocks = (n_walkers + kWalkersPerBlock - 1) / kWalkersPerBlock;
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
  std::vector<std::vector<std::uint64_t>> counts(
      workers, std::vector<std::uint64_t>(static_cast<std::size_t>(s_max) + 1, 0));
  std::atomic<long> next_block{0};

  auto run = [&](unsigned worker) {
    auto& histogram = counts[worker];
    for (long block = next_block++; block < blocks; block = next_block++) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(block),
                        static_cast<std::uint32_t>(block >> 32)};
      std::mt19937_64 gen(seq);
      const long first = block * kWalkersPerBlock;
      const long last = std::min(n_walkers, first + kWalkersPerBlock);
      for (long w = first; w < last; ++w) {
        long n = 1;
        long s = 0;
        while (true) {
          const std::size_t i = static_cast<std::size_t>(n);
          double wait = 1.0;
          if (leave[i] < 1.0) wait += std::floor(std::log(uniform_open(gen)) / log_stay[i]);
          if (wait > static_cast<double>(s_max - s)) break;  // censored
          s += static_cast<long>(wait);
          if (n == size) {
            n = size - 1;
          } else {
            n += (gen() >> 63) ? 1 : -1;
          }
          if (n == 0) {
            ++histogram[static_cast<std::size_t>(s)];
            break;
          }
        }
      }
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }

  ReturnSeries series;
  series.s_max = s_max;
  series.p.assign(static_cast<std::size_t>(s_max) + 1, 0.0);
  std::uint64_t captured = 0;
  for (long s = 1; s <= s_max; ++s) {
    std::uint64_t c = 0;
    for (const auto& histogram : counts) c += histogram[static_cast<std::size_t>(s)];
    captured += c;
    series.p[static_cast<std::size_t>(s)] =
        static_cast<double>(c) / static_cast<double>(n_walkers);
  }
  series.captured_mass = static_cast<double>(captured) / static_cast<double>(n_walkers);
  return series;
}

}  // namespace rrw::chain
