#pragma once

/*
  Seeded Monte Carlo oracle for M/D/infinity busy periods and busy cycles.

  Sample i draws from its own generator keyed by mix_seed(seed, i), so the
  output is a pure function of (seed, n_samples), independent of evaluation
  order. A run is therefore reproducible bit for bit and could be sharded
  without changing a single sample.
*/

#include "qtail/mdinf.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qtail::sim {

// splitmix64 (Steele, Lea and Flood's SplittableRandom finalizer).
// Small state, full 64-bit period over the increment sequence, and good
// enough avalanche to key per-sample streams from consecutive indices.
class splitmix64 {
public:
    explicit splitmix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1]: 53 random bits shifted into the mantissa, plus one
    // ulp so 0 is excluded and log(u) stays finite.
    double next_unit() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Deterministic per-index sub-seed: one splitmix64 step from a state offset
// by index golden-ratio increments.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    splitmix64 g(seed + index * 0x9E3779B97F4A7C15ull);
    return g.next();
}

inline double exponential_sample(splitmix64& rng, double rate) {
    return -std::log(rng.next_unit()) / rate;
}

// One busy period: the first service runs [0, a]; each arrival landing
// before the current latest departure extends it by its own service.
// Returns exactly a (bitwise) when no arrival lands inside the first
// service, which is what makes empirical atom detection exact.
double simulate_busy_period(const mdinf::queue_params& q, std::uint64_t sample_seed);

// One busy cycle: independent exponential idle period plus a busy period,
// on decorrelated sub-seeds of sample_seed.
double simulate_busy_cycle(const mdinf::queue_params& q, std::uint64_t sample_seed);

struct sim_config {
    mdinf::queue_params params;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

class empirical_cdf {
public:
    empirical_cdf(std::vector<double> samples, std::uint64_t seed_echo);

    // (# samples <= t) / n; right-continuous and nondecreasing.
    double evaluate(double t) const;
    // Fraction of samples exactly equal to x (atom estimation).
    double mass_at(double x) const;
    double mean() const;
    double variance() const;  // unbiased, n - 1 denominator
    std::size_t size() const noexcept { return samples_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<double>& samples() const noexcept { return samples_; }

private:
    std::vector<double> samples_;  // sorted ascending
    std::uint64_t seed_;
};

empirical_cdf run_simulation(const sim_config& config, mdinf::target_kind kind);

// Dvoretzky-Kiefer-Wolfowitz band half-width: with probability 1 - alpha
// the empirical CDF stays within sqrt(ln(2/alpha) / (2n)) of the truth.
double dkw_epsilon(std::size_t n, double alpha);

} // namespace qtail::sim
