#include "qtail/simulate.hpp"
#include "qtail/errors.hpp"
#include "qtail/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace qtail::sim {

double simulate_busy_period(const mdinf::queue_params& q,
                            std::uint64_t sample_seed) {
    if (q.service == 0.0) {
        return 0.0;
    }
    splitmix64 rng(sample_seed);
    double latest_departure = q.service;  // untouched iff no arrival overlaps
    double arrival = 0.0;
    for (;;) {
        arrival += exponential_sample(rng, q.lambda);
        if (arrival > latest_departure) {
            return latest_departure;
        }
        latest_departure = arrival + q.service;
    }
}

double simulate_busy_cycle(const mdinf::queue_params& q,
                           std::uint64_t sample_seed) {
    splitmix64 idle_rng(mix_seed(sample_seed, 1));
    const double idle = exponential_sample(idle_rng, q.lambda);
    return idle + simulate_busy_period(q, mix_seed(sample_seed, 2));
}

empirical_cdf::empirical_cdf(std::vector<double> samples, std::uint64_t seed_echo)
    : samples_(std::move(samples)), seed_(seed_echo) {
    if (samples_.empty()) {
        throw domain_error("samples", "empirical CDF needs at least one sample");
    }
    std::sort(samples_.begin(), samples_.end());
}

double empirical_cdf::evaluate(double t) const {
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), t);
    return static_cast<double>(it - samples_.begin()) /
           static_cast<double>(samples_.size());
}

double empirical_cdf::mass_at(double x) const {
    const auto range = std::equal_range(samples_.begin(), samples_.end(), x);
    return static_cast<double>(range.second - range.first) /
           static_cast<double>(samples_.size());
}

double empirical_cdf::mean() const {
    compensated_sum acc;
    for (const double s : samples_) {
        acc.add(s);
    }
    return acc.value() / static_cast<double>(samples_.size());
}

double empirical_cdf::variance() const {
    if (samples_.size() < 2) {
        throw domain_error("samples", "variance needs at least two samples");
    }
    const double m = mean();
    compensated_sum acc;
    for (const double s : samples_) {
        const double d = s - m;
        acc.add(d * d);
    }
    return acc.value() / static_cast<double>(samples_.size() - 1);
}

empirical_cdf run_simulation(const sim_config& config, mdinf::target_kind kind) {
    if (config.n_samples < 1) {
        throw domain_error("samples", "at least one sample is required");
    }
    std::vector<double> draws;
    draws.reserve(config.n_samples);
    for (std::size_t i = 0; i < config.n_samples; ++i) {
        const std::uint64_t sub_seed = mix_seed(config.seed, i);
        draws.push_back(kind == mdinf::target_kind::busy_period
                            ? simulate_busy_period(config.params, sub_seed)
                            : simulate_busy_cycle(config.params, sub_seed));
    }
    return empirical_cdf(std::move(draws), config.seed);
}

double dkw_epsilon(std::size_t n, double alpha) {
    if (n < 1) {
        throw domain_error("samples", "band needs at least one sample");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw domain_error("alpha", "confidence parameter must lie in (0, 1)");
    }
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

} // namespace qtail::sim
