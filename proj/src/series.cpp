#include "qtail/mdinf.hpp"
#include "qtail/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace qtail::mdinf {

busy_period_series::busy_period_series(const queue_params& q,
                                       double tail_epsilon, double grid_step,
                                       double t_max)
    : service_(q.service), step_(grid_step) {
    if (!(q.service > 0.0)) {
        throw domain_error("service", "the series decomposition needs service > 0");
    }
    if (!(tail_epsilon > 0.0) || !(tail_epsilon < 1.0)) {
        throw domain_error("tail_epsilon", "tail_epsilon must lie in (0, 1)");
    }
    if (!(std::isfinite(grid_step)) || !(grid_step > 0.0)) {
        throw domain_error("grid_step", "grid_step must be positive and finite");
    }
    const double ratio = q.service / grid_step;
    const long long m_signed = std::llround(ratio);
    if (m_signed < 1 || std::abs(ratio - static_cast<double>(m_signed)) >
                            1e-6 * static_cast<double>(m_signed)) {
        throw domain_error("grid_step",
                           "grid_step must divide the service time exactly so the "
                           "atom lands on a grid node");
    }
    if (!(std::isfinite(t_max)) || t_max < 0.0) {
        throw domain_error("t", "series evaluation horizon must be finite and nonnegative");
    }
    const std::size_t m = static_cast<std::size_t>(m_signed);

    // Retain orders 0..n_max of the geometric mixture; the dropped weight
    // is exactly (1 - e^{-rho})^(n_max + 1).
    const double geo = -std::expm1(-q.rho);
    int n_max = 0;
    double dropped = geo;
    while (dropped >= tail_epsilon && n_max < 100000) {
        ++n_max;
        dropped *= geo;
    }
    if (dropped >= tail_epsilon) {
        throw numeric_error("series truncation did not reach the requested tail "
                            "mass within 100000 mixture components");
    }
    n_max_ = n_max;
    neglected_ = dropped;

    // Grid nodes sit at a + j*step for j = 0..cells. Component n spreads
    // over at most n*m cells past the atom, so the larger of the two
    // horizons below is never needed.
    const double span = std::max(0.0, t_max - q.service);
    const double cover = std::ceil(span / grid_step) + 1.0;
    const double support = static_cast<double>(n_max_) * static_cast<double>(m);
    const double cells_d = std::min(cover, support);
    if (cells_d > 5e7) {
        throw numeric_error("series grid is too large; raise grid_step or lower t_max");
    }
    const std::size_t cells = std::max<std::size_t>(1, static_cast<std::size_t>(cells_d));
    support_full_ = support <= cover;

    // One truncated-exponential step distribution on the grid. Cell mass
    // goes to the cell's right edge, so every partial sum under-counts and
    // the assembled CDF is a conservative lower envelope, exact at t = a.
    std::vector<double> step_mass(m + 1, 0.0);
    for (std::size_t i = 1; i <= m; ++i) {
        const double left = std::exp(-q.lambda * static_cast<double>(i - 1) * grid_step);
        const double right = std::exp(-q.lambda * static_cast<double>(i) * grid_step);
        step_mass[i] = (left - right) / geo;
    }

    std::vector<double> mass(cells + 1, 0.0);
    std::vector<double> component{1.0};  // n = 0: all mass at the atom node
    double weight = std::exp(-q.rho);
    mass[0] += weight;
    for (int n = 1; n <= n_max_; ++n) {
        weight *= geo;
        const std::size_t next_len = std::min(component.size() - 1 + m, cells) + 1;
        std::vector<double> next(next_len, 0.0);
        for (std::size_t i = 0; i < component.size(); ++i) {
            const double ci = component[i];
            if (ci == 0.0) {
                continue;
            }
            const std::size_t j_hi = std::min(next_len - 1, i + m);
            for (std::size_t j = i + 1; j <= j_hi; ++j) {
                next[j] += ci * step_mass[j - i];
            }
        }
        component.swap(next);
        for (std::size_t j = 0; j < component.size(); ++j) {
            mass[j] += weight * component[j];
        }
    }

    cumulative_.resize(mass.size());
    double running = 0.0;
    for (std::size_t j = 0; j < mass.size(); ++j) {
        running += mass[j];
        cumulative_[j] = running;
    }
}

double busy_period_series::cdf(double t) const {
    if (!(std::isfinite(t)) || t < 0.0) {
        throw domain_error("t", "series_cdf: t must be finite and nonnegative");
    }
    if (t < service_) {
        return 0.0;
    }
    const double x = (t - service_) / step_;
    if (x >= static_cast<double>(cumulative_.size())) {
        if (support_full_) {
            return cumulative_.back();
        }
        throw domain_error("t", "series_cdf: t lies beyond the prepared grid");
    }
    std::size_t j = static_cast<std::size_t>(x);
    // A query meant to hit a node exactly can land a hair below it in
    // floating point; snap up so node queries read the node's value.
    if (x - static_cast<double>(j) > 1.0 - 1e-9) {
        ++j;
    }
    if (j >= cumulative_.size()) {
        if (support_full_) {
            return cumulative_.back();
        }
        throw domain_error("t", "series_cdf: t lies beyond the prepared grid");
    }
    return cumulative_[j];
}

series_cdf_result series_cdf(const queue_params& q, double t,
                             double tail_epsilon, double grid_step) {
    const busy_period_series engine(q, tail_epsilon, grid_step, t);
    return {engine.cdf(t), engine.n_max(), engine.neglected_weight()};
}

series_cdf_result series_cdf(const queue_params& q, double t) {
    return series_cdf(q, t, 1e-6, q.service / 512.0);
}

} // namespace qtail::mdinf
