#include "qtail/inversion.hpp"
#include "qtail/errors.hpp"
#include "qtail/numeric.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qtail::pab {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// exp(-x) underflows to zero below this exponent; once a weight hits zero
// every later weight is zero too and the sum may stop.
constexpr double underflow_exponent = -745.0;

// e^{j n theta} with the angle reduced mod 2 pi before the trig calls.
// Iterated complex multiplication drifts by ~n*eps in phase; reduction
// keeps each term accurate even at n in the millions.
std::complex<double> unit_phase(std::int64_t n, double theta) {
    const double angle = std::fmod(static_cast<double>(n) * theta, two_pi);
    return {std::cos(angle), std::sin(angle)};
}

std::complex<double> eval_term(const transform_evaluator& transform,
                               std::int64_t n, double omega) {
    const std::complex<double> s{0.0, omega * static_cast<double>(n)};
    std::complex<double> value;
    try {
        value = transform(s);
    } catch (const std::exception& e) {
        throw evaluation_error(n, s,
                               transform.label() + ": transform evaluation failed at term " +
                                   std::to_string(n) + ": " + e.what());
    }
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        throw evaluation_error(n, s,
                               transform.label() + ": transform returned a non-finite value at term " +
                                   std::to_string(n));
    }
    return value;
}

// Index of the last term whose damping weight is nonzero.
std::int64_t effective_terms(const derived_params& dp) {
    const double dw = dp.d * dp.omega;
    if (dw <= 0.0) {
        return dp.n_terms;
    }
    const double cutoff = std::sqrt(2.0 * -underflow_exponent) / dw;
    if (cutoff >= static_cast<double>(dp.n_terms)) {
        return dp.n_terms;
    }
    return static_cast<std::int64_t>(cutoff) + 1;
}

tail_estimate invert_at(const transform_evaluator& transform,
                        const std::complex<double>* cached_terms, double t,
                        const inversion_spec& spec, const derived_params& dp) {
    if (!(std::isfinite(t)) || t < 0.0) {
        throw domain_error("t", "invert_tail: t must be finite and nonnegative");
    }

    const double span = spec.upper - spec.lower + 2.0 * spec.delta_t;
    const double theta_beta = (spec.upper + spec.delta_t) * dp.omega;
    const double theta_gamma = t * dp.omega;
    const double dw = dp.d * dp.omega;

    compensated_sum acc;
    acc.add((spec.upper - t + spec.delta_t) / span);
    for (std::int64_t n = 1; n <= dp.n_terms; ++n) {
        const double en = dw * static_cast<double>(n);
        const double exponent = -0.5 * en * en;
        if (exponent < underflow_exponent) {
            break; // weight underflowed to 0; all later weights are smaller
        }
        const double weight =
            std::exp(exponent) / (std::numbers::pi * static_cast<double>(n));
        const std::complex<double> lv =
            cached_terms ? cached_terms[n - 1] : eval_term(transform, n, dp.omega);
        const std::complex<double> osc =
            unit_phase(n, theta_beta) - unit_phase(n, theta_gamma);
        const double term = weight * std::imag(osc * lv);
        if (!std::isfinite(term)) {
            throw numeric_error(transform.label() +
                                ": non-finite inversion term at n = " + std::to_string(n));
        }
        acc.add(term);
    }

    tail_estimate out;
    out.t = t;
    out.tau = acc.value();
    if (!std::isfinite(out.tau)) {
        throw numeric_error(transform.label() + ": inversion sum is non-finite");
    }
    const double clamped_tau = std::min(1.0, std::max(0.0, out.tau));
    out.clamped = clamped_tau != out.tau;
    out.cdf = 1.0 - clamped_tau;
    out.spec = spec;
    out.derived = dp;
    return out;
}

} // namespace

transform_evaluator::transform_evaluator(std::string label, transform_fn fn)
    : label_(std::move(label)), fn_(std::move(fn)) {
    if (!fn_) {
        throw domain_error("transform", label_ + ": transform callable is empty");
    }
    const std::complex<double> at_zero = fn_(std::complex<double>(0.0, 0.0));
    if (!(std::abs(at_zero - std::complex<double>(1.0, 0.0)) <= 1e-9)) {
        throw domain_error("transform",
                           label_ + ": L(0) must equal 1 for a proper distribution");
    }
    // |L(jy)| <= 1 holds for every probability transform; catching a
    // violation here is far cheaper than a silently wrong inversion.
    for (const double y : {0.25, 1.0, 4.0, 16.0, 256.0}) {
        const std::complex<double> v = fn_(std::complex<double>(0.0, y));
        if (!(std::abs(v) <= 1.0 + 1e-9)) {
            throw domain_error("transform",
                               label_ + ": |L(jy)| exceeds 1, not a probability transform");
        }
    }
}

derived_params derive_params(const inversion_spec& spec) {
    if (!(std::isfinite(spec.delta_t)) || !(spec.delta_t > 0.0)) {
        throw domain_error("delta_t", "delta_t must be positive and finite");
    }
    if (!(spec.delta_p > 0.0) || !(spec.delta_p < 0.5)) {
        throw domain_error("delta_p", "delta_p must lie in the open interval (0, 0.5)");
    }
    if (!(std::isfinite(spec.lower)) || spec.lower < 0.0) {
        throw domain_error("lower", "window start must be finite and nonnegative");
    }
    if (!(std::isfinite(spec.upper)) || !(spec.upper > spec.lower)) {
        throw domain_error("upper", "window end must be finite and exceed the start");
    }

    derived_params dp;
    dp.k = std::log(2.0 / spec.delta_p);
    dp.d = spec.delta_t / std::sqrt(2.0 * dp.k);
    dp.omega = two_pi / (spec.upper - spec.lower + 2.0 * spec.delta_t);
    const double raw_n = 2.0 * dp.k / (dp.omega * spec.delta_t);
    if (!std::isfinite(raw_n) || raw_n >= 9.0e15) {
        throw numeric_error("derived term count overflows; window far too wide "
                            "for the requested accuracy");
    }
    dp.n_terms = static_cast<std::int64_t>(std::ceil(raw_n));
    if (dp.n_terms < 1) {
        dp.n_terms = 1;
    }
    return dp;
}

tail_estimate invert_tail(const transform_evaluator& transform, double t,
                          const inversion_spec& spec) {
    const derived_params dp = derive_params(spec);
    return invert_at(transform, nullptr, t, spec, dp);
}

std::vector<tail_estimate> invert_grid(const transform_evaluator& transform,
                                       std::span<const double> ts,
                                       const inversion_spec& spec) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!std::isfinite(ts[i])) {
            throw domain_error("t", "invert_grid: grid points must be finite");
        }
        if (i > 0 && !(ts[i] > ts[i - 1])) {
            throw domain_error("t", "invert_grid: grid must be strictly increasing");
        }
    }

    std::vector<tail_estimate> out;
    if (ts.empty()) {
        return out;
    }
    const derived_params dp = derive_params(spec);

    // Transform values depend on n alone, not on t, so one pass feeds the
    // whole grid. Values are the exact doubles invert_tail would compute.
    std::vector<std::complex<double>> cache;
    const std::complex<double>* cached = nullptr;
    if (ts.size() > 1) {
        const std::int64_t live = effective_terms(dp);
        cache.reserve(static_cast<std::size_t>(live));
        for (std::int64_t n = 1; n <= live; ++n) {
            cache.push_back(eval_term(transform, n, dp.omega));
        }
        cached = cache.data();
    }

    out.reserve(ts.size());
    for (const double t : ts) {
        try {
            out.push_back(invert_at(transform, cached, t, spec, dp));
        } catch (const domain_error&) {
            throw;
        } catch (const numeric_error& e) {
            throw numeric_error(std::string(e.what()) + " (at grid point t = " +
                                std::to_string(t) + ")");
        }
    }
    return out;
}

} // namespace qtail::pab
