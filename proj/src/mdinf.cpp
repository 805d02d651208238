#include "qtail/mdinf.hpp"
#include "qtail/errors.hpp"
#include "qtail/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qtail::mdinf {
namespace {

// Raw transform kernels, shared so the busy-cycle product evaluates the
// factors through the exact same arithmetic path as the factors alone.
std::complex<double> busy_period_value(double lambda, double a,
                                       std::complex<double> s) {
    const std::complex<double> den = lambda * std::exp(-(s + lambda) * a) + s;
    if (std::abs(den) < 1e-300) {
        throw numeric_error("busy-period transform: singular denominator");
    }
    return 1.0 + (s - (s + lambda) * s / den) / lambda;
}

std::complex<double> idle_value(double lambda, std::complex<double> s) {
    const std::complex<double> den = lambda + s;
    if (std::abs(den) < 1e-300) {
        throw numeric_error("idle transform: pole at s = -lambda");
    }
    return lambda / den;
}

double binomial(int n, int p) {
    double out = 1.0;
    for (int i = 1; i <= p; ++i) {
        out *= static_cast<double>(n - p + i) / static_cast<double>(i);
    }
    return out;
}

} // namespace

queue_params::queue_params(double lambda_in, double service_in)
    : lambda(lambda_in), service(service_in), rho(lambda_in * service_in) {
    if (!(std::isfinite(lambda)) || !(lambda > 0.0)) {
        throw domain_error("lambda", "arrival rate must be positive and finite");
    }
    if (!(std::isfinite(service)) || service < 0.0) {
        throw domain_error("service", "service time must be nonnegative and finite");
    }
}

pab::transform_evaluator busy_period_transform(const queue_params& q) {
    if (!(q.service > 0.0)) {
        throw domain_error("service",
                           "busy-period transform needs service > 0; at zero service "
                           "the busy period is degenerate at 0");
    }
    const double lambda = q.lambda;
    const double a = q.service;
    return pab::transform_evaluator(
        "busy-period", [lambda, a](std::complex<double> s) {
            return busy_period_value(lambda, a, s);
        });
}

pab::transform_evaluator idle_transform(const queue_params& q) {
    const double lambda = q.lambda;
    return pab::transform_evaluator("idle", [lambda](std::complex<double> s) {
        return idle_value(lambda, s);
    });
}

pab::transform_evaluator busy_cycle_transform(const queue_params& q) {
    const double lambda = q.lambda;
    const double a = q.service;
    if (a == 0.0) {
        return pab::transform_evaluator("busy-cycle",
                                        [lambda](std::complex<double> s) {
                                            return idle_value(lambda, s);
                                        });
    }
    return pab::transform_evaluator(
        "busy-cycle", [lambda, a](std::complex<double> s) {
            return idle_value(lambda, s) * busy_period_value(lambda, a, s);
        });
}

moment_set busy_period_moments(const queue_params& q) {
    moment_set m;
    m.mean = std::expm1(q.rho) / q.lambda;
    m.variance = (std::exp(2.0 * q.rho) - 2.0 * q.rho * std::exp(q.rho) - 1.0) /
                 (q.lambda * q.lambda);
    m.raw = {m.mean, m.variance + m.mean * m.mean};
    return m;
}

moment_set busy_cycle_moments(const queue_params& q) {
    moment_set m;
    m.mean = std::exp(q.rho) / q.lambda;
    m.variance = (std::exp(2.0 * q.rho) - 2.0 * q.rho * std::exp(q.rho)) /
                 (q.lambda * q.lambda);
    m.raw = {m.mean, m.variance + m.mean * m.mean};
    return m;
}

moment_set busy_period_moment_recursion(const queue_params& q, int max_order) {
    if (max_order < 1 || max_order > 10) {
        throw domain_error("order", "recursion order must lie in [1, 10]");
    }
    if (!(q.service > 0.0)) {
        throw domain_error("service", "moment recursion needs service > 0");
    }
    const double lambda = q.lambda;
    const double a = q.service;
    const double e_rho = std::exp(q.rho);

    // c[p] = p-th derivative at 0 of the no-covering probability kernel:
    // c[p] = (-1)^p lambda Int_0^a t^p e^{-lambda t} dt. Quadrature keeps
    // this path independent of the closed-form moment expressions.
    std::vector<double> c(static_cast<std::size_t>(max_order));
    for (int p = 0; p < max_order; ++p) {
        const auto integrand = [lambda, p](double t) {
            return std::pow(t, static_cast<double>(p)) * std::exp(-lambda * t);
        };
        const double integral = adaptive_simpson(integrand, 0.0, a, 1e-12).value;
        c[static_cast<std::size_t>(p)] = (p % 2 == 0 ? 1.0 : -1.0) * lambda * integral;
    }

    // E[B^n] = (-1)^{n+1} { (e^rho/lambda) n c[n-1]
    //                       - e^rho sum_{p=1..n-1} (-1)^{n-p} C(n,p) E[B^{n-p}] c[p] }
    std::vector<double> raw(static_cast<std::size_t>(max_order));
    for (int n = 1; n <= max_order; ++n) {
        compensated_sum inner;
        for (int p = 1; p <= n - 1; ++p) {
            const double parity = ((n - p) % 2 == 0) ? 1.0 : -1.0;
            inner.add(parity * binomial(n, p) * raw[static_cast<std::size_t>(n - p - 1)] *
                      c[static_cast<std::size_t>(p)]);
        }
        const double sign = (n % 2 == 0) ? -1.0 : 1.0;
        const double value =
            sign * ((e_rho / lambda) * static_cast<double>(n) *
                        c[static_cast<std::size_t>(n - 1)] -
                    e_rho * inner.value());
        raw[static_cast<std::size_t>(n - 1)] = value;
    }

    moment_set m;
    m.raw = raw;
    m.mean = raw[0];
    m.variance = max_order >= 2 ? raw[1] - raw[0] * raw[0]
                                : std::numeric_limits<double>::quiet_NaN();
    return m;
}

double busy_cycle_moment_from_busy_period(const queue_params& q,
                                          const moment_set& busy_raw, int n) {
    if (n < 1) {
        throw domain_error("order", "moment order must be positive");
    }
    if (busy_raw.raw.size() < static_cast<std::size_t>(n)) {
        throw domain_error("order",
                           "busy-period raw moments through the requested order are required");
    }
    // E[Z^n] = sum_{p=0..n} C(n,p) p!/lambda^p E[B^{n-p}], E[B^0] = 1.
    compensated_sum acc;
    double idle_factor = 1.0;  // p!/lambda^p, built incrementally
    for (int p = 0; p <= n; ++p) {
        if (p > 0) {
            idle_factor *= static_cast<double>(p) / q.lambda;
        }
        const double busy_moment =
            (n - p == 0) ? 1.0 : busy_raw.raw[static_cast<std::size_t>(n - p - 1)];
        acc.add(binomial(n, p) * idle_factor * busy_moment);
    }
    return acc.value();
}

double chebyshev_bound(const queue_params& q, double t) {
    const double e_rho = std::exp(q.rho);
    const double numerator =
        std::exp(2.0 * q.rho) - 2.0 * q.rho * e_rho - 1.0;
    const double den = 1.0 + q.lambda * t - e_rho;
    if (den == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 1.0 - numerator / (den * den);
}

bool chebyshev_bound_valid(const queue_params& q, double t) {
    const moment_set m = busy_period_moments(q);
    return chebyshev_bound_valid_from_moments(m.mean, m.variance, t);
}

double chebyshev_bound_from_moments(double mean, double variance, double t) {
    const double den = t - mean;
    if (den == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 1.0 - variance / (den * den);
}

bool chebyshev_bound_valid_from_moments(double mean, double variance, double t) {
    return t > mean + std::max(mean, std::sqrt(variance));
}

double atom_bound(const queue_params& q, double t) {
    return t < q.service ? 0.0 : std::exp(-q.rho);
}

window truncation_window(const queue_params& q, double delta_p, int l_exponent,
                         target_kind kind) {
    if (!(delta_p > 0.0) || !(delta_p < 0.5)) {
        throw domain_error("delta_p", "delta_p must lie in the open interval (0, 0.5)");
    }
    if (l_exponent < 1) {
        throw domain_error("l_exponent", "window safety exponent must be >= 1");
    }
    const double safety = std::pow(10.0, l_exponent) / delta_p;
    window w{q.service, 0.0};
    if (kind == target_kind::busy_period) {
        const double e_rho = std::exp(q.rho);
        const double var_numerator =
            std::exp(2.0 * q.rho) - 2.0 * q.rho * e_rho - 1.0;
        if (!(var_numerator > 0.0)) {
            throw domain_error("service",
                               "busy-period window undefined at zero traffic intensity");
        }
        w.upper = (e_rho - 1.0 + std::sqrt(var_numerator * safety)) / q.lambda;
    } else {
        const moment_set m = busy_cycle_moments(q);
        w.upper = m.mean + std::sqrt(m.variance * safety);
    }
    return w;
}

distribution_table compute_table(const queue_params& q, target_kind kind,
                                 double delta_t, double delta_p, int l_exponent,
                                 std::span<const double> ts, bool with_bounds) {
    const window w = truncation_window(q, delta_p, l_exponent, kind);
    pab::inversion_spec spec;
    spec.delta_t = delta_t;
    spec.delta_p = delta_p;
    spec.lower = w.lower;
    spec.upper = w.upper;

    const pab::transform_evaluator transform = kind == target_kind::busy_period
                                                   ? busy_period_transform(q)
                                                   : busy_cycle_transform(q);
    const std::vector<pab::tail_estimate> estimates =
        pab::invert_grid(transform, ts, spec);

    distribution_table table{q, kind, spec, pab::derive_params(spec), {}};
    table.rows.reserve(estimates.size());

    const moment_set cycle_moments =
        kind == target_kind::busy_cycle ? busy_cycle_moments(q) : moment_set{};
    const bool exponential_case = kind == target_kind::busy_cycle && q.service == 0.0;

    for (const pab::tail_estimate& est : estimates) {
        table_row row;
        row.t = est.t;
        row.cdf = est.cdf;
        row.tau = est.tau;
        row.clamped = est.clamped;
        row.atom_adjacent = std::abs(est.t - q.service) <= delta_t * (1.0 + 1e-12);
        if (with_bounds) {
            if (kind == target_kind::busy_period) {
                row.bound_chebyshev = chebyshev_bound(q, est.t);
                row.bound_chebyshev_valid = chebyshev_bound_valid(q, est.t);
                row.bound_atom = atom_bound(q, est.t);
            } else {
                row.bound_chebyshev = chebyshev_bound_from_moments(
                    cycle_moments.mean, cycle_moments.variance, est.t);
                row.bound_chebyshev_valid = chebyshev_bound_valid_from_moments(
                    cycle_moments.mean, cycle_moments.variance, est.t);
                // Z = I + B has no atom (the idle part is continuous), so the
                // trivial lower bound 0 keeps the column well defined.
                row.bound_atom = 0.0;
            }
        }
        if (exponential_case) {
            row.exact_exponential = -std::expm1(-q.lambda * est.t);
        }
        table.rows.push_back(row);
    }
    return table;
}

moment_set moments_from_table(const distribution_table& table, double atom_at,
                              double atom_mass) {
    if (table.rows.size() < 2) {
        throw domain_error("table", "moment recovery needs at least two rows");
    }
    if (!(atom_mass >= 0.0) || atom_mass > 1.0) {
        throw domain_error("atom_mass", "atom mass must lie in [0, 1]");
    }

    std::vector<std::pair<double, double>> pts;
    pts.reserve(table.rows.size());
    for (const table_row& row : table.rows) {
        pts.emplace_back(row.t, row.cdf);
    }

    if (atom_mass > 0.0) {
        std::size_t nearest = 0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (std::abs(pts[i].first - atom_at) <
                std::abs(pts[nearest].first - atom_at)) {
                nearest = i;
            }
        }
        pts[nearest].second = atom_mass;
    }

    const double slack = 2.0 * table.spec.delta_p;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].second < pts[i - 1].second - slack) {
            throw domain_error("table",
                               "cdf column decreases beyond the 2 delta_p tolerance");
        }
    }

    // E[X] = Int (1 - F); E[X^2] = Int 2 t (1 - F). Head segment [0, t0]
    // contributes with survival 1 (the table starts where mass begins).
    compensated_sum m1;
    compensated_sum m2;
    const double t0 = pts.front().first;
    m1.add(t0);
    m2.add(t0 * t0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double dt = pts[i].first - pts[i - 1].first;
        const double s_prev = 1.0 - pts[i - 1].second;
        const double s_cur = 1.0 - pts[i].second;
        m1.add(0.5 * dt * (s_prev + s_cur));
        m2.add(0.5 * dt *
               (2.0 * pts[i - 1].first * s_prev + 2.0 * pts[i].first * s_cur));
    }

    moment_set m;
    m.mean = m1.value();
    m.raw = {m.mean, m2.value()};
    m.variance = m.raw[1] - m.mean * m.mean;
    return m;
}

} // namespace qtail::mdinf
