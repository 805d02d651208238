#pragma once

/*
  Analytics for the M/D/infinity queue: Poisson arrivals at rate lambda,
  deterministic service time a, infinitely many servers (rho = lambda a).

  A busy period B starts when an arrival finds the system empty and ends
  when the system next empties; the busy cycle Z = I + B prepends the
  exponential(lambda) idle period I, independent of B. B is supported on
  [a, infinity) with an atom of mass e^{-rho} exactly at a (the case of no
  arrival during the first service). Transform and moment identities for
  infinite-server busy periods go back to Takacs, "Introduction to the
  Theory of Queues" (1962); everything here is their specialization to
  deterministic service:

      busy period   B(s) = 1 + (s - (s + lambda) s / (lambda e^{-(s+lambda)a} + s)) / lambda
      idle period   I(s) = lambda / (lambda + s)
      busy cycle    Z(s) = I(s) B(s)

      E[B] = (e^rho - 1)/lambda        VAR[B] = (e^{2 rho} - 2 rho e^rho - 1)/lambda^2
      E[Z] = e^rho/lambda              VAR[Z] = (e^{2 rho} - 2 rho e^rho)/lambda^2
*/

#include "qtail/inversion.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace qtail::mdinf {

struct queue_params {
    queue_params(double lambda_in, double service_in);

    double lambda;   // arrival rate, > 0
    double service;  // deterministic service time a, >= 0
    double rho;      // lambda * service
};

enum class target_kind { busy_period, busy_cycle };

struct moment_set {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> raw;  // raw[k] = E[X^(k+1)]
};

// Laplace-Stieltjes transform evaluators (registration-checked).
// busy_period_transform requires service > 0: with zero service the busy
// period is degenerate at 0 and the step CDF should be used directly.
pab::transform_evaluator busy_period_transform(const queue_params& q);
pab::transform_evaluator idle_transform(const queue_params& q);
// Pointwise product of the two factors, same arithmetic path; for
// service == 0 the busy-period factor is identically 1 and is dropped.
pab::transform_evaluator busy_cycle_transform(const queue_params& q);

// Closed-form moments, orders 1..2.
moment_set busy_period_moments(const queue_params& q);
moment_set busy_cycle_moments(const queue_params& q);

// Raw busy-period moments E[B^n], n = 1..max_order (max 10), from the
// derivative recursion seeded by C^(p)(0) = (-1)^p lambda Int_0^a t^p
// e^{-lambda t} dt, evaluated by adaptive quadrature at 1e-12 relative
// tolerance. Deliberately independent of the closed forms it validates.
moment_set busy_period_moment_recursion(const queue_params& q, int max_order);

// E[Z^n] = sum_{p=0..n} C(n,p) p!/lambda^p E[B^(n-p)], with E[B^0] = 1.
// busy_raw must hold busy-period raw moments through order n.
double busy_cycle_moment_from_busy_period(const queue_params& q,
                                          const moment_set& busy_raw, int n);

// One-sided Chebyshev lower bound for the busy-period CDF,
//     1 - (e^{2 rho} - 2 rho e^rho - 1) / (1 + lambda t - e^rho)^2.
// Vacuous (possibly very negative) outside its validity region; yields
// -infinity at the exact denominator pole.
double chebyshev_bound(const queue_params& q, double t);
// True where the bound provably lies at or below the CDF:
//     t > (e^rho - 1 + max(e^rho - 1, sqrt(e^{2 rho} - 2 rho e^rho - 1)))/lambda.
bool chebyshev_bound_valid(const queue_params& q, double t);
// Same bound driven by arbitrary first/second moments (used for the busy
// cycle, whose table columns need the analogous one-sided bound).
double chebyshev_bound_from_moments(double mean, double variance, double t);
bool chebyshev_bound_valid_from_moments(double mean, double variance, double t);

// Atom lower bound: 0 below a, e^{-rho} from a on.
double atom_bound(const queue_params& q, double t);

struct window {
    double lower;
    double upper;
};

// Truncation window [L, U] for the inversion. L = a for both kinds; U puts
// all but about delta_p * 10^-l of the mass inside the window via the
// Chebyshev tail estimate on the target's mean and variance:
//     busy period  U = (e^rho - 1 + sqrt((e^{2 rho} - 2 rho e^rho - 1) * 10^l / delta_p))/lambda
//     busy cycle   U = E[Z] + sqrt(VAR[Z] * 10^l / delta_p)
window truncation_window(const queue_params& q, double delta_p, int l_exponent,
                         target_kind kind);

struct series_cdf_result {
    double value;
    int n_max;                // last retained convolution order
    double neglected_weight;  // geometric mass of the dropped orders
};

// Busy-period CDF by an independent route: the busy period decomposes as a
// geometric mixture over n = 0, 1, 2, ... of (deterministic a) + (n-fold
// convolution of exponentials truncated to [0, a]), with weights
// e^{-rho}(1 - e^{-rho})^n. The convolutions run on a uniform grid whose
// step must divide a exactly so the atom sits on a grid node; per-cell
// masses are assigned to the cell's right edge, making the result a
// conservative underestimate that is exact at t = a.
class busy_period_series {
public:
    busy_period_series(const queue_params& q, double tail_epsilon,
                       double grid_step, double t_max);

    double cdf(double t) const;
    int n_max() const noexcept { return n_max_; }
    double neglected_weight() const noexcept { return neglected_; }
    double grid_step() const noexcept { return step_; }

private:
    double service_;
    double step_;
    int n_max_;
    double neglected_;
    bool support_full_;               // grid covers the whole retained support
    std::vector<double> cumulative_;  // cumulative CDF at nodes a + i*step
};

series_cdf_result series_cdf(const queue_params& q, double t,
                             double tail_epsilon, double grid_step);
// Defaults: tail_epsilon 1e-6, grid_step a/512.
series_cdf_result series_cdf(const queue_params& q, double t);

struct table_row {
    double t = 0.0;
    double cdf = 0.0;
    double tau = 0.0;
    bool clamped = false;
    bool atom_adjacent = false;  // |t - a| <= delta_t: the atom blurs these
    std::optional<double> bound_chebyshev;
    std::optional<bool> bound_chebyshev_valid;
    std::optional<double> bound_atom;
    std::optional<double> exact_exponential;  // busy cycle with a = 0 only
};

struct distribution_table {
    queue_params params;
    target_kind kind;
    pab::inversion_spec spec;
    pab::derived_params derived;
    std::vector<table_row> rows;
};

// Window selection + grid inversion + optional bound columns in one step.
distribution_table compute_table(const queue_params& q, target_kind kind,
                                 double delta_t, double delta_p, int l_exponent,
                                 std::span<const double> ts, bool with_bounds);

// Mean and variance recovered from a numeric CDF table: trapezoidal
// integration of the survival function for E[X] (integrand 2t(1-F) for
// E[X^2]), plus a flat head segment on [0, t0] where the CDF is taken as 0.
// When atom_mass > 0 the row nearest atom_at is first corrected to that
// exact mass. Rows must be nondecreasing in cdf up to 2*delta_p slack.
moment_set moments_from_table(const distribution_table& table, double atom_at,
                              double atom_mass);

} // namespace qtail::mdinf
