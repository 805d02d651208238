#pragma once

/*
  Tail probabilities from Laplace-Stieltjes transforms.

  Implements the trigonometric inversion of Platzman, Ammons and Bartholdi
  ("A simple and efficient algorithm to compute tail probabilities from
  transforms", Operations Research 36, 1988). For a distribution whose mass
  lies in the window [L, U] up to far less than delta_p, the estimate

      tau(t) = (U - t + dt) / (U - L + 2 dt)
             + sum_{n=1..N} a_n / (pi n) * Im{ (beta^n - gamma^n) L(j omega n) }

  with

      K = ln(2 / delta_p)            D = dt / sqrt(2 K)
      omega = 2 pi / (U - L + 2 dt)  N = ceil(2 K / (omega dt))
      a_n = exp(-(D omega n)^2 / 2)
      beta = exp(j (U + dt) omega)   gamma = exp(j t omega)

  satisfies the two-sided guarantee

      P[X >= t + dt] - delta_p  <=  tau(t)  <=  P[X > t - dt] + delta_p,

  i.e. dt is the tolerated blur of the argument and delta_p the tolerated
  error of the returned probability.
*/

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qtail::pab {

using transform_fn = std::function<std::complex<double>(std::complex<double>)>;

// A Laplace-Stieltjes transform with registration-time sanity checks:
// L(0) must equal 1 (proper distribution, tolerance 1e-9), and |L(jy)|
// must not exceed 1 on a fixed spot-check sample, a necessary property of
// any probability transform.
class transform_evaluator {
public:
    transform_evaluator(std::string label, transform_fn fn);

    std::complex<double> operator()(std::complex<double> s) const { return fn_(s); }
    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
    transform_fn fn_;
};

struct inversion_spec {
    double delta_t = 0.0;  // accuracy: tolerated blur of t, > 0
    double delta_p = 0.0;  // precision: tolerated probability error, in (0, 1/2)
    double lower = 0.0;    // L, window start, >= 0
    double upper = 0.0;    // U, window end, > L
};

struct derived_params {
    double k = 0.0;           // ln(2 / delta_p)
    double d = 0.0;           // delta_t / sqrt(2 k)
    double omega = 0.0;       // 2 pi / (upper - lower + 2 delta_t)
    std::int64_t n_terms = 0; // ceil(2 k / (omega delta_t))
};

derived_params derive_params(const inversion_spec& spec);

struct tail_estimate {
    double t = 0.0;
    double tau = 0.0;    // raw estimate of P[X > t]; may leave [0, 1] within slack
    double cdf = 0.0;    // 1 - tau clamped into [0, 1]
    bool clamped = false;
    inversion_spec spec;
    derived_params derived;
};

// One inversion at time t. Throws domain_error on bad spec or t,
// evaluation_error when the transform fails at some term, numeric_error
// when the running sum turns non-finite.
tail_estimate invert_tail(const transform_evaluator& transform, double t,
                          const inversion_spec& spec);

// Batched inversion over a strictly increasing grid. Transform values at
// j omega n do not depend on t, so they are evaluated once and shared;
// results are bit-identical to independent invert_tail calls.
std::vector<tail_estimate> invert_grid(const transform_evaluator& transform,
                                       std::span<const double> ts,
                                       const inversion_spec& spec);

} // namespace qtail::pab
