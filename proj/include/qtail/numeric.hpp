#pragma once

#include <cmath>
#include <functional>

namespace qtail {

// Neumaier-compensated accumulator. Error stays O(eps) independent of the
// number of terms, which matters when summing 10^5..10^6 oscillating
// inversion terms whose partial sums cancel heavily. Requires strict IEEE
// arithmetic (the build must not enable fast-math).
class compensated_sum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct quadrature_result {
    double value;
    double error_estimate;
};

// Adaptive Simpson integration of f on [lo, hi] to the given relative
// tolerance (with a tiny absolute floor so integrals near zero terminate).
// Throws quadrature_error when the subdivision budget is exhausted.
quadrature_result adaptive_simpson(const std::function<double(double)>& f,
                                   double lo, double hi, double rel_tol,
                                   double abs_tol = 1e-300);

} // namespace qtail
