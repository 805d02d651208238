#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace qtail {

// A parameter outside its documented domain. Carries the parameter name
// so the CLI layer can point at the offending flag.
class domain_error : public std::invalid_argument {
public:
    domain_error(std::string parameter, const std::string& message)
        : std::invalid_argument(message), parameter_(std::move(parameter)) {}

    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

// Numerical failure: non-finite intermediate, singular transform value,
// or similar. Maps to exit code 3 in the CLI.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Transform evaluation failed at a specific term of the inversion sum.
class evaluation_error : public numeric_error {
public:
    evaluation_error(long long term_index, std::complex<double> at,
                     const std::string& message)
        : numeric_error(message), term_index_(term_index), at_(at) {}

    long long term_index() const noexcept { return term_index_; }
    std::complex<double> at() const noexcept { return at_; }

private:
    long long term_index_;
    std::complex<double> at_;
};

// Adaptive quadrature exhausted its subdivision budget.
class quadrature_error : public numeric_error {
public:
    quadrature_error(double achieved_tolerance, const std::string& message)
        : numeric_error(message), achieved_(achieved_tolerance) {}

    double achieved_tolerance() const noexcept { return achieved_; }

private:
    double achieved_;
};

} // namespace qtail
