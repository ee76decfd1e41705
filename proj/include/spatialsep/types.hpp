#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spatialsep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Base for every error raised by the library. Messages are part of the
// public contract (tests and the CLI match on them).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: configs, labels, files, shapes that cannot agree.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite loss during optimization.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace spatialsep
