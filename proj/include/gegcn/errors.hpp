#pragma once

#include <stdexcept>
#include <string>

namespace gegcn {

// Base for everything thrown by this library. The CLI maps ConfigError-like
// failures (validation, format, dimension) to exit code 2 and the rest to 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad inputs: violated invariants, infeasible marginals, dangling endpoints.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Unparseable file contents; carries a 1-based line number when known.
class FormatError : public Error {
public:
    FormatError(const std::string& msg, long line)
        : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    explicit FormatError(const std::string& msg) : FormatError(msg, 0) {}
    long line() const noexcept { return line_; }

private:
    long line_ = 0;
};

// A cached artifact (distances, curvatures) no longer matches the weights it
// was computed from.
class StalenessError : public Error {
public:
    using Error::Error;
};

// Tensor shape mismatch; message carries both shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Probability measure cannot be formed (isolated node with alpha < 1).
class DegenerateMeasureError : public Error {
public:
    using Error::Error;
};

// Quantity has no defined value on this input (e.g. homophily of an
// edgeless graph).
class UndefinedValueError : public Error {
public:
    using Error::Error;
};

// API misuse, e.g. backward() twice without reset().
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace gegcn
