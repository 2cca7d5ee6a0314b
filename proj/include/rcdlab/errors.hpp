#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcdlab {

// Every failure raised by the library derives from Error so callers can catch
// one type; the subclasses carry the category the CLI reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ConvexityViolation : public Error {
public:
    ConvexityViolation(const std::string& what, std::size_t worst_node, double worst_value)
        : Error(what), worst_node_(worst_node), worst_value_(worst_value) {}

    std::size_t worst_node() const noexcept { return worst_node_; }
    double worst_value() const noexcept { return worst_value_; }

private:
    std::size_t worst_node_;
    double worst_value_;
};

class DegenerateMeasure : public Error {
public:
    using Error::Error;
};

class TruncationError : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class DegenerateComposition : public Error {
public:
    using Error::Error;
};

}  // namespace rcdlab
