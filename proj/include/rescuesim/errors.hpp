#pragma once

#include <stdexcept>
#include <string>

namespace rescuesim {

// Bad inputs: invalid config fields, malformed actions, broken preconditions.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Path planning failed because the destination cannot be reached.
class NoRouteError : public std::runtime_error {
public:
    explicit NoRouteError(const std::string& what) : std::runtime_error(what) {}
};

// Training produced non-finite values.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rescuesim
