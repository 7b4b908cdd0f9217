#pragma once

#include <stdexcept>
#include <string>

namespace cpfit {

/// Solver-level failure (singular systems, non-finite iterates).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// File and parse failures; messages name the offending file and line.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cpfit
