#pragma once

#include <stdexcept>
#include <string>

namespace crisp {

// Malformed or inconsistent input data: files, dimensions, configs.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: factorization breakdown, non-finite objective, etc.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace crisp
