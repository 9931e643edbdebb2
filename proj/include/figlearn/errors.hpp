#pragma once

#include <stdexcept>
#include <string>

namespace figlearn {

/// Bad input: shape mismatches, domain violations, unparseable files.
/// The CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergence, non-finite values mid-run.
/// The CLI maps this to exit code 3.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace figlearn
