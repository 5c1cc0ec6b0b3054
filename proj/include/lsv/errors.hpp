#pragma once

#include <stdexcept>

namespace lsv {

/// Malformed or inconsistent input: files, parameters, configuration.
/// The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a usable answer.
/// The CLI maps it to exit code 1.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lsv
