#pragma once

#include <stdexcept>
#include <string>

namespace tncn {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// usage -> 2, data/schema -> 3, numerical -> 4, io -> 5.

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : DataError {
    explicit SchemaError(const std::string& msg) : DataError(msg) {}
};

// Temporal regression: an operation saw time move backwards.
struct CausalityError : DataError {
    explicit CausalityError(const std::string& msg) : DataError(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace tncn
