#pragma once

#include <stdexcept>
#include <string>

namespace sufcast {

/// Broad failure classes; the CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind { config, data, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Invalid arguments, option values or incompatible sizes requested by the caller.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Malformed or unusable input data.
struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Solver failure, rank deficiency, non-finite intermediate results.
struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Rethrows `e` as the subclass matching its kind, with `prefix` prepended.
[[noreturn]] inline void rethrow_with_prefix(const Error& e, const std::string& prefix) {
    switch (e.kind()) {
        case ErrorKind::config: throw ConfigError(prefix + e.what());
        case ErrorKind::data: throw DataError(prefix + e.what());
        case ErrorKind::numerical: break;
    }
    throw NumericalError(prefix + e.what());
}

}  // namespace sufcast
