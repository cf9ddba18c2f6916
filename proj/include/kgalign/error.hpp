#pragma once

#include <stdexcept>
#include <string>

namespace kgalign {

// Error categories map onto CLI exit codes: config=2, data=3, backend=4.
enum class ErrorKind {
    Config,
    Data,
    Backend,
    NotFound,
    Parse,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    int exit_code() const {
        switch (kind_) {
            case ErrorKind::Config: return 2;
            case ErrorKind::Backend: return 4;
            default: return 3;
        }
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_config(std::string msg) { throw Error(ErrorKind::Config, std::move(msg)); }
[[noreturn]] inline void throw_data(std::string msg) { throw Error(ErrorKind::Data, std::move(msg)); }
[[noreturn]] inline void throw_backend(std::string msg) { throw Error(ErrorKind::Backend, std::move(msg)); }
[[noreturn]] inline void throw_not_found(std::string msg) { throw Error(ErrorKind::NotFound, std::move(msg)); }

} // namespace kgalign
