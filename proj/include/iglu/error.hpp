#pragma once

#include <stdexcept>
#include <string>

namespace iglu {

// Failure categories; the CLI maps each onto a distinct exit status.
enum class ErrorKind { usage, data, numeric, io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error data_error(const std::string& msg) { return Error(ErrorKind::data, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ErrorKind::numeric, msg); }
inline Error io_error(const std::string& msg) { return Error(ErrorKind::io, msg); }
inline Error usage_error(const std::string& msg) { return Error(ErrorKind::usage, msg); }

}  // namespace iglu
