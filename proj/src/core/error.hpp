#pragma once

#include <stdexcept>
#include <string>

namespace logosp {

enum class ErrorKind {
    io,            // file missing, short read/write
    parse,         // malformed file content
    precondition,  // caller violated an operation contract
    numeric,       // solver failed to converge, non-finite data
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_io(std::string msg) { throw Error(ErrorKind::io, std::move(msg)); }
[[noreturn]] inline void fail_parse(std::string msg) { throw Error(ErrorKind::parse, std::move(msg)); }
[[noreturn]] inline void fail_pre(std::string msg) { throw Error(ErrorKind::precondition, std::move(msg)); }
[[noreturn]] inline void fail_numeric(std::string msg) { throw Error(ErrorKind::numeric, std::move(msg)); }

}  // namespace logosp
