#pragma once

#include <stdexcept>
#include <string>

namespace umic {

enum class ErrKind {
    invalid_argument,
    not_found,
    duplicate,
    io,
    format,      // malformed container / checkpoint / bitstream
    codec,       // codec or subprocess failure
    state,       // missing prerequisite (checkpoint, registration)
    data,        // dataset / caption problems
    internal,    // invariant violation
};

class Error : public std::runtime_error {
public:
    Error(ErrKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrKind kind() const { return kind_; }

private:
    ErrKind kind_;
};

[[noreturn]] void fail(ErrKind kind, const std::string& msg);

inline void require(bool cond, ErrKind kind, const std::string& msg) {
    if (!cond) fail(kind, msg);
}

const char* err_kind_name(ErrKind k);

}  // namespace umic
