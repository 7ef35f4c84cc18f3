#pragma once

#include <stdexcept>
#include <string>

namespace objmark {

enum class Errc {
    invalid_argument,
    empty_region,
    placement_infeasible,
    capacity_exceeded,
    no_signal,
    io,
};

const char* to_string(Errc code);

/// Exception type thrown by every operation in the library. The code lets
/// callers (and the CLI's exit-code mapping) branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
    if (!condition) {
        fail(Errc::invalid_argument, what);
    }
}

}  // namespace objmark
