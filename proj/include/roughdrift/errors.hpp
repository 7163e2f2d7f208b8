#pragma once

#include <stdexcept>
#include <string>

namespace roughdrift {

/// Invalid argument or configuration (out-of-range parameter, mismatched grids).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input that admits no meaningful answer, e.g. a log-log fit over zero errors.
class DegenerateInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// File system failure; the message always carries the offending path.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, const std::string& path)
        : std::runtime_error(what + ": " + path), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ParameterError(message);
}

} // namespace detail
} // namespace roughdrift
