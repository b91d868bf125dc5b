#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpf {

enum class ErrorKind {
    InvalidArgument,
    EmptyText,
    Io,
    Format,
    DimensionMismatch,
    EmptyCorpus,
    EmptyIndex,
    EmptySource,
    Transport,
    Protocol,
    Backend,
    Fixture,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Rethrow-friendly copy with extra context prefixed to the message.
    Error with_context(std::string_view context) const {
        return Error(kind_, std::string(context) + ": " + what());
    }

private:
    ErrorKind kind_;
};

}  // namespace tpf
