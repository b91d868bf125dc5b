#include "tpf/error.hpp"

namespace tpf {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptyText: return "EmptyText";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::Format: return "FormatError";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::EmptyIndex: return "EmptyIndex";
        case ErrorKind::EmptySource: return "EmptySource";
        case ErrorKind::Transport: return "TransportError";
        case ErrorKind::Protocol: return "ProtocolError";
        case ErrorKind::Backend: return "BackendError";
        case ErrorKind::Fixture: return "FixtureError";
    }
    return "Unknown";
}

}  // namespace tpf
