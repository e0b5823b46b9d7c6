#include "core/error.hpp"

namespace umic {

void fail(ErrKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

const char* err_kind_name(ErrKind k) {
    switch (k) {
        case ErrKind::invalid_argument: return "invalid_argument";
        case ErrKind::not_found: return "not_found";
        case ErrKind::duplicate: return "duplicate";
        case ErrKind::io: return "io";
        case ErrKind::format: return "format";
        case ErrKind::codec: return "codec";
        case ErrKind::state: return "state";
        case ErrKind::data: return "data";
        case ErrKind::internal: return "internal";
    }
    return "unknown";
}

}  // namespace umic
