#include "core/rng.hpp"

#include <sstream>

#include "core/error.hpp"

namespace umic {

std::string Rng::serialize() const {
    std::ostringstream os;
    os << engine_;
    os << " spare " << have_spare_ << " ";
    os.precision(17);
    os << spare_;
    return os.str();
}

Rng Rng::deserialize(const std::string& s) {
    Rng r;
    std::istringstream is(s);
    is >> r.engine_;
    std::string tag;
    is >> tag >> r.have_spare_ >> r.spare_;
    require(!is.fail() && tag == "spare", ErrKind::format, "bad rng state string");
    return r;
}

}  // namespace umic
