#include "blowup/version.hpp"

namespace blowup {

std::string_view library_version() noexcept { return BLOWUP_VERSION_STRING; }

}  // namespace blowup
