#pragma once

#include <string_view>

namespace blowup {

/// Library version, "major.minor.patch".
std::string_view library_version() noexcept;

}  // namespace blowup
