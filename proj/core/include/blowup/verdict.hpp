#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blowup {

enum class VerdictKind { ExplodesFiniteTime, NoExplosion, Unknown };

std::string_view to_string(VerdictKind kind);

/// Answer to "does the solution blow up in finite time?" with the evidence behind it.
struct ExplosionVerdict {
    VerdictKind kind = VerdictKind::Unknown;
    std::vector<std::string> evidence;
    /// Set when explosion happens with a probability that is computable but below one.
    std::optional<double> explosion_probability;

    bool decided() const noexcept { return kind != VerdictKind::Unknown; }
};

}  // namespace blowup
