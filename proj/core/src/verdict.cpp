#include "blowup/verdict.hpp"

namespace blowup {

std::string_view to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::ExplodesFiniteTime: return "ExplodesFiniteTime";
        case VerdictKind::NoExplosion: return "NoExplosion";
        case VerdictKind::Unknown: return "Unknown";
    }
    return "Unknown";
}

}  // namespace blowup
