#ifndef CONTOUR_SEEKER_SEEDING_HPP
#define CONTOUR_SEEKER_SEEDING_HPP

#include <cstdint>

namespace contour_seeker {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Named random streams. Every randomized stage draws from its own stream so
/// that, e.g., candidate sets do not depend on how many draws the fit used.
enum class Stream : std::uint64_t {
    InitialDesign = 1,
    Candidates = 2,
    OneShot = 3,
    FitStarts = 4,
    Reference = 5,
    Replicate = 6,
    CoverageGrid = 7,
    CoverageDraw = 8,
    Lhd = 9,
    Combos = 10,
};

/// Deterministic child seed for (base, stream, index).
inline std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
    return mix64(mix64(mix64(base) ^ static_cast<std::uint64_t>(stream)) + index);
}

}  // namespace contour_seeker

#endif  // CONTOUR_SEEKER_SEEDING_HPP
