#ifndef CONTOUR_SEEKER_DESIGN_SPACE_HPP
#define CONTOUR_SEEKER_DESIGN_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "contour_seeker/errors.hpp"
#include "contour_seeker/seeding.hpp"

namespace contour_seeker {

struct Interval {
    double low = 0.0;
    double high = 1.0;

    double width() const { return high - low; }
};

/// One mixed input: quantitative coordinates normalized to [0,1] and
/// 1-based qualitative level indices.
struct MixedPoint {
    std::vector<double> x;
    std::vector<int> z;

    friend bool operator==(const MixedPoint&, const MixedPoint&) = default;
};

/// True when the levels match exactly and every coordinate agrees within tol.
inline bool same_point(const MixedPoint& a, const MixedPoint& b, double tol = 1e-12) {
    if (a.z != b.z || a.x.size() != b.x.size()) return false;
    for (std::size_t k = 0; k < a.x.size(); ++k) {
        if (std::abs(a.x[k] - b.x[k]) > tol) return false;
    }
    return true;
}

/// Mixed input space: p bounded quantitative variables and q qualitative
/// factors with m_1..m_q levels. All internal math runs on [0,1]^p.
class DesignSpace {
public:
    DesignSpace() = default;

    /// Validating factory. Throws ValidationError on empty bounds, a degenerate
    /// interval, or a factor with fewer than two levels.
    static DesignSpace make(std::vector<Interval> quant_bounds, std::vector<int> qual_levels) {
        if (quant_bounds.empty()) {
            throw ValidationError("design space needs at least one quantitative variable", "quant_bounds");
        }
        for (std::size_t k = 0; k < quant_bounds.size(); ++k) {
            const auto& b = quant_bounds[k];
            if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low < b.high)) {
                throw ValidationError("quantitative bound " + std::to_string(k + 1) +
                                          " must satisfy low < high",
                                      "quant_bounds");
            }
        }
        std::size_t combos = 1;
        for (std::size_t h = 0; h < qual_levels.size(); ++h) {
            if (qual_levels[h] < 2) {
                throw ValidationError("qualitative factor " + std::to_string(h + 1) +
                                          " needs at least 2 levels",
                                      "qual_levels");
            }
            combos *= static_cast<std::size_t>(qual_levels[h]);
        }
        DesignSpace s;
        s.bounds_ = std::move(quant_bounds);
        s.levels_ = std::move(qual_levels);
        s.combos_ = combos;
        return s;
    }

    std::size_t p() const { return bounds_.size(); }
    std::size_t q() const { return levels_.size(); }
    /// Number of level combinations M (1 when q = 0).
    std::size_t M() const { return combos_; }
    const std::vector<Interval>& bounds() const { return bounds_; }
    const std::vector<int>& levels() const { return levels_; }

    /// Level combination number `index` in lexicographic order over (z_1..z_q),
    /// the last factor varying fastest.
    std::vector<int> combo(std::size_t index) const {
        std::vector<int> z(q());
        for (std::size_t h = q(); h-- > 0;) {
            const auto m = static_cast<std::size_t>(levels_[h]);
            z[h] = static_cast<int>(index % m) + 1;
            index /= m;
        }
        return z;
    }

    std::size_t combo_index(std::span<const int> z) const {
        std::size_t index = 0;
        for (std::size_t h = 0; h < q(); ++h) {
            index = index * static_cast<std::size_t>(levels_[h]) + static_cast<std::size_t>(z[h] - 1);
        }
        return index;
    }

    std::vector<double> to_physical(std::span<const double> unit) const {
        std::vector<double> out(p());
        for (std::size_t k = 0; k < p(); ++k) out[k] = bounds_[k].low + unit[k] * bounds_[k].width();
        return out;
    }

    std::vector<double> to_normalized(std::span<const double> physical) const {
        std::vector<double> out(p());
        for (std::size_t k = 0; k < p(); ++k) out[k] = (physical[k] - bounds_[k].low) / bounds_[k].width();
        return out;
    }

    /// Whether a normalized point lies in the space.
    bool contains(const MixedPoint& w) const {
        if (w.x.size() != p() || w.z.size() != q()) return false;
        for (double v : w.x) {
            if (!(v >= 0.0 && v <= 1.0)) return false;
        }
        for (std::size_t h = 0; h < q(); ++h) {
            if (w.z[h] < 1 || w.z[h] > levels_[h]) return false;
        }
        return true;
    }

    /// Same dimensions, bounds and level counts.
    friend bool operator==(const DesignSpace& a, const DesignSpace& b) {
        if (a.levels_ != b.levels_ || a.bounds_.size() != b.bounds_.size()) return false;
        for (std::size_t k = 0; k < a.bounds_.size(); ++k) {
            if (a.bounds_[k].low != b.bounds_[k].low || a.bounds_[k].high != b.bounds_[k].high) return false;
        }
        return true;
    }

private:
    std::vector<Interval> bounds_;
    std::vector<int> levels_;
    std::size_t combos_ = 1;
};

/// Candidates for one acquisition step: `per_combo` LHD points attached to
/// each of the M level combinations, combinations in lexicographic order.
struct CandidateSet {
    std::vector<MixedPoint> points;
    std::size_t per_combo = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// One value per stratum: floor(v * n) == stratum is guaranteed, not just
// expected, so the stratification invariant survives rounding.
inline double stratum_value(std::size_t stratum, std::size_t n, double u) {
    const auto nd = static_cast<double>(n);
    const auto sd = static_cast<double>(stratum);
    double v = (sd + u) / nd;
    while (v > 0.0 && std::floor(v * nd) > sd) v = std::nextafter(v, 0.0);
    while (std::floor(v * nd) < sd) v = std::nextafter(v, 1.0);
    return v;
}

// Balanced assignment of combination indices to n slots: every combination
// floor(n/M) times, the remainder drawn without replacement, then shuffled.
inline std::vector<std::size_t> balanced_combos(std::size_t n, std::size_t M, std::mt19937_64& rng) {
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t rep = 0; rep < n / M; ++rep) {
        for (std::size_t c = 0; c < M; ++c) out.push_back(c);
    }
    std::vector<std::size_t> extra(M);
    std::iota(extra.begin(), extra.end(), std::size_t{0});
    std::shuffle(extra.begin(), extra.end(), rng);
    for (std::size_t i = 0; i < n % M; ++i) out.push_back(extra[i]);
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

}  // namespace detail

/// Random Latin hypercube of n points in [0,1]^p: per dimension, exactly one
/// point in each stratum [(i-1)/n, i/n), uniformly placed inside it.
inline std::vector<std::vector<double>> latin_hypercube(const DesignSpace& space, std::size_t n,
                                                        std::uint64_t seed) {
    if (n == 0) throw ValidationError("latin hypercube size must be at least 1", "n");
    std::mt19937_64 rng(derive_seed(seed, Stream::Lhd));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> pts(n, std::vector<double>(space.p()));
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < space.p(); ++k) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) pts[i][k] = detail::stratum_value(perm[i], n, unif(rng));
    }
    return pts;
}

inline CandidateSet candidate_set(const DesignSpace& space, std::size_t per_combo, std::uint64_t seed) {
    if (per_combo == 0) throw ValidationError("candidates per combination must be at least 1", "per_combo");
    CandidateSet set;
    set.per_combo = per_combo;
    set.seed = seed;
    set.points.reserve(per_combo * space.M());
    for (std::size_t c = 0; c < space.M(); ++c) {
        auto z = space.combo(c);
        for (auto& x : latin_hypercube(space, per_combo, derive_seed(seed, Stream::Candidates, c))) {
            set.points.push_back(MixedPoint{std::move(x), z});
        }
    }
    return set;
}

namespace detail {

inline std::vector<MixedPoint> balanced_design(const DesignSpace& space, std::size_t n, std::uint64_t seed,
                                               const char* field) {
    if (n < 2) throw ValidationError(std::string(field) + " must be at least 2", field);
    auto xs = latin_hypercube(space, n, seed);
    std::mt19937_64 rng(derive_seed(seed, Stream::Combos));
    const auto combos = balanced_combos(n, space.M(), rng);
    std::vector<MixedPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(MixedPoint{std::move(xs[i]), space.combo(combos[i])});
    return out;
}

}  // namespace detail

/// Initial design: n0-point LHD with a (nearly) balanced assignment of level
/// combinations; counts differ by at most one. When n0 < M, the n0
/// combinations are distinct.
inline std::vector<MixedPoint> initial_design(const DesignSpace& space, std::size_t n0, std::uint64_t seed) {
    return detail::balanced_design(space, n0, derive_seed(seed, Stream::InitialDesign), "n0");
}

/// Non-adaptive baseline design, same construction as initial_design.
inline std::vector<MixedPoint> one_shot_design(const DesignSpace& space, std::size_t n, std::uint64_t seed) {
    return detail::balanced_design(space, n, derive_seed(seed, Stream::OneShot), "n");
}

}  // namespace contour_seeker

#endif  // CONTOUR_SEEKER_DESIGN_SPACE_HPP
