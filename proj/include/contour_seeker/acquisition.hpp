#ifndef CONTOUR_SEEKER_ACQUISITION_HPP
#define CONTOUR_SEEKER_ACQUISITION_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contour_seeker/errors.hpp"
#include "contour_seeker/ezgp.hpp"

namespace contour_seeker {

inline double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

inline double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

/// Confidence-band multiplier beta_{0|n} = 2 log(pi^2 n^2 M / (6 alpha)).
inline double beta_n(std::size_t n, std::size_t M, double alpha) {
    if (n < 1) throw ValidationError("beta needs n >= 1", "n");
    if (M < 1) throw ValidationError("beta needs M >= 1", "M");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("coverage alpha must lie in (0, 1)", "alpha");
    const double nd = static_cast<double>(n);
    return 2.0 * std::log(std::numbers::pi * std::numbers::pi * nd * nd * static_cast<double>(M) / (6.0 * alpha));
}

/// Everything a selector needs besides the predictions.
struct AcquisitionContext {
    double level = 0.0;     // contour level a
    std::size_t n = 1;      // |D_n|
    std::size_t M = 1;      // level combinations
    double alpha = 0.05;    // coverage parameter
    double beta = 0.0;      // derived
    double delta = 0.05;    // arbitration threshold
    double rho = 2.0;       // LCB / ARSD exploration weight
    double ei_alpha = 1.96; // EI band: eps = ei_alpha * sd

    static AcquisitionContext make(double level, std::size_t n, std::size_t M, double alpha = 0.05,
                                   double delta = 0.05, double rho = 2.0, double ei_alpha = 1.96) {
        if (!std::isfinite(level)) throw ValidationError("contour level must be finite", "level");
        if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be positive", "delta");
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be non-negative", "rho");
        if (!(ei_alpha > 0.0) || !std::isfinite(ei_alpha)) {
            throw ValidationError("ei_alpha must be positive", "ei_alpha");
        }
        AcquisitionContext c;
        c.level = level;
        c.n = n;
        c.M = M;
        c.alpha = alpha;
        c.beta = beta_n(n, M, alpha);
        c.delta = delta;
        c.rho = rho;
        c.ei_alpha = ei_alpha;
        return c;
    }
};

/// Closed-form expected improvement for contours with eps = ei_alpha * sd.
inline double ei_contour(double mean, double sd, const AcquisitionContext& ctx) {
    if (!(sd > 0.0)) return 0.0;
    const double a = ctx.level;
    const double eps = ctx.ei_alpha * sd;
    const double u1 = (a - mean - eps) / sd;
    const double u2 = (a - mean + eps) / sd;
    const double d = mean - a;
    const double value = (eps * eps - d * d - sd * sd) * (normal_cdf(u2) - normal_cdf(u1)) +
                         sd * sd * (u2 * normal_pdf(u2) - u1 * normal_pdf(u1)) +
                         2.0 * d * sd * (normal_pdf(u2) - normal_pdf(u1));
    return std::max(value, 0.0);
}

/// Entropy of the exceedance indicator 1{Y > a}; natural log, range [0, log 2].
inline double ecl(double mean, double sd, double level) {
    if (!(sd > 0.0)) return 0.0;
    constexpr double kClip = 1e-12;
    const double p = std::clamp(normal_cdf((mean - level) / sd), kClip, 1.0 - kClip);
    return -(1.0 - p) * std::log(1.0 - p) - p * std::log(p);
}

/// |mean - a| - rho * sd; smaller is better.
inline double lcb_contour(double mean, double sd, const AcquisitionContext& ctx) {
    return std::abs(mean - ctx.level) - ctx.rho * sd;
}

struct Bounds {
    double lb = 0.0;
    double ub = 0.0;
};

/// Confidence bounds on |Y - a|: |mean - a| -/+ sqrt(beta) * sd.
inline Bounds bounds(double mean, double sd, const AcquisitionContext& ctx) {
    const double centre = std::abs(mean - ctx.level);
    const double half = std::sqrt(ctx.beta) * sd;
    return {centre - half, centre + half};
}

struct RegionPartition {
    std::vector<std::size_t> a1;      // level outside the band: lb > 0
    std::vector<std::size_t> a2;      // level inside the band: lb <= 0
    std::vector<std::size_t> a1_min;  // a1 members with lb <= min_ub
    double min_ub = 0.0;              // min over all candidates
};

inline RegionPartition partition(std::span<const Prediction> preds, const AcquisitionContext& ctx) {
    if (preds.empty()) throw SelectionError("cannot partition an empty candidate set");
    RegionPartition part;
    std::vector<Bounds> b(preds.size());
    part.min_ub = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < preds.size(); ++i) {
        b[i] = bounds(preds[i].mean, preds[i].sd, ctx);
        part.min_ub = std::min(part.min_ub, b[i].ub);
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (b[i].lb > 0.0) {
            part.a1.push_back(i);
            if (b[i].lb <= part.min_ub) part.a1_min.push_back(i);
        } else {
            part.a2.push_back(i);
        }
    }
    return part;
}

namespace detail {

// First index attaining the maximum of score over `indices` (which are ascending).
template <typename Score>
std::optional<std::size_t> argmax_over(std::span<const std::size_t> indices, Score&& score) {
    std::optional<std::size_t> best;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i : indices) {
        const double v = score(i);
        if (!best || v > best_value) {
            best = i;
            best_value = v;
        }
    }
    return best;
}

}  // namespace detail

/// Largest predictive sd inside A_{1,min}.
inline std::optional<std::size_t> select_a1(std::span<const Prediction> preds, const RegionPartition& part) {
    return detail::argmax_over(part.a1_min, [&](std::size_t i) { return preds[i].sd; });
}

enum class InnerCriterion { Ecl, Ei };

/// Best ECL (or EI, for the RCC-EI variant) inside A_2.
inline std::optional<std::size_t> select_a2(std::span<const Prediction> preds, const RegionPartition& part,
                                            const AcquisitionContext& ctx, InnerCriterion inner = InnerCriterion::Ecl) {
    if (inner == InnerCriterion::Ei) {
        return detail::argmax_over(part.a2, [&](std::size_t i) { return ei_contour(preds[i].mean, preds[i].sd, ctx); });
    }
    return detail::argmax_over(part.a2, [&](std::size_t i) { return ecl(preds[i].mean, preds[i].sd, ctx.level); });
}

enum class Region { A1, A2, Fallback, Global };

inline std::string to_string(Region r) {
    switch (r) {
        case Region::A1: return "A1";
        case Region::A2: return "A2";
        case Region::Fallback: return "fallback";
        case Region::Global: return "global";
    }
    return "?";
}

struct Finalist {
    std::size_t index = 0;
    double mean = 0.0;
    double sd = 0.0;
    double acquisition = 0.0;  // sd for A1, ECL/EI for A2, the criterion otherwise
    double score = 0.0;        // sd / max(delta, |mean - a|)
};

/// Audit record of one selection step.
struct SelectionReport {
    std::size_t chosen = 0;
    Region region = Region::Global;
    Finalist selected;  // stats of the chosen candidate
    std::optional<Finalist> a1_finalist;
    std::optional<Finalist> a2_finalist;
    std::size_t a1_size = 0;
    std::size_t a2_size = 0;
    std::size_t a1_min_size = 0;
    double beta = 0.0;
    double delta = 0.0;
};

inline double arbitration_score(const Prediction& p, const AcquisitionContext& ctx) {
    return p.sd / std::max(ctx.delta, std::abs(p.mean - ctx.level));
}

/// Picks between the A1 and A2 finalists by sd / max(delta, |mean - a|);
/// ties go to the A2 finalist. A lone finalist is taken with region Fallback.
inline SelectionReport arbitrate(std::span<const Prediction> preds, std::optional<std::size_t> i1,
                                 std::optional<std::size_t> i2, const AcquisitionContext& ctx,
                                 InnerCriterion inner = InnerCriterion::Ecl) {
    if (!i1 && !i2) throw SelectionError("no finalist in either region");
    SelectionReport rep;
    rep.beta = ctx.beta;
    rep.delta = ctx.delta;
    auto finalist = [&](std::size_t i, double acq) {
        return Finalist{i, preds[i].mean, preds[i].sd, acq, arbitration_score(preds[i], ctx)};
    };
    if (i1) rep.a1_finalist = finalist(*i1, preds[*i1].sd);
    if (i2) {
        const double acq = inner == InnerCriterion::Ei ? ei_contour(preds[*i2].mean, preds[*i2].sd, ctx)
                                                       : ecl(preds[*i2].mean, preds[*i2].sd, ctx.level);
        rep.a2_finalist = finalist(*i2, acq);
    }
    if (i1 && i2) {
        const bool take_a1 = rep.a1_finalist->score > rep.a2_finalist->score;
        rep.chosen = take_a1 ? *i1 : *i2;
        rep.region = take_a1 ? Region::A1 : Region::A2;
    } else {
        rep.chosen = i1 ? *i1 : *i2;
        rep.region = Region::Fallback;
    }
    rep.selected = (rep.a1_finalist && rep.a1_finalist->index == rep.chosen) ? *rep.a1_finalist : *rep.a2_finalist;
    return rep;
}

/// Full region-based cooperative selection: partition, one finalist per
/// region, arbitration.
inline SelectionReport select_rcc(std::span<const Prediction> preds, const AcquisitionContext& ctx,
                                  InnerCriterion inner = InnerCriterion::Ecl) {
    const auto part = partition(preds, ctx);
    auto rep = arbitrate(preds, select_a1(preds, part), select_a2(preds, part, ctx, inner), ctx, inner);
    rep.a1_size = part.a1.size();
    rep.a2_size = part.a2.size();
    rep.a1_min_size = part.a1_min.size();
    return rep;
}

/// Contour-ARSD: argmin of |mean - a| - rho * sd over
/// A* = {i : lb_i <= min_j ub_j}.
inline std::size_t select_arsd(std::span<const Prediction> preds, const AcquisitionContext& ctx) {
    if (preds.empty()) throw SelectionError("cannot select from an empty candidate set");
    double min_ub = std::numeric_limits<double>::infinity();
    for (const auto& p : preds) min_ub = std::min(min_ub, bounds(p.mean, p.sd, ctx).ub);
    std::optional<std::size_t> best;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (bounds(preds[i].mean, preds[i].sd, ctx).lb > min_ub) continue;
        const double v = lcb_contour(preds[i].mean, preds[i].sd, ctx);
        if (!best || v < best_value) {
            best = i;
            best_value = v;
        }
    }
    // The minimizer of ub always satisfies lb <= ub = min_ub.
    return *best;
}

enum class GlobalCriterion { Ei, Ecl, Lcb };

/// Unrestricted selection over all candidates: argmax EI/ECL or argmin LCB.
inline std::size_t select_global(std::span<const Prediction> preds, const AcquisitionContext& ctx,
                                 GlobalCriterion kind) {
    if (preds.empty()) throw SelectionError("cannot select from an empty candidate set");
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        double v = 0.0;
        switch (kind) {
            case GlobalCriterion::Ei: v = ei_contour(preds[i].mean, preds[i].sd, ctx); break;
            case GlobalCriterion::Ecl: v = ecl(preds[i].mean, preds[i].sd, ctx.level); break;
            case GlobalCriterion::Lcb: v = -lcb_contour(preds[i].mean, preds[i].sd, ctx); break;
        }
        if (i == 0 || v > best_value) {
            best = i;
            best_value = v;
        }
    }
    return best;
}

}  // namespace contour_seeker

#endif  // CONTOUR_SEEKER_ACQUISITION_HPP
