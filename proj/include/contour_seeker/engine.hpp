#ifndef CONTOUR_SEEKER_ENGINE_HPP
#define CONTOUR_SEEKER_ENGINE_HPP

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contour_seeker/acquisition.hpp"
#include "contour_seeker/design_space.hpp"
#include "contour_seeker/errors.hpp"
#include "contour_seeker/ezgp.hpp"
#include "contour_seeker/seeding.hpp"

namespace contour_seeker {

enum class StrategyKind { Rcc, RccEi, Arsd, Ecl, Ei, Lcb, OneShot };

inline std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::Rcc: return "rcc";
        case StrategyKind::RccEi: return "rcc-ei";
        case StrategyKind::Arsd: return "arsd";
        case StrategyKind::Ecl: return "ecl";
        case StrategyKind::Ei: return "ei";
        case StrategyKind::Lcb: return "lcb";
        case StrategyKind::OneShot: return "one-shot";
    }
    return "?";
}

inline StrategyKind parse_strategy(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::replace(s.begin(), s.end(), '_', '-');
    for (auto k : {StrategyKind::Rcc, StrategyKind::RccEi, StrategyKind::Arsd, StrategyKind::Ecl, StrategyKind::Ei,
                   StrategyKind::Lcb, StrategyKind::OneShot}) {
        if (to_string(k) == s) return k;
    }
    if (s == "oneshot") return StrategyKind::OneShot;
    throw ValidationError("unknown strategy '" + s + "'", "strategy");
}

/// Selection rule plus its tuning. An unset delta resolves to 0.05 times the
/// observed response range at each step.
struct Strategy {
    StrategyKind kind = StrategyKind::Rcc;
    double alpha = 0.05;
    std::optional<double> delta;
    double rho = 2.0;
    double ei_alpha = 1.96;
};

/// Black-box response over a declared design space. evaluate() receives the
/// normalized point; implementations map to physical units themselves.
class Simulator {
public:
    virtual ~Simulator() = default;
    virtual const DesignSpace& space() const = 0;
    virtual double evaluate(const MixedPoint& w) const = 0;
    virtual std::string name() const = 0;
};

struct CampaignConfig {
    Strategy strategy;
    double level = 0.0;
    std::size_t n0 = 9;
    std::size_t N = 12;
    std::size_t per_combo = 100;
    std::uint64_t seed = 0;
    FitSettings fit;
    ResponseTransform transform = ResponseTransform::Identity;
    std::size_t threads = 1;  // batch prediction
};

struct CampaignRecord {
    std::size_t iteration = 0;
    std::size_t n_before = 0;
    std::uint64_t candidate_seed = 0;
    MixedPoint point;
    double y = 0.0;
    SelectionReport report;
    EzGpParams params;  // hyperparameters the selection was made with
    double nll = 0.0;
    double rel_jitter = 0.0;
    double wall_seconds = 0.0;
    std::string note;
};

/// Audit log of one campaign.
struct CampaignTrace {
    CampaignConfig config;
    std::string simulator;
    std::vector<MixedPoint> initial_design;
    std::vector<CampaignRecord> records;
    Dataset data;
    std::optional<FittedModel> model;
    bool complete = false;
    std::string error;
};

/// Thrown when a campaign stops early; carries everything done so far.
class CampaignAborted : public std::runtime_error {
public:
    CampaignAborted(const std::string& what, std::shared_ptr<CampaignTrace> partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}

    const CampaignTrace& partial() const { return *partial_; }

private:
    std::shared_ptr<CampaignTrace> partial_;
};

/// Resolves the acquisition context for the current model and level.
inline AcquisitionContext make_context(const Strategy& s, const FittedModel& model, double level) {
    double delta = 0.0;
    if (s.delta) {
        delta = *s.delta;
    } else {
        const double range = model.data().response_range();
        delta = range > 0.0 ? 0.05 * range : 0.05;
    }
    return AcquisitionContext::make(level, model.data().size(), model.space().M(), s.alpha, delta, s.rho,
                                    s.ei_alpha);
}

/// Strategy-specific pick over a prediction list.
inline SelectionReport select_with(StrategyKind kind, std::span<const Prediction> preds,
                                   const AcquisitionContext& ctx) {
    switch (kind) {
        case StrategyKind::Rcc: return select_rcc(preds, ctx, InnerCriterion::Ecl);
        case StrategyKind::RccEi: return select_rcc(preds, ctx, InnerCriterion::Ei);
        case StrategyKind::OneShot:
            throw ValidationError("one-shot designs have no selection step", "strategy");
        default: break;
    }
    SelectionReport rep;
    rep.region = Region::Global;
    rep.beta = ctx.beta;
    rep.delta = ctx.delta;
    double acq = 0.0;
    const auto part = partition(preds, ctx);
    rep.a1_size = part.a1.size();
    rep.a2_size = part.a2.size();
    rep.a1_min_size = part.a1_min.size();
    if (kind == StrategyKind::Arsd) {
        rep.chosen = select_arsd(preds, ctx);
        acq = lcb_contour(preds[rep.chosen].mean, preds[rep.chosen].sd, ctx);
    } else if (kind == StrategyKind::Ecl) {
        rep.chosen = select_global(preds, ctx, GlobalCriterion::Ecl);
        acq = ecl(preds[rep.chosen].mean, preds[rep.chosen].sd, ctx.level);
    } else if (kind == StrategyKind::Ei) {
        rep.chosen = select_global(preds, ctx, GlobalCriterion::Ei);
        acq = ei_contour(preds[rep.chosen].mean, preds[rep.chosen].sd, ctx);
    } else {
        rep.chosen = select_global(preds, ctx, GlobalCriterion::Lcb);
        acq = lcb_contour(preds[rep.chosen].mean, preds[rep.chosen].sd, ctx);
    }
    const auto& p = preds[rep.chosen];
    rep.selected = Finalist{rep.chosen, p.mean, p.sd, acq, arbitration_score(p, ctx)};
    return rep;
}

struct Suggestion {
    MixedPoint point;
    SelectionReport report;  // indices refer to the full candidate list
    std::string note;        // duplicate candidates skipped, if any
};

/// One selection step against a fitted model. Candidates that duplicate a
/// training point are dropped and the selection is repeated on the rest.
inline Suggestion suggest_next(const FittedModel& model, const CandidateSet& candidates, const Strategy& strategy,
                               double level, std::size_t threads = 1) {
    if (candidates.points.empty()) throw ValidationError("candidate set is empty", "candidates");
    const auto ctx = make_context(strategy, model, level);
    const auto all = model.predict_batch(candidates, threads);

    std::vector<std::size_t> active(all.size());
    std::iota(active.begin(), active.end(), std::size_t{0});
    std::string note;
    while (!active.empty()) {
        std::vector<Prediction> preds;
        preds.reserve(active.size());
        for (std::size_t i : active) preds.push_back(all[i]);
        auto rep = select_with(strategy.kind, preds, ctx);
        const std::size_t pick = active[rep.chosen];
        const auto& point = candidates.points[pick];
        if (auto dup = model.data().find(point)) {
            note += (note.empty() ? "" : ";") + std::string("skipped duplicate candidate ") + std::to_string(pick);
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(rep.chosen));
            continue;
        }
        auto remap = [&](std::optional<Finalist>& f) {
            if (f) f->index = active[f->index];
        };
        rep.chosen = pick;
        rep.selected.index = pick;
        remap(rep.a1_finalist);
        remap(rep.a2_finalist);
        return Suggestion{point, rep, note};
    }
    throw SelectionError("every candidate duplicates an existing design point");
}

namespace detail {

inline std::uint64_t fit_seed(std::uint64_t campaign_seed, std::size_t n) {
    return derive_seed(campaign_seed, Stream::FitStarts, n);
}

// Fit with one retry at a 100x larger starting jitter.
inline FittedModel fit_with_retry(const Dataset& data, FitSettings cfg, const EzGpParams* warm) {
    try {
        return fit(data, cfg, warm);
    } catch (const FitError&) {
    } catch (const IllConditionedError&) {
    }
    cfg.jitter = std::min(cfg.jitter * 100.0, kMaxJitter);
    return fit(data, cfg, warm);
}

inline double observe(const Simulator& sim, const MixedPoint& w, ResponseTransform t) {
    const double raw = sim.evaluate(w);
    if (!std::isfinite(raw)) throw SimulatorError("simulator returned a non-finite response");
    try {
        return apply_transform(t, raw);
    } catch (const ValidationError& e) {
        throw SimulatorError(e.what());
    }
}

}  // namespace detail

/// Called with every model fitted during a campaign, in order of data size.
using ModelObserver = std::function<void(const FittedModel&)>;

inline void validate_campaign(const CampaignConfig& cfg) {
    if (cfg.n0 < 2) throw ValidationError("n0 must be at least 2", "n0");
    if (cfg.N < cfg.n0) throw ValidationError("N must be at least n0", "N");
    if (cfg.per_combo < 1) throw ValidationError("candidates per combination must be at least 1", "per_combo");
    if (cfg.strategy.kind == StrategyKind::OneShot) {
        throw ValidationError("use run_one_shot for one-shot designs", "strategy");
    }
}

/// Sequential campaign: initial design, then while n < N fit, draw this
/// iteration's candidates, select, evaluate, append; finally refit on all N
/// points. The fit on n points depends only on the first n points and the
/// seeds, so a campaign to N is an exact prefix of a longer one.
inline CampaignTrace run_adaptive(const Simulator& sim, const CampaignConfig& cfg,
                                  const ModelObserver& observer = {}) {
    validate_campaign(cfg);
    const auto& space = sim.space();
    auto trace = std::make_shared<CampaignTrace>();
    trace->config = cfg;
    trace->simulator = sim.name();
    trace->initial_design = initial_design(space, cfg.n0, cfg.seed);

    auto abort = [&](const std::string& why) {
        trace->error = why;
        throw CampaignAborted(why, trace);
    };

    std::vector<double> y0;
    try {
        for (const auto& w : trace->initial_design) y0.push_back(detail::observe(sim, w, cfg.transform));
    } catch (const std::exception& e) {
        abort(std::string("simulator failure in initial design: ") + e.what());
    }
    trace->data = Dataset::make(space, trace->initial_design, y0, cfg.transform);

    std::optional<EzGpParams> warm;
    auto fit_now = [&]() -> FittedModel {
        auto fs = cfg.fit;
        fs.seed = detail::fit_seed(cfg.seed, trace->data.size());
        std::optional<FittedModel> m;
        try {
            m = detail::fit_with_retry(trace->data, fs, warm ? &*warm : nullptr);
        } catch (const std::exception& e) {
            abort(std::string("fit failure at n = ") + std::to_string(trace->data.size()) + ": " + e.what());
        }
        warm = m->params();
        if (observer) observer(*m);
        return std::move(*m);
    };

    for (std::size_t it = 0; trace->data.size() < cfg.N; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto model = fit_now();
        CampaignRecord rec;
        rec.iteration = it;
        rec.n_before = trace->data.size();
        rec.candidate_seed = derive_seed(cfg.seed, Stream::Candidates, it);
        const auto cands = candidate_set(space, cfg.per_combo, rec.candidate_seed);
        Suggestion sug;
        try {
            sug = suggest_next(model, cands, cfg.strategy, cfg.level, cfg.threads);
        } catch (const SelectionError& e) {
            abort(std::string("selection failure at iteration ") + std::to_string(it) + ": " + e.what());
        }
        try {
            rec.y = detail::observe(sim, sug.point, cfg.transform);
        } catch (const std::exception& e) {
            abort(std::string("simulator failure at iteration ") + std::to_string(it) + ": " + e.what());
        }
        rec.point = sug.point;
        rec.report = sug.report;
        rec.note = sug.note;
        rec.params = model.params();
        rec.nll = model.nll();
        rec.rel_jitter = model.rel_jitter();
        trace->data.add(rec.point, rec.y);
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace->records.push_back(std::move(rec));
    }
    trace->model = fit_now();
    trace->complete = true;
    return std::move(*trace);
}

/// Non-adaptive baseline: one balanced LHD design of size n, one fit.
inline CampaignTrace run_one_shot(const Simulator& sim, std::size_t n, std::uint64_t seed,
                                  const FitSettings& fit_settings = {},
                                  ResponseTransform transform = ResponseTransform::Identity) {
    if (n < 2) throw ValidationError("one-shot design needs at least 2 runs", "N");
    auto trace = std::make_shared<CampaignTrace>();
    trace->config.strategy.kind = StrategyKind::OneShot;
    trace->config.n0 = n;
    trace->config.N = n;
    trace->config.seed = seed;
    trace->config.fit = fit_settings;
    trace->config.transform = transform;
    trace->simulator = sim.name();
    trace->initial_design = one_shot_design(sim.space(), n, seed);
    std::vector<double> y;
    try {
        for (const auto& w : trace->initial_design) y.push_back(detail::observe(sim, w, transform));
    } catch (const std::exception& e) {
        trace->error = std::string("simulator failure: ") + e.what();
        throw CampaignAborted(trace->error, trace);
    }
    trace->data = Dataset::make(sim.space(), trace->initial_design, y, transform);
    auto fs = fit_settings;
    fs.seed = detail::fit_seed(seed, n);
    try {
        trace->model = detail::fit_with_retry(trace->data, fs, nullptr);
    } catch (const std::exception& e) {
        trace->error = std::string("fit failure: ") + e.what();
        throw CampaignAborted(trace->error, trace);
    }
    trace->complete = true;
    return std::move(*trace);
}

}  // namespace contour_seeker

#endif  // CONTOUR_SEEKER_ENGINE_HPP
