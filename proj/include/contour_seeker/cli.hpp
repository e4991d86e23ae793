#ifndef CONTOUR_SEEKER_CLI_HPP
#define CONTOUR_SEEKER_CLI_HPP

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "contour_seeker/bench.hpp"
#include "contour_seeker/engine.hpp"
#include "contour_seeker/io.hpp"

namespace contour_seeker::cli {

using io::json;

enum ExitCode : int { kOk = 0, kUserError = 2, kRuntimeError = 3 };

// ---------------------------------------------------------------------------
// Strict config reading: every key must be consumed, and every type error
// names the offending field.

class Fields {
public:
    Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw ValidationError(where("") + " must be a JSON object", name(""));
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        return has(key) ? convert<T>(j_.at(key), key) : fallback;
    }

    template <typename T>
    std::optional<T> opt(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return std::nullopt;
        return convert<T>(j_.at(key), key);
    }

    template <typename T>
    T req(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) throw ValidationError("missing required field '" + name(key) + "'", name(key));
        return convert<T>(j_.at(key), key);
    }

    /// Raw sub-document; marks the key as consumed.
    const json* raw(const std::string& key) {
        seen_.insert(key);
        return has(key) ? &j_.at(key) : nullptr;
    }

    std::string name(const std::string& key) const {
        if (prefix_.empty()) return key;
        return key.empty() ? prefix_ : prefix_ + "." + key;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) throw ValidationError("unknown field '" + name(k) + "'", name(k));
        }
    }

private:
    std::string where(const std::string& key) const { return name(key).empty() ? "config" : "'" + name(key) + "'"; }

    [[noreturn]] void bad(const std::string& key, const std::string& want) const {
        throw ValidationError("field '" + name(key) + "' must be " + want, name(key));
    }

    template <typename T>
    T convert(const json& v, const std::string& key) const {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) bad(key, "a number");
            const double d = v.get<double>();
            if (!std::isfinite(d)) bad(key, "finite");
            return d;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) bad(key, "true or false");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) bad(key, "a string");
            return v.get<std::string>();
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned()) bad(key, "a non-negative integer");
            return static_cast<T>(v.get<std::uint64_t>());
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array() || v.empty()) bad(key, "a non-empty array of numbers");
            std::vector<double> out;
            for (const auto& e : v) {
                if (!e.is_number()) bad(key, "a non-empty array of numbers");
                out.push_back(e.get<double>());
            }
            return out;
        } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
            if (!v.is_array() || v.empty()) bad(key, "a non-empty array of non-negative integers");
            std::vector<std::size_t> out;
            for (const auto& e : v) {
                if (!e.is_number_unsigned()) bad(key, "a non-empty array of non-negative integers");
                out.push_back(e.get<std::size_t>());
            }
            return out;
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            if (!v.is_array() || v.empty()) bad(key, "a non-empty array of strings");
            std::vector<std::string> out;
            for (const auto& e : v) {
                if (!e.is_string()) bad(key, "a non-empty array of strings");
                out.push_back(e.get<std::string>());
            }
            return out;
        } else {
            static_assert(sizeof(T) == 0, "unsupported field type");
        }
    }

    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Shared config pieces

struct LoadedSimulator {
    std::shared_ptr<const Simulator> sim;
    json resolved;
};

/// {"builtin": "example1"} or {"table": "grid.csv", "space": {...} | "hpc", "transform": "log"}.
inline LoadedSimulator load_simulator(const json& j, const std::filesystem::path& base_dir) {
    Fields f(j, "simulator");
    LoadedSimulator out;
    const auto builtin = f.opt<std::string>("builtin");
    const auto table = f.opt<std::string>("table");
    const json* space_j = f.raw("space");
    const auto transform_s = f.get<std::string>("transform", "identity");
    f.finish();
    if (builtin.has_value() == table.has_value()) {
        throw ValidationError("simulator needs exactly one of 'builtin' or 'table'", "simulator");
    }
    if (builtin) {
        if (space_j) throw ValidationError("builtin simulators declare their own space", "simulator.space");
        try {
            out.sim = builtin_simulator(*builtin);
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), "simulator.builtin");
        }
        out.resolved = {{"builtin", *builtin}};
        return out;
    }
    if (!space_j) throw ValidationError("tabular simulator needs 'space'", "simulator.space");
    DesignSpace space;
    if (space_j->is_string()) {
        if (space_j->get<std::string>() != "hpc") {
            throw ValidationError("simulator.space must be an object or \"hpc\"", "simulator.space");
        }
        space = hpc_design_space();
    } else {
        try {
            space = io::space_from_json(*space_j);
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), "simulator." + e.field());
        }
    }
    ResponseTransform t{};
    try {
        t = parse_transform(transform_s);
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), "simulator.transform");
    }
    std::filesystem::path path(*table);
    if (path.is_relative()) path = base_dir / path;
    out.sim = std::make_shared<TabularSimulator>(TabularSimulator::load_file(path.string(), space, t));
    out.resolved = {{"table", path.string()}, {"space", io::to_json(space)}, {"transform", to_string(t)}};
    return out;
}

inline FitSettings load_fit(const json* j, std::uint64_t seed) {
    FitSettings fs;
    fs.seed = seed;
    if (!j) return fs;
    Fields f(*j, "fit");
    fs.starts = f.get<std::size_t>("starts", fs.starts);
    fs.theta_min = f.get<double>("theta_min", fs.theta_min);
    fs.theta_max = f.get<double>("theta_max", fs.theta_max);
    fs.sigma2_min_rel = f.get<double>("sigma2_min_rel", fs.sigma2_min_rel);
    fs.sigma2_max_rel = f.get<double>("sigma2_max_rel", fs.sigma2_max_rel);
    fs.max_evaluations = f.get<std::size_t>("max_evaluations", fs.max_evaluations);
    fs.tolerance = f.get<double>("tolerance", fs.tolerance);
    f.finish();
    if (fs.starts < 1) throw ValidationError("fit.starts must be at least 1", "fit.starts");
    if (!(fs.theta_min > 0.0 && fs.theta_min < fs.theta_max)) {
        throw ValidationError("need 0 < fit.theta_min < fit.theta_max", "fit.theta_min");
    }
    if (!(fs.sigma2_min_rel > 0.0 && fs.sigma2_min_rel < fs.sigma2_max_rel)) {
        throw ValidationError("need 0 < fit.sigma2_min_rel < fit.sigma2_max_rel", "fit.sigma2_min_rel");
    }
    if (!(fs.tolerance > 0.0)) throw ValidationError("fit.tolerance must be positive", "fit.tolerance");
    return fs;
}

inline json fit_json(const FitSettings& fs) {
    return {{"starts", fs.starts},         {"theta_min", fs.theta_min},
            {"theta_max", fs.theta_max},   {"sigma2_min_rel", fs.sigma2_min_rel},
            {"sigma2_max_rel", fs.sigma2_max_rel}, {"max_evaluations", fs.max_evaluations},
            {"tolerance", fs.tolerance}};
}

/// Command-line values that override the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> level;
    std::optional<std::string> strategy;
    std::optional<double> delta;
    std::optional<double> rho;
    std::optional<double> alpha;
    std::optional<double> ei_alpha;
    std::optional<std::size_t> per_combo;
    std::optional<std::string> out;
    std::optional<std::size_t> replicates;
    std::optional<std::size_t> parallel;
};

inline Strategy load_tuning(Fields& f, const Overrides& o) {
    Strategy s;
    s.alpha = o.alpha.value_or(f.get<double>("alpha", s.alpha));
    s.delta = o.delta ? o.delta : f.opt<double>("delta");
    s.rho = o.rho.value_or(f.get<double>("rho", s.rho));
    s.ei_alpha = o.ei_alpha.value_or(f.get<double>("ei_alpha", s.ei_alpha));
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)", "alpha");
    if (s.delta && !(*s.delta > 0.0)) throw ValidationError("delta must be positive", "delta");
    if (!(s.rho >= 0.0)) throw ValidationError("rho must be non-negative", "rho");
    if (!(s.ei_alpha >= 0.0)) throw ValidationError("ei_alpha must be non-negative", "ei_alpha");
    return s;
}

inline json tuning_json(const Strategy& s) {
    return {{"alpha", s.alpha}, {"delta", s.delta ? json(*s.delta) : json(nullptr)}, {"rho", s.rho},
            {"ei_alpha", s.ei_alpha}};
}

inline StrategyKind strategy_field(const std::string& s, const std::string& field) {
    try {
        return parse_strategy(s);
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), field);
    }
}

inline ResponseTransform transform_field(const std::string& s, const std::string& field) {
    try {
        return parse_transform(s);
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), field);
    }
}

inline std::filesystem::path config_dir(const std::string& path) {
    auto dir = std::filesystem::path(path).parent_path();
    return dir.empty() ? std::filesystem::path(".") : dir;
}

inline std::size_t thread_count(std::optional<std::size_t> requested) {
    return std::min(requested.value_or(1), max_threads());
}

/// Maps exceptions to the exit-code contract and prints an error document.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    auto report = [&](const char* kind, const std::string& msg, const std::string& field) {
        json e = {{"kind", kind}, {"message", msg}};
        if (!field.empty()) e["field"] = field;
        err << json{{"error", e}}.dump() << '\n';
    };
    try {
        return fn();
    } catch (const IngestError& e) {
        json doc = {{"kind", "ingest"}, {"message", e.what()}, {"line", e.line()}};
        err << json{{"error", doc}}.dump() << '\n';
        return kUserError;
    } catch (const ValidationError& e) {
        report("validation", e.what(), e.field());
        return kUserError;
    } catch (const CampaignAborted& e) {
        report("campaign", e.what(), "");
        return kRuntimeError;
    } catch (const std::exception& e) {
        report("runtime", e.what(), "");
        return kRuntimeError;
    }
}

// ---------------------------------------------------------------------------
// run

struct RunConfig {
    LoadedSimulator simulator;
    CampaignConfig campaign;
    std::string out;
    json resolved;
};

inline RunConfig load_run_config(const json& j, const Overrides& o, const std::filesystem::path& base_dir) {
    Fields f(j, "");
    RunConfig rc;
    const json* sim_j = f.raw("simulator");
    if (!sim_j) throw ValidationError("missing required field 'simulator'", "simulator");
    rc.simulator = load_simulator(*sim_j, base_dir);
    auto& c = rc.campaign;
    c.strategy = load_tuning(f, o);
    c.strategy.kind = strategy_field(o.strategy.value_or(f.get<std::string>("strategy", "rcc")), "strategy");
    c.level = o.level ? *o.level : f.req<double>("level");
    c.n0 = f.get<std::size_t>("n0", c.n0);
    c.N = f.req<std::size_t>("N");
    c.per_combo = o.per_combo.value_or(f.get<std::size_t>("candidates_per_combo", c.per_combo));
    c.seed = o.seed.value_or(f.get<std::uint64_t>("seed", 0));
    c.transform = transform_field(f.get<std::string>("response_transform", "identity"), "response_transform");
    c.fit = load_fit(f.raw("fit"), c.seed);
    c.threads = thread_count(f.opt<std::size_t>("threads"));
    rc.out = o.out.value_or(f.get<std::string>("out", "run"));
    f.finish();

    if (c.n0 < 2) throw ValidationError("n0 must be at least 2", "n0");
    if (c.n0 >= c.N) throw ValidationError("n0 must be smaller than N", "n0");
    if (c.per_combo < 1) throw ValidationError("candidates_per_combo must be at least 1", "candidates_per_combo");

    rc.resolved = {{"schema", io::kSchemaVersion},
                   {"simulator", rc.simulator.resolved},
                   {"strategy", to_string(c.strategy.kind)},
                   {"level", c.level},
                   {"n0", c.n0},
                   {"N", c.N},
                   {"candidates_per_combo", c.per_combo},
                   {"seed", c.seed},
                   {"response_transform", to_string(c.transform)}};
    rc.resolved.update(tuning_json(c.strategy));
    rc.resolved["fit"] = fit_json(c.fit);
    rc.resolved["threads"] = c.threads;
    rc.resolved["out"] = rc.out;
    return rc;
}

inline int cmd_run(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto rc = load_run_config(io::read_json_file(config_path), o, config_dir(config_path));
        const std::filesystem::path dir(rc.out);
        std::filesystem::create_directories(dir);
        io::write_json_file(dir / "config.json", rc.resolved);
        const auto& space = rc.simulator.sim->space();
        try {
            const auto trace = rc.campaign.strategy.kind == StrategyKind::OneShot
                                   ? run_one_shot(*rc.simulator.sim, rc.campaign.N, rc.campaign.seed,
                                                  rc.campaign.fit, rc.campaign.transform)
                                   : run_adaptive(*rc.simulator.sim, rc.campaign);
            io::write_trace(dir, trace, space);
            out << json{{"status", "ok"},
                        {"out", dir.string()},
                        {"n", trace.data.size()},
                        {"iterations", trace.records.size()},
                        {"nll", trace.model ? json(trace.model->nll()) : json(nullptr)}}
                       .dump()
                << '\n';
        } catch (const CampaignAborted& e) {
            io::write_trace(dir, e.partial(), space);
            throw;
        }
        return int{kOk};
    });
}

// ---------------------------------------------------------------------------
// suggest

struct SuggestOptions {
    std::string model;
    std::optional<std::string> candidates;  // CSV; otherwise generated
    Overrides o;
};

inline int cmd_suggest(const SuggestOptions& so, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!so.o.level) throw ValidationError("--level is required", "level");
        const auto model = io::model_from_json(io::read_json_file(so.model));
        const auto& space = model.space();
        CandidateSet cands;
        if (so.candidates) {
            auto table = io::read_points_file(*so.candidates, space);
            cands.points = std::move(table.points);
        } else {
            cands = candidate_set(space, so.o.per_combo.value_or(100),
                                  derive_seed(so.o.seed.value_or(0), Stream::Candidates, model.data().size()));
        }
        Strategy s;
        s.kind = strategy_field(so.o.strategy.value_or("rcc"), "strategy");
        if (s.kind == StrategyKind::OneShot) throw ValidationError("one-shot has no selection step", "strategy");
        s.alpha = so.o.alpha.value_or(s.alpha);
        s.delta = so.o.delta;
        s.rho = so.o.rho.value_or(s.rho);
        s.ei_alpha = so.o.ei_alpha.value_or(s.ei_alpha);
        const auto sug = suggest_next(model, cands, s, *so.o.level);
        json x = json::array();
        for (double v : space.to_physical(sug.point.x)) x.push_back(v);
        auto finalist = [](const std::optional<Finalist>& f) -> json {
            if (!f) return nullptr;
            return {{"index", f->index}, {"mean", f->mean}, {"sd", f->sd}, {"acquisition", f->acquisition},
                    {"score", f->score}};
        };
        const auto& r = sug.report;
        out << json{{"point", {{"x", x}, {"z", sug.point.z}}},
                    {"report",
                     {{"strategy", to_string(s.kind)},
                      {"chosen_index", r.chosen},
                      {"region", to_string(r.region)},
                      {"mean", r.selected.mean},
                      {"sd", r.selected.sd},
                      {"acquisition", r.selected.acquisition},
                      {"score", r.selected.score},
                      {"a1_finalist", finalist(r.a1_finalist)},
                      {"a2_finalist", finalist(r.a2_finalist)},
                      {"a1_size", r.a1_size},
                      {"a2_size", r.a2_size},
                      {"a1_min_size", r.a1_min_size},
                      {"beta", r.beta},
                      {"delta", r.delta},
                      {"candidates", cands.points.size()},
                      {"note", sug.note}}}}
                   .dump()
            << '\n';
        return int{kOk};
    });
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
    std::string data;
    std::optional<std::string> space;    // JSON file with a space object
    std::optional<std::string> builtin;  // or a builtin simulator's space
    std::string transform = "identity";
    std::optional<std::size_t> starts;
    std::optional<std::uint64_t> seed;
    std::string out = "model.json";
};

inline int cmd_fit(const FitOptions& fo, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (fo.space.has_value() == fo.builtin.has_value()) {
            throw ValidationError("give exactly one of --space or --builtin", "space");
        }
        const auto space = fo.space ? io::space_from_json(io::read_json_file(*fo.space))
                                    : builtin_simulator(*fo.builtin)->space();
        const auto t = transform_field(fo.transform, "transform");
        auto table = io::read_points_file(fo.data, space);
        if (table.y.empty() && !table.points.empty()) throw ValidationError("data file has no 'y' column", "y");
        for (auto& v : table.y) v = apply_transform(t, v);
        const auto data = Dataset::make(space, std::move(table.points), std::move(table.y), t);
        FitSettings fs;
        fs.seed = fo.seed.value_or(0);
        if (fo.starts) fs.starts = *fo.starts;
        const auto model = fit(data, fs);
        std::filesystem::path path(fo.out);
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        io::write_json_file(path, io::to_json(model));
        out << json{{"nll", model.nll()}, {"n", data.size()}, {"model", path.string()}}.dump() << '\n';
        return int{kOk};
    });
}

// ---------------------------------------------------------------------------
// bench

struct LoadedBench {
    BenchConfig cfg;
    std::string out;
    json resolved;
};

inline LoadedBench load_bench_config(const json& j, const Overrides& o, const std::filesystem::path& base_dir) {
    Fields f(j, "");
    LoadedBench lb;
    auto& c = lb.cfg;
    const json* sim_j = f.raw("simulator");
    if (!sim_j) throw ValidationError("missing required field 'simulator'", "simulator");
    auto sim = load_simulator(*sim_j, base_dir);
    c.simulator = sim.sim;
    std::vector<std::string> names = f.req<std::vector<std::string>>("strategies");
    if (o.strategy) names = {*o.strategy};
    for (const auto& s : names) c.strategies.push_back(strategy_field(s, "strategies"));
    c.budgets = f.req<std::vector<std::size_t>>("N");
    c.levels = o.level ? std::vector<double>{*o.level} : f.req<std::vector<double>>("levels");
    c.n0 = f.get<std::size_t>("n0", c.n0);
    c.replicates = o.replicates.value_or(f.get<std::size_t>("replicates", c.replicates));
    c.per_combo = o.per_combo.value_or(f.get<std::size_t>("candidates_per_combo", c.per_combo));
    c.reference_per_combo = f.get<std::size_t>("reference_per_combo", c.reference_per_combo);
    c.eps = f.get<double>("eps", c.eps);
    c.tuning = load_tuning(f, o);
    c.transform = transform_field(f.get<std::string>("response_transform", "identity"), "response_transform");
    c.seed = o.seed.value_or(f.get<std::uint64_t>("seed", 0));
    c.fit = load_fit(f.raw("fit"), 0);
    c.threads = thread_count(o.parallel ? o.parallel : f.opt<std::size_t>("parallel"));
    lb.out = o.out.value_or(f.get<std::string>("out", "bench"));
    f.finish();

    if (c.n0 < 2) throw ValidationError("n0 must be at least 2", "n0");
    for (auto N : c.budgets) {
        if (N <= c.n0) throw ValidationError("every N must exceed n0", "N");
    }
    if (c.replicates < 1) throw ValidationError("replicates must be at least 1", "replicates");
    if (!(c.eps > 0.0)) throw ValidationError("eps must be positive", "eps");

    json strategies = json::array();
    for (auto k : c.strategies) strategies.push_back(to_string(k));
    lb.resolved = {{"schema", io::kSchemaVersion},
                   {"simulator", sim.resolved},
                   {"strategies", strategies},
                   {"N", c.budgets},
                   {"levels", c.levels},
                   {"n0", c.n0},
                   {"replicates", c.replicates},
                   {"candidates_per_combo", c.per_combo},
                   {"reference_per_combo", c.reference_per_combo},
                   {"eps", c.eps},
                   {"seed", c.seed},
                   {"response_transform", to_string(c.transform)}};
    lb.resolved.update(tuning_json(c.tuning));
    lb.resolved["fit"] = fit_json(c.fit);
    lb.resolved["parallel"] = c.threads;
    lb.resolved["out"] = lb.out;
    return lb;
}

inline int cmd_bench(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto lb = load_bench_config(io::read_json_file(config_path), o, config_dir(config_path));
        const std::filesystem::path dir(lb.out);
        std::filesystem::create_directories(dir);
        io::write_json_file(dir / "config.json", lb.resolved);
        const auto res = replicate_benchmark(lb.cfg);
        io::write_text(dir / "results.csv", io::results_csv(res));
        io::write_text(dir / "summary.csv", io::summary_csv(res));
        io::write_text(dir / "initial_designs.csv", io::initial_designs_csv(res, lb.cfg.simulator->space()));
        std::size_t failed = 0;
        for (const auto& r : res.rows) failed += r.ok ? 0 : 1;
        out << json{{"status", "ok"}, {"out", dir.string()}, {"rows", res.rows.size()}, {"failed", failed}}.dump()
            << '\n';
        return int{kOk};
    });
}

// ---------------------------------------------------------------------------
// verify

struct LoadedVerify {
    CoverageConfig cfg;
    std::string out;
    json resolved;
};

/// Known-parameter process: either a full parameter object or
/// {"variance": v, "rate": r, "mean": m} applied to every parameter.
inline LoadedVerify load_verify_config(const json& j, const Overrides& o) {
    Fields f(j, "");
    LoadedVerify lv;
    auto& c = lv.cfg;
    const auto builtin = f.opt<std::string>("builtin");
    const json* space_j = f.raw("space");
    if (builtin.has_value() == (space_j != nullptr)) {
        throw ValidationError("give exactly one of 'builtin' or 'space'", "space");
    }
    c.space = builtin ? builtin_simulator(*builtin)->space() : io::space_from_json(*space_j);
    const json* pj = f.raw("params");
    if (!pj) throw ValidationError("missing required field 'params'", "params");
    if (pj->contains("sigma2")) {
        c.params = io::params_from_json(*pj);
    } else {
        Fields pf(*pj, "params");
        const double var = pf.get<double>("variance", 1.0);
        const double rate = pf.get<double>("rate", 1.0);
        const double mean = pf.get<double>("mean", 0.0);
        pf.finish();
        if (!(var > 0.0) || !(rate > 0.0)) throw ValidationError("variance and rate must be positive", "params");
        c.params = EzGpParams::uniform(c.space, var, rate, mean);
    }
    if (!c.params.conforms_to(c.space)) throw ValidationError("params do not match the space", "params");
    c.level = o.level ? *o.level : f.get<double>("level", 0.0);
    c.alpha = o.alpha.value_or(f.get<double>("alpha", 0.1));
    c.draws = f.get<std::size_t>("draws", 500);
    c.grid_per_combo = o.per_combo.value_or(f.get<std::size_t>("grid_per_combo", 50));
    c.n_train = f.get<std::size_t>("n_train", 9);
    c.seed = o.seed.value_or(f.get<std::uint64_t>("seed", 0));
    lv.out = o.out.value_or(f.get<std::string>("out", "verify"));
    f.finish();
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)", "alpha");

    lv.resolved = {{"schema", io::kSchemaVersion},
                   {"space", io::to_json(c.space)},
                   {"params", io::to_json(c.params)},
                   {"level", c.level},
                   {"alpha", c.alpha},
                   {"draws", c.draws},
                   {"grid_per_combo", c.grid_per_combo},
                   {"n_train", c.n_train},
                   {"seed", c.seed},
                   {"out", lv.out}};
    return lv;
}

inline int cmd_verify(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto lv = load_verify_config(io::read_json_file(config_path), o);
        const std::filesystem::path dir(lv.out);
        std::filesystem::create_directories(dir);
        io::write_json_file(dir / "config.json", lv.resolved);
        const auto res = coverage_check(lv.cfg);
        io::write_text(dir / "coverage.csv", io::coverage_csv(res, lv.cfg.level, lv.cfg.alpha));
        out << json{{"coverage", res.coverage},
                    {"target", res.target},
                    {"hits", res.hits},
                    {"draws", res.draws},
                    {"skipped", res.skipped},
                    {"gap_violations", res.gap_violations}}
                   .dump()
            << '\n';
        return int{kOk};
    });
}

// ---------------------------------------------------------------------------
// Entry point

/// Parses argv-style arguments (program name excluded) and dispatches.
inline int main_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sequential contour estimation for mixed quantitative and qualitative inputs"};
    app.require_subcommand(1);

    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Base seed");
        sub->add_option("--level", o.level, "Contour level a");
        sub->add_option("--strategy", o.strategy, "rcc, rcc-ei, arsd, ecl, ei, lcb, one-shot");
        sub->add_option("--delta", o.delta, "Arbitration threshold");
        sub->add_option("--rho", o.rho, "LCB exploration weight");
        sub->add_option("--alpha", o.alpha, "Confidence level parameter");
        sub->add_option("--ei-alpha", o.ei_alpha, "EI band multiplier");
        sub->add_option("--candidates-per-combo", o.per_combo, "Candidates per level combination");
        sub->add_option("--out", o.out, "Output path");
    };

    std::string config;
    auto* run = app.add_subcommand("run", "Run one campaign from a config file");
    run->add_option("config", config, "Campaign config (JSON)")->required();
    add_common(run);

    SuggestOptions so;
    auto* suggest = app.add_subcommand("suggest", "Suggest the next run from a saved model");
    suggest->add_option("--model", so.model, "model.json")->required();
    suggest->add_option("--candidates", so.candidates, "Candidate CSV (x_1.., z_..)");
    add_common(suggest);

    FitOptions fo;
    auto* fitc = app.add_subcommand("fit", "Fit an EzGP to a data CSV");
    fitc->add_option("--data", fo.data, "Data CSV (x_1.., z_.., y)")->required();
    fitc->add_option("--space", fo.space, "Space JSON");
    fitc->add_option("--builtin", fo.builtin, "Use a builtin simulator's space");
    fitc->add_option("--transform", fo.transform, "identity or log");
    fitc->add_option("--starts", fo.starts, "Optimizer starts");
    fitc->add_option("--seed", fo.seed, "Seed");
    fitc->add_option("--out", fo.out, "Output model path");

    auto* bench = app.add_subcommand("bench", "Replicated benchmark from a config file");
    bench->add_option("config", config, "Benchmark config (JSON)")->required();
    add_common(bench);
    bench->add_option("--replicates", o.replicates, "Replicates per cell");
    bench->add_option("--parallel", o.parallel, "Worker threads for replicates");

    auto* verify = app.add_subcommand("verify", "Monte-Carlo coverage check of the confidence bounds");
    verify->add_option("config", config, "Theory config (JSON)")->required();
    add_common(verify);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        err << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << '\n';
        return kUserError;
    }

    if (run->parsed()) return cmd_run(config, o, out, err);
    if (suggest->parsed()) {
        so.o = o;
        return cmd_suggest(so, out, err);
    }
    if (fitc->parsed()) return cmd_fit(fo, out, err);
    if (bench->parsed()) return cmd_bench(config, o, out, err);
    return cmd_verify(config, o, out, err);
}

}  // namespace contour_seeker::cli

#endif  // CONTOUR_SEEKER_CLI_HPP
