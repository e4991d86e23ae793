#ifndef CONTOUR_SEEKER_BENCH_HPP
#define CONTOUR_SEEKER_BENCH_HPP

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "contour_seeker/acquisition.hpp"
#include "contour_seeker/csv.hpp"
#include "contour_seeker/design_space.hpp"
#include "contour_seeker/engine.hpp"
#include "contour_seeker/ezgp.hpp"
#include "contour_seeker/parallel.hpp"

namespace contour_seeker {

// ---------------------------------------------------------------------------
// Simulators

/// Closed-form response f(x_physical, z).
class FunctionSimulator : public Simulator {
public:
    using Fn = std::function<double(const std::vector<double>&, const std::vector<int>&)>;

    FunctionSimulator(std::string name, DesignSpace space, Fn fn)
        : name_(std::move(name)), space_(std::move(space)), fn_(std::move(fn)) {}

    const DesignSpace& space() const override { return space_; }
    std::string name() const override { return name_; }

    double evaluate(const MixedPoint& w) const override {
        if (!space_.contains(w)) throw SimulatorError("point outside the declared design space");
        return fn_(space_.to_physical(w.x), w.z);
    }

private:
    std::string name_;
    DesignSpace space_;
    Fn fn_;
};

namespace builtin {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// p = 1, q = 1 (3 levels) on x in [0, 1]. Range [-1, 3].
inline double example1(double x, int z) {
    switch (z) {
        case 1: return 2.0 - std::cos(kTwoPi * x);
        case 2: return 1.0 - std::cos(2.0 * kTwoPi * x);
        default: return std::cos(kTwoPi * x);
    }
}

/// p = 2, q = 2 (3 levels each): f = i(z1) + g(z2).
inline double example2(double x1, double x2, int z1, int z2) {
    double i = 0.0;
    switch (z1) {
        case 1: i = x1 + x2 * x2; break;
        case 2: i = x1 * x1 + x2; break;
        default: i = x1 * x1 + x2 * x2; break;
    }
    double g = 0.0;
    switch (z2) {
        case 1: g = std::cos(x1) + std::cos(2.0 * x2); break;
        case 2: g = std::cos(2.0 * x1) + std::cos(x2); break;
        default: g = std::cos(2.0 * x1) + std::cos(2.0 * x2); break;
    }
    return i + g;
}

/// p = 3, q = 3 (3 levels each): f = i(z1) + g(z2) + h(z3). Some levels
/// share a formula; that is part of the test function.
inline double example3(double x1, double x2, double x3, int z1, int z2, int z3) {
    double i = 0.0;
    switch (z1) {
        case 1: i = x1 + x2 * x2 + x3; break;
        case 2: i = x1 * x1 + x2 + x3; break;
        default: i = x3 + x1 + x2 * x2; break;
    }
    double g = 0.0;
    switch (z2) {
        case 1:
        case 2: g = std::cos(x1) + std::cos(2.0 * x2) + std::cos(x3); break;
        default: g = std::cos(2.0 * x1) + std::cos(x2) + std::cos(x3); break;
    }
    double h = 0.0;
    switch (z3) {
        case 1:
        case 2: h = std::sin(x1) + std::sin(2.0 * x2) + std::sin(x3); break;
        default: h = std::sin(2.0 * x1) + std::sin(x2) + std::sin(x3); break;
    }
    return i + g + h;
}

}  // namespace builtin

inline std::vector<std::string> builtin_names() { return {"example1", "example2", "example3"}; }

/// The three closed-form test problems, each on [0, 1]^p.
inline std::shared_ptr<const Simulator> builtin_simulator(const std::string& name) {
    auto unit = [](std::size_t p, std::vector<int> levels) {
        return DesignSpace::make(std::vector<Interval>(p, Interval{0.0, 1.0}), std::move(levels));
    };
    if (name == "example1") {
        return std::make_shared<FunctionSimulator>(
            name, unit(1, {3}), [](const auto& x, const auto& z) { return builtin::example1(x[0], z[0]); });
    }
    if (name == "example2") {
        return std::make_shared<FunctionSimulator>(name, unit(2, {3, 3}), [](const auto& x, const auto& z) {
            return builtin::example2(x[0], x[1], z[0], z[1]);
        });
    }
    if (name == "example3") {
        return std::make_shared<FunctionSimulator>(name, unit(3, {3, 3, 3}), [](const auto& x, const auto& z) {
            return builtin::example3(x[0], x[1], x[2], z[0], z[1], z[2]);
        });
    }
    throw ValidationError("unknown builtin simulator '" + name + "'", "simulator");
}

/// Four quantitative HPC settings (CPU GHz, file KB, record KB, threads) and
/// the six-level IO operation mode. Grids are treated as continuous ranges.
inline DesignSpace hpc_design_space() {
    return DesignSpace::make({{1.2, 3.5}, {4.0, 65536.0}, {4.0, 16384.0}, {1.0, 64.0}}, {6});
}

/// Lookup simulator over a measured grid: the response of the nearest row
/// with identical levels, by Euclidean distance on normalized coordinates.
/// Ties go to the earlier row.
class TabularSimulator : public Simulator {
public:
    struct Row {
        std::vector<double> x;  // normalized
        std::vector<int> z;
        double y = 0.0;          // transformed at load
    };

    TabularSimulator(DesignSpace space, std::vector<Row> rows, std::string name = "table")
        : space_(std::move(space)), rows_(std::move(rows)), name_(std::move(name)) {}

    /// Columns x_1..x_p (physical units), z_1..z_q, y; '#' lines ignored.
    static TabularSimulator load(std::istream& in, const DesignSpace& space,
                                 ResponseTransform transform = ResponseTransform::Identity,
                                 std::string name = "table") {
        const auto table = csv::read(in);
        std::vector<std::size_t> xcol, zcol;
        for (std::size_t k = 0; k < space.p(); ++k) xcol.push_back(table.column("x_" + std::to_string(k + 1)));
        for (std::size_t h = 0; h < space.q(); ++h) zcol.push_back(table.column("z_" + std::to_string(h + 1)));
        const std::size_t ycol = table.column("y");
        std::vector<Row> rows;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& cells = table.rows[r];
            const std::size_t line = table.line_numbers[r];
            std::vector<double> phys;
            for (auto c : xcol) phys.push_back(csv::parse_double(cells[c], line));
            Row row;
            row.x = space.to_normalized(phys);
            for (auto c : zcol) row.z.push_back(csv::parse_int(cells[c], line));
            const double raw = csv::parse_double(cells[ycol], line);
            if (!space.contains(MixedPoint{row.x, row.z})) {
                throw IngestError("line " + std::to_string(line) + ": row lies outside the declared space", line);
            }
            try {
                row.y = apply_transform(transform, raw);
            } catch (const ValidationError& e) {
                throw IngestError("line " + std::to_string(line) + ": " + e.what(), line);
            }
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw IngestError("table has no data rows", 0);
        return TabularSimulator(space, std::move(rows), std::move(name));
    }

    static TabularSimulator load_file(const std::string& path, const DesignSpace& space,
                                      ResponseTransform transform = ResponseTransform::Identity) {
        std::ifstream in(path);
        if (!in) throw IngestError("cannot open table '" + path + "'", 0);
        return load(in, space, transform, path);
    }

    const DesignSpace& space() const override { return space_; }
    std::string name() const override { return name_; }
    const std::vector<Row>& rows() const { return rows_; }

    /// Index of the row evaluate() would use.
    std::size_t nearest_row(const MixedPoint& w) const {
        std::size_t best = rows_.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            if (rows_[r].z != w.z) continue;
            double d = 0.0;
            for (std::size_t k = 0; k < w.x.size(); ++k) d += (rows_[r].x[k] - w.x[k]) * (rows_[r].x[k] - w.x[k]);
            if (d < best_d) {
                best_d = d;
                best = r;
            }
        }
        if (best == rows_.size()) throw SimulatorError("table has no row for the requested level combination");
        return best;
    }

    double evaluate(const MixedPoint& w) const override { return rows_[nearest_row(w)].y; }

private:
    DesignSpace space_;
    std::vector<Row> rows_;
    std::string name_;
};

// ---------------------------------------------------------------------------
// Accuracy metric

/// Reference points whose true response lies within eps of the level.
struct ReferenceContour {
    std::vector<MixedPoint> points;
    std::vector<double> truth;
    double level = 0.0;
    double eps = 0.0;
};

inline ReferenceContour reference_contour(const Simulator& sim, double level, double eps, std::size_t per_combo,
                                          std::uint64_t seed,
                                          ResponseTransform transform = ResponseTransform::Identity) {
    if (!(eps > 0.0)) throw ValidationError("reference band eps must be positive", "eps");
    ReferenceContour ref;
    ref.level = level;
    ref.eps = eps;
    const auto cands = candidate_set(sim.space(), per_combo, derive_seed(seed, Stream::Reference));
    for (const auto& w : cands.points) {
        const double f = apply_transform(transform, sim.evaluate(w));
        if (std::abs(f - level) <= eps) {
            ref.points.push_back(w);
            ref.truth.push_back(f);
        }
    }
    if (ref.points.empty()) {
        throw MetricError("no reference point within eps of level " + csv::fmt(level) +
                          "; increase eps or the reference size");
    }
    return ref;
}

/// Mean absolute error of the predictive mean over the reference contour.
inline double m_c0(const FittedModel& model, const ReferenceContour& ref) {
    if (ref.points.empty()) throw MetricError("empty reference contour");
    double s = 0.0;
    for (std::size_t i = 0; i < ref.points.size(); ++i) s += std::abs(ref.truth[i] - model.predict(ref.points[i]).mean);
    return s / static_cast<double>(ref.points.size());
}

// ---------------------------------------------------------------------------
// Replicated benchmark

struct BenchConfig {
    std::shared_ptr<const Simulator> simulator;
    std::vector<StrategyKind> strategies;
    std::vector<std::size_t> budgets;  // N values
    std::vector<double> levels;
    std::size_t n0 = 9;
    std::size_t replicates = 10;
    std::size_t per_combo = 100;
    std::size_t reference_per_combo = 200;
    double eps = 0.05;
    Strategy tuning;  // alpha, delta, rho, ei_alpha; kind ignored
    FitSettings fit;
    ResponseTransform transform = ResponseTransform::Identity;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct BenchRow {
    StrategyKind strategy = StrategyKind::Rcc;
    double level = 0.0;
    std::size_t N = 0;
    std::size_t replicate = 0;
    double mc0 = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
    bool ok = false;
    std::string error;
};

struct BenchSummary {
    StrategyKind strategy = StrategyKind::Rcc;
    double level = 0.0;
    std::size_t N = 0;
    double mean_mc0 = std::numeric_limits<double>::quiet_NaN();
    std::size_t ok = 0;
    std::size_t failed = 0;
    bool valid = false;  // failures at most 20% of replicates
    double relative_efficiency = std::numeric_limits<double>::quiet_NaN();
};

/// Initial dataset of one adaptive run, for fairness audits.
struct InitialDesignRecord {
    StrategyKind strategy = StrategyKind::Rcc;
    double level = 0.0;
    std::size_t replicate = 0;
    std::vector<MixedPoint> points;
    std::vector<double> y;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::vector<BenchSummary> summary;
    std::vector<InitialDesignRecord> initial_designs;
};

/// Seed shared by every strategy in replicate r.
inline std::uint64_t replicate_seed(std::uint64_t base, std::size_t r) {
    return derive_seed(base, Stream::Replicate, r);
}

inline std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows, std::size_t replicates) {
    struct Acc {
        double sum = 0.0;
        std::size_t ok = 0, failed = 0;
    };
    std::map<std::tuple<int, double, std::size_t>, Acc> cells;
    std::vector<std::tuple<int, double, std::size_t>> order;
    for (const auto& r : rows) {
        const auto key = std::make_tuple(static_cast<int>(r.strategy), r.level, r.N);
        auto [it, inserted] = cells.try_emplace(key);
        if (inserted) order.push_back(key);
        if (r.ok) {
            it->second.sum += r.mc0;
            ++it->second.ok;
        } else {
            ++it->second.failed;
        }
    }
    std::vector<BenchSummary> out;
    for (const auto& key : order) {
        const auto& acc = cells[key];
        BenchSummary s;
        s.strategy = static_cast<StrategyKind>(std::get<0>(key));
        s.level = std::get<1>(key);
        s.N = std::get<2>(key);
        s.ok = acc.ok;
        s.failed = acc.failed;
        if (acc.ok) s.mean_mc0 = acc.sum / static_cast<double>(acc.ok);
        s.valid = acc.ok > 0 && static_cast<double>(acc.failed) <= 0.2 * static_cast<double>(replicates);
        out.push_back(s);
    }
    for (auto& s : out) {
        for (const auto& base : out) {
            if (base.strategy == StrategyKind::OneShot && base.level == s.level && base.N == s.N && base.valid &&
                s.valid) {
                s.relative_efficiency = base.mean_mc0 / s.mean_mc0;
            }
        }
    }
    return out;
}

/// Runs every (strategy, level, N, replicate) cell with paired seeds: within a
/// replicate every adaptive strategy sees the same initial design and the same
/// candidate streams. Adaptive runs go once to max(N) and are scored at each
/// budget from the model fitted on the first N points.
inline BenchResult replicate_benchmark(const BenchConfig& cfg) {
    if (!cfg.simulator) throw ValidationError("benchmark needs a simulator", "simulator");
    if (cfg.strategies.empty()) throw ValidationError("benchmark needs at least one strategy", "strategies");
    if (cfg.budgets.empty()) throw ValidationError("benchmark needs at least one budget N", "N");
    if (cfg.levels.empty()) throw ValidationError("benchmark needs at least one contour level", "levels");
    if (cfg.replicates == 0) throw ValidationError("benchmark needs at least one replicate", "replicates");
    for (auto N : cfg.budgets) {
        if (N < cfg.n0) throw ValidationError("every N must be at least n0", "N");
    }
    const auto& sim = *cfg.simulator;
    const std::size_t max_n = *std::max_element(cfg.budgets.begin(), cfg.budgets.end());

    std::vector<ReferenceContour> refs;
    for (double a : cfg.levels) {
        refs.push_back(reference_contour(sim, a, cfg.eps, cfg.reference_per_combo, cfg.seed, cfg.transform));
    }

    struct Unit {
        std::size_t level_index;
        StrategyKind strategy;
        std::size_t replicate;
    };
    std::vector<Unit> units;
    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
        for (auto s : cfg.strategies) {
            for (std::size_t r = 0; r < cfg.replicates; ++r) units.push_back({li, s, r});
        }
    }

    std::vector<std::vector<BenchRow>> unit_rows(units.size());
    std::vector<std::optional<InitialDesignRecord>> unit_init(units.size());
    parallel_for(units.size(), cfg.threads, [&](std::size_t u) {
        const auto& unit = units[u];
        const double a = cfg.levels[unit.level_index];
        const auto& ref = refs[unit.level_index];
        const auto seed = replicate_seed(cfg.seed, unit.replicate);
        auto row_for = [&](std::size_t N) {
            BenchRow row;
            row.strategy = unit.strategy;
            row.level = a;
            row.N = N;
            row.replicate = unit.replicate;
            return row;
        };
        auto& rows = unit_rows[u];

        if (unit.strategy == StrategyKind::OneShot) {
            for (auto N : cfg.budgets) {
                auto row = row_for(N);
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    auto tr = run_one_shot(sim, N, seed, cfg.fit, cfg.transform);
                    row.mc0 = m_c0(*tr.model, ref);
                    row.ok = true;
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                rows.push_back(row);
            }
            return;
        }

        CampaignConfig cc;
        cc.strategy = cfg.tuning;
        cc.strategy.kind = unit.strategy;
        cc.level = a;
        cc.n0 = cfg.n0;
        cc.N = max_n;
        cc.per_combo = cfg.per_combo;
        cc.seed = seed;
        cc.fit = cfg.fit;
        cc.transform = cfg.transform;

        std::map<std::size_t, double> scores;
        std::map<std::size_t, double> elapsed;
        const auto t0 = std::chrono::steady_clock::now();
        auto observer = [&](const FittedModel& m) {
            const auto n = m.data().size();
            if (std::find(cfg.budgets.begin(), cfg.budgets.end(), n) == cfg.budgets.end()) return;
            scores[n] = m_c0(m, ref);
            elapsed[n] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };
        std::string error;
        const CampaignTrace* partial = nullptr;
        std::optional<CampaignTrace> trace;
        try {
            trace = run_adaptive(sim, cc, observer);
            partial = &*trace;
        } catch (const CampaignAborted& e) {
            error = e.what();
            trace = e.partial();
            partial = &*trace;
        } catch (const std::exception& e) {
            error = e.what();
        }
        if (partial != nullptr && partial->data.size() >= cfg.n0) {
            InitialDesignRecord rec;
            rec.strategy = unit.strategy;
            rec.level = a;
            rec.replicate = unit.replicate;
            rec.points = partial->initial_design;
            rec.y.assign(partial->data.y().begin(),
                         partial->data.y().begin() + static_cast<std::ptrdiff_t>(cfg.n0));
            unit_init[u] = std::move(rec);
        }
        for (auto N : cfg.budgets) {
            auto row = row_for(N);
            if (auto it = scores.find(N); it != scores.end()) {
                row.mc0 = it->second;
                row.ok = true;
                row.wall_seconds = elapsed[N];
            } else {
                row.error = error.empty() ? "budget not reached" : error;
            }
            rows.push_back(row);
        }
    });

    BenchResult out;
    for (auto& rows : unit_rows) {
        for (auto& r : rows) out.rows.push_back(std::move(r));
    }
    for (auto& rec : unit_init) {
        if (rec) out.initial_designs.push_back(std::move(*rec));
    }
    out.summary = summarize(out.rows, cfg.replicates);
    return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo check of the confidence-bound guarantees

struct CoverageConfig {
    DesignSpace space;
    EzGpParams params;  // true process; mu is the true mean
    double level = 0.0;
    double alpha = 0.1;
    std::size_t draws = 500;
    std::size_t grid_per_combo = 50;
    std::size_t n_train = 9;
    std::uint64_t seed = 0;
};

struct CoverageResult {
    std::size_t draws = 0;
    std::size_t hits = 0;     // h_min inside [min lb, min ub]
    std::size_t skipped = 0;  // sampling or conditioning failures
    std::size_t gap_checked = 0;      // covered draws where the gap bound was tested
    std::size_t gap_violations = 0;   // |min |mean - a| - h_min| > sqrt(beta) * max sd
    double coverage = 0.0;            // hits / (draws - skipped)
    double target = 0.0;              // 1 - alpha
    double beta = 0.0;
};

/// Samples GP paths from the true EzGP on a finite grid, conditions on a
/// random training subset with the true covariance parameters, and counts how
/// often h_min = min |Y - a| falls between the smallest lower and the smallest
/// upper confidence bound. On covered draws it also checks
/// |min |mean - a| - h_min| <= sqrt(beta) * max sd over A_{1,min} u A_2.
inline CoverageResult coverage_check(const CoverageConfig& cfg) {
    if (cfg.draws < 100) throw ValidationError("coverage check needs at least 100 draws", "draws");
    if (!cfg.params.conforms_to(cfg.space)) throw ValidationError("parameters do not match the space", "params");
    const auto grid = candidate_set(cfg.space, cfg.grid_per_combo, derive_seed(cfg.seed, Stream::CoverageGrid));
    const std::size_t G = grid.points.size();
    if (cfg.n_train < 2 || cfg.n_train > G) {
        throw ValidationError("n_train must lie in [2, grid size]", "n_train");
    }

    CoverageResult res;
    res.target = 1.0 - cfg.alpha;
    const auto ctx = AcquisitionContext::make(cfg.level, cfg.n_train, cfg.space.M(), cfg.alpha);
    res.beta = ctx.beta;
    const double root_beta = std::sqrt(ctx.beta);

    // Path sampler: Cholesky with 1e-8 relative jitter; a clipped
    // eigendecomposition when the dense grid defeats it.
    const Eigen::MatrixXd K = gram_matrix(cfg.params, grid.points);
    Eigen::MatrixXd root;
    bool sampler_ok = true;
    {
        Eigen::MatrixXd A = K;
        A.diagonal().array() += kDefaultJitter * K.diagonal().mean();
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            root = llt.matrixL();
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
            if (es.info() != Eigen::Success) {
                sampler_ok = false;
            } else {
                root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
            }
        }
    }

    std::vector<std::size_t> idx(G);
    for (std::size_t d = 0; d < cfg.draws; ++d) {
        ++res.draws;
        if (!sampler_ok) {
            ++res.skipped;
            continue;
        }
        std::mt19937_64 rng(derive_seed(cfg.seed, Stream::CoverageDraw, d));
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd xi(static_cast<Eigen::Index>(G));
        for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
        const Eigen::VectorXd path = (root * xi).array() + cfg.params.mu;

        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<MixedPoint> pts;
        std::vector<double> y;
        for (std::size_t i = 0; i < cfg.n_train; ++i) {
            pts.push_back(grid.points[idx[i]]);
            y.push_back(path(static_cast<Eigen::Index>(idx[i])));
        }

        std::vector<Prediction> preds;
        try {
            const auto model =
                FittedModel::condition(Dataset::make(cfg.space, std::move(pts), std::move(y)), cfg.params);
            preds = model.predict_batch(grid);
        } catch (const std::exception&) {
            ++res.skipped;
            continue;
        }

        double h_min = std::numeric_limits<double>::infinity();
        double min_lb = std::numeric_limits<double>::infinity();
        double min_ub = std::numeric_limits<double>::infinity();
        double mu_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < G; ++i) {
            h_min = std::min(h_min, std::abs(path(static_cast<Eigen::Index>(i)) - cfg.level));
            const auto b = bounds(preds[i].mean, preds[i].sd, ctx);
            min_lb = std::min(min_lb, b.lb);
            min_ub = std::min(min_ub, b.ub);
            mu_min = std::min(mu_min, std::abs(preds[i].mean - cfg.level));
        }
        if (!(min_lb <= h_min && h_min <= min_ub)) continue;
        ++res.hits;

        const auto part = partition(preds, ctx);
        double sup_sd = 0.0;
        for (auto i : part.a1_min) sup_sd = std::max(sup_sd, preds[i].sd);
        for (auto i : part.a2) sup_sd = std::max(sup_sd, preds[i].sd);
        ++res.gap_checked;
        const double slack = 1e-12 * std::max(1.0, std::abs(cfg.level) + h_min);
        if (std::abs(mu_min - h_min) > root_beta * sup_sd + slack) ++res.gap_violations;
    }
    const std::size_t used = res.draws - res.skipped;
    res.coverage = used ? static_cast<double>(res.hits) / static_cast<double>(used) : 0.0;
    return res;
}

}  // namespace contour_seeker

#endif  // CONTOUR_SEEKER_BENCH_HPP
