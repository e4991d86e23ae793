#ifndef CONTOUR_SEEKER_IO_HPP
#define CONTOUR_SEEKER_IO_HPP

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "contour_seeker/bench.hpp"
#include "contour_seeker/csv.hpp"
#include "contour_seeker/engine.hpp"
#include "contour_seeker/ezgp.hpp"

namespace contour_seeker::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const DesignSpace& space) {
    json b = json::array();
    for (const auto& iv : space.bounds()) b.push_back({iv.low, iv.high});
    return {{"quant_bounds", b}, {"qual_levels", space.levels()}};
}

inline DesignSpace space_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("space must be an object", "space");
    for (const auto& [k, v] : j.items()) {
        if (k != "quant_bounds" && k != "qual_levels") throw ValidationError("unknown field 'space." + k + "'", "space." + k);
    }
    if (!j.contains("quant_bounds") || !j["quant_bounds"].is_array()) {
        throw ValidationError("space.quant_bounds must be an array of [low, high] pairs", "space.quant_bounds");
    }
    if (!j.contains("qual_levels") || !j["qual_levels"].is_array()) {
        throw ValidationError("space.qual_levels must be an array of level counts", "space.qual_levels");
    }
    std::vector<Interval> bounds;
    for (const auto& pair : j["quant_bounds"]) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ValidationError("space.quant_bounds entries must be [low, high]", "space.quant_bounds");
        }
        bounds.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    std::vector<int> levels;
    for (const auto& m : j["qual_levels"]) {
        if (!m.is_number_integer()) throw ValidationError("space.qual_levels entries must be integers", "space.qual_levels");
        levels.push_back(m.get<int>());
    }
    try {
        return DesignSpace::make(std::move(bounds), std::move(levels));
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), "space." + e.field());
    }
}

inline json to_json(const EzGpParams& p) {
    json th = json::array();
    for (const auto& t : p.theta_h) {
        json rows = json::array();
        for (Eigen::Index k = 0; k < t.rows(); ++k) {
            json row = json::array();
            for (Eigen::Index l = 0; l < t.cols(); ++l) row.push_back(t(k, l));
            rows.push_back(std::move(row));
        }
        th.push_back(std::move(rows));
    }
    return {{"mu", p.mu}, {"sigma2", p.sigma2}, {"theta0", p.theta0}, {"theta_h", th}};
}

inline EzGpParams params_from_json(const json& j) {
    try {
        EzGpParams p;
        p.mu = j.at("mu").get<double>();
        p.sigma2 = j.at("sigma2").get<std::vector<double>>();
        p.theta0 = j.at("theta0").get<std::vector<double>>();
        for (const auto& rows : j.at("theta_h")) {
            const auto nr = static_cast<Eigen::Index>(rows.size());
            const auto nc = nr ? static_cast<Eigen::Index>(rows[0].size()) : 0;
            Eigen::MatrixXd t(nr, nc);
            for (Eigen::Index k = 0; k < nr; ++k) {
                const auto& row = rows[static_cast<std::size_t>(k)];
                if (static_cast<Eigen::Index>(row.size()) != nc) throw ValidationError("ragged theta_h", "params.theta_h");
                for (Eigen::Index l = 0; l < nc; ++l) t(k, l) = row[static_cast<std::size_t>(l)].get<double>();
            }
            p.theta_h.push_back(std::move(t));
        }
        return p;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed parameters: ") + e.what(), "params");
    }
}

/// Everything needed to rebuild the model exactly: the stored data and
/// parameters are re-conditioned at the recorded jitter.
inline json to_json(const FittedModel& m) {
    json xs = json::array(), zs = json::array();
    for (const auto& w : m.data().points()) {
        xs.push_back(w.x);
        zs.push_back(w.z);
    }
    return {{"schema", kSchemaVersion},
            {"space", to_json(m.space())},
            {"transform", to_string(m.data().transform())},
            {"params", to_json(m.params())},
            {"rel_jitter", m.rel_jitter()},
            {"nll", m.nll()},
            {"data", {{"x", xs}, {"z", zs}, {"y", m.data().y()}}}};
}

inline FittedModel model_from_json(const json& j) {
    try {
        if (j.at("schema").get<int>() != kSchemaVersion) throw ValidationError("unsupported model schema", "schema");
        const auto space = space_from_json(j.at("space"));
        const auto& d = j.at("data");
        const auto xs = d.at("x").get<std::vector<std::vector<double>>>();
        const auto zs = d.at("z").get<std::vector<std::vector<int>>>();
        const auto y = d.at("y").get<std::vector<double>>();
        if (xs.size() != zs.size()) throw ValidationError("model data x and z differ in length", "data");
        std::vector<MixedPoint> pts;
        for (std::size_t i = 0; i < xs.size(); ++i) pts.push_back({xs[i], zs[i]});
        auto data = Dataset::make(space, std::move(pts), y, parse_transform(j.at("transform").get<std::string>()));
        return FittedModel::condition(std::move(data), params_from_json(j.at("params")),
                                      j.at("rel_jitter").get<double>());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model file: ") + e.what(), "model");
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'", "path");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what(), "path");
    }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Point tables

inline std::vector<std::string> point_header(const DesignSpace& space) {
    std::vector<std::string> h;
    for (std::size_t k = 0; k < space.p(); ++k) h.push_back("x_" + std::to_string(k + 1));
    for (std::size_t k = 0; k < space.q(); ++k) h.push_back("z_" + std::to_string(k + 1));
    return h;
}

inline std::vector<std::string> point_cells(const DesignSpace& space, const MixedPoint& w) {
    std::vector<std::string> cells;
    for (double v : space.to_physical(w.x)) cells.push_back(csv::fmt(v));
    for (int z : w.z) cells.push_back(std::to_string(z));
    return cells;
}

struct PointTable {
    std::vector<MixedPoint> points;
    std::vector<double> y;  // empty when the file has no y column
};

/// Reads x_1..x_p (physical units) and z_1..z_q, plus y when present.
inline PointTable read_points(std::istream& in, const DesignSpace& space) {
    const auto t = csv::read(in);
    std::vector<std::size_t> xc, zc;
    for (std::size_t k = 0; k < space.p(); ++k) xc.push_back(t.column("x_" + std::to_string(k + 1)));
    for (std::size_t k = 0; k < space.q(); ++k) zc.push_back(t.column("z_" + std::to_string(k + 1)));
    const bool has_y = t.has_column("y");
    const std::size_t yc = has_y ? t.column("y") : 0;
    PointTable out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto line = t.line_numbers[r];
        std::vector<double> phys;
        for (auto c : xc) phys.push_back(csv::parse_double(t.rows[r][c], line));
        MixedPoint w{space.to_normalized(phys), {}};
        for (auto c : zc) w.z.push_back(csv::parse_int(t.rows[r][c], line));
        if (!space.contains(w)) {
            throw IngestError("line " + std::to_string(line) + ": point lies outside the design space", line);
        }
        out.points.push_back(std::move(w));
        if (has_y) out.y.push_back(csv::parse_double(t.rows[r][yc], line));
    }
    return out;
}

inline PointTable read_points_file(const std::string& path, const DesignSpace& space) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'", "path");
    return read_points(in, space);
}

// ---------------------------------------------------------------------------
// Campaign trace directory

inline std::vector<std::string> params_header(const DesignSpace& space) {
    std::vector<std::string> h{"mu"};
    for (std::size_t i = 0; i <= space.q(); ++i) h.push_back("sigma2_" + std::to_string(i));
    for (std::size_t k = 0; k < space.p(); ++k) h.push_back("theta0_" + std::to_string(k + 1));
    for (std::size_t f = 0; f < space.q(); ++f) {
        for (std::size_t k = 0; k < space.p(); ++k) {
            for (int l = 1; l <= space.levels()[f]; ++l) {
                h.push_back("theta" + std::to_string(f + 1) + "_" + std::to_string(k + 1) + "_" + std::to_string(l));
            }
        }
    }
    return h;
}

inline std::vector<std::string> params_cells(const EzGpParams& p) {
    std::vector<std::string> c{csv::fmt(p.mu)};
    for (double v : p.sigma2) c.push_back(csv::fmt(v));
    for (double v : p.theta0) c.push_back(csv::fmt(v));
    for (const auto& t : p.theta_h) {
        for (Eigen::Index k = 0; k < t.rows(); ++k) {
            for (Eigen::Index l = 0; l < t.cols(); ++l) c.push_back(csv::fmt(t(k, l)));
        }
    }
    return c;
}

/// One row per selection step. Wall-clock times are kept out of this file so
/// reruns compare byte for byte.
inline std::string trace_csv(const CampaignTrace& tr, const DesignSpace& space) {
    std::ostringstream out;
    out << csv::kSchemaLine << '\n';
    std::vector<std::string> h{"iteration", "n", "candidate_seed", "chosen_index", "region"};
    for (auto& c : point_header(space)) h.push_back(c);
    for (const char* c : {"y", "beta", "delta", "a1_size", "a2_size", "a1_min_size", "mean", "sd", "acquisition",
                          "score", "a1_finalist", "a2_finalist", "nll", "rel_jitter"}) {
        h.push_back(c);
    }
    for (auto& c : params_header(space)) h.push_back(c);
    h.push_back("note");
    csv::write_row(out, h);
    auto idx = [](const std::optional<Finalist>& f) { return f ? std::to_string(f->index) : std::string(); };
    for (const auto& r : tr.records) {
        std::vector<std::string> c{std::to_string(r.iteration), std::to_string(r.n_before),
                                   std::to_string(r.candidate_seed), std::to_string(r.report.chosen),
                                   to_string(r.report.region)};
        for (auto& v : point_cells(space, r.point)) c.push_back(v);
        c.push_back(csv::fmt(r.y));
        c.push_back(csv::fmt(r.report.beta));
        c.push_back(csv::fmt(r.report.delta));
        c.push_back(std::to_string(r.report.a1_size));
        c.push_back(std::to_string(r.report.a2_size));
        c.push_back(std::to_string(r.report.a1_min_size));
        c.push_back(csv::fmt(r.report.selected.mean));
        c.push_back(csv::fmt(r.report.selected.sd));
        c.push_back(csv::fmt(r.report.selected.acquisition));
        c.push_back(csv::fmt(r.report.selected.score));
        c.push_back(idx(r.report.a1_finalist));
        c.push_back(idx(r.report.a2_finalist));
        c.push_back(csv::fmt(r.nll));
        c.push_back(csv::fmt(r.rel_jitter));
        for (auto& v : params_cells(r.params)) c.push_back(v);
        c.push_back(r.note);
        csv::write_row(out, c);
    }
    return out.str();
}

/// All evaluated points in order, tagged initial or adaptive.
inline std::string design_csv(const CampaignTrace& tr, const DesignSpace& space) {
    std::ostringstream out;
    out << csv::kSchemaLine << '\n';
    std::vector<std::string> h{"index", "source"};
    for (auto& c : point_header(space)) h.push_back(c);
    h.push_back("y");
    csv::write_row(out, h);
    const auto& pts = tr.data.points();
    const auto& y = tr.data.y();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<std::string> c{std::to_string(i), i < tr.initial_design.size() ? "initial" : "adaptive"};
        for (auto& v : point_cells(space, pts[i])) c.push_back(v);
        c.push_back(csv::fmt(y[i]));
        csv::write_row(out, c);
    }
    return out.str();
}

inline std::string timing_csv(const CampaignTrace& tr) {
    std::ostringstream out;
    out << csv::kSchemaLine << '\n';
    csv::write_row(out, {"iteration", "wall_time_s"});
    for (const auto& r : tr.records) csv::write_row(out, {std::to_string(r.iteration), csv::fmt(r.wall_seconds)});
    return out.str();
}

inline void write_trace(const std::filesystem::path& dir, const CampaignTrace& tr, const DesignSpace& space) {
    std::filesystem::create_directories(dir);
    write_text(dir / "trace.csv", trace_csv(tr, space));
    write_text(dir / "design.csv", design_csv(tr, space));
    write_text(dir / "timing.csv", timing_csv(tr));
    if (tr.model) write_json_file(dir / "model.json", to_json(*tr.model));
}

// ---------------------------------------------------------------------------
// Benchmark and coverage tables

inline std::string results_csv(const BenchResult& r) {
    std::ostringstream out;
    out << csv::kSchemaLine << '\n';
    csv::write_row(out, {"strategy", "a", "N", "replicate", "M_C0", "wall_time_s", "ok", "error"});
    for (const auto& row : r.rows) {
        auto err = row.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        csv::write_row(out, {to_string(row.strategy), csv::fmt(row.level), std::to_string(row.N),
                             std::to_string(row.replicate), row.ok ? csv::fmt(row.mc0) : "", csv::fmt(row.wall_seconds),
                             row.ok ? "1" : "0", err});
    }
    return out.str();
}

inline std::string summary_csv(const BenchResult& r) {
    std::ostringstream out;
    out << csv::kSchemaLine << '\n';
    csv::write_row(out, {"strategy", "a", "N", "mean_M_C0", "n_ok", "n_failed", "valid", "relative_efficiency"});
    auto num = [](double v) { return std::isfinite(v) ? csv::fmt(v) : std::string(); };
    for (const auto& s : r.summary) {
        csv::write_row(out, {to_string(s.strategy), csv::fmt(s.level), std::to_string(s.N), num(s.mean_mc0),
                             std::to_string(s.ok), std::to_string(s.failed), s.valid ? "1" : "0",
                             num(s.relative_efficiency)});
    }
    return out.str();
}

inline std::string initial_designs_csv(const BenchResult& r, const DesignSpace& space) {
    std::ostringstream out;
    out << csv::kSchemaLine << '\n';
    std::vector<std::string> h{"strategy", "a", "replicate", "index"};
    for (auto& c : point_header(space)) h.push_back(c);
    h.push_back("y");
    csv::write_row(out, h);
    for (const auto& d : r.initial_designs) {
        for (std::size_t i = 0; i < d.points.size(); ++i) {
            std::vector<std::string> c{to_string(d.strategy), csv::fmt(d.level), std::to_string(d.replicate),
                                       std::to_string(i)};
            for (auto& v : point_cells(space, d.points[i])) c.push_back(v);
            c.push_back(csv::fmt(d.y[i]));
            csv::write_row(out, c);
        }
    }
    return out.str();
}

inline std::string coverage_csv(const CoverageResult& c, double level, double alpha) {
    std::ostringstream out;
    out << csv::kSchemaLine << '\n';
    csv::write_row(out, {"a", "alpha", "beta", "draws", "skipped", "hits", "coverage", "target",
                         "gap_checked", "gap_violations"});
    csv::write_row(out, {csv::fmt(level), csv::fmt(alpha), csv::fmt(c.beta), std::to_string(c.draws),
                         std::to_string(c.skipped), std::to_string(c.hits), csv::fmt(c.coverage),
                         csv::fmt(c.target), std::to_string(c.gap_checked),
                         std::to_string(c.gap_violations)});
    return out.str();
}

}  // namespace contour_seeker::io

#endif  // CONTOUR_SEEKER_IO_HPP
