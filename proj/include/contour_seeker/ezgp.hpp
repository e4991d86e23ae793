#ifndef CONTOUR_SEEKER_EZGP_HPP
#define CONTOUR_SEEKER_EZGP_HPP

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contour_seeker/design_space.hpp"
#include "contour_seeker/errors.hpp"
#include "contour_seeker/parallel.hpp"
#include "contour_seeker/seeding.hpp"

namespace contour_seeker {

/// EzGP hyperparameters. The covariance between w = (x, z) and w' = (x', z') is
///
///   sigma2[0] * exp(-sum_k theta0[k] * d_k^2)
///   + sum_h 1{z_h = z'_h = l} * sigma2[h+1] * exp(-sum_k theta_h[h](k, l-1) * d_k^2)
///
/// with d_k = x_k - x'_k on normalized coordinates.
struct EzGpParams {
    double mu = 0.0;
    std::vector<double> sigma2;            // q + 1 variances
    std::vector<double> theta0;            // p rates of the base process
    std::vector<Eigen::MatrixXd> theta_h;  // per factor, p x m_h rates

    /// Every parameter set to a common value.
    static EzGpParams uniform(const DesignSpace& space, double variance, double rate, double mean = 0.0) {
        EzGpParams out;
        out.mu = mean;
        out.sigma2.assign(space.q() + 1, variance);
        out.theta0.assign(space.p(), rate);
        for (int m : space.levels()) {
            out.theta_h.push_back(Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(space.p()), m, rate));
        }
        return out;
    }

    /// Covariance parameters only (mu excluded).
    std::size_t covariance_parameter_count() const {
        std::size_t n = sigma2.size() + theta0.size();
        for (const auto& t : theta_h) n += static_cast<std::size_t>(t.size());
        return n;
    }

    double total_variance() const { return std::accumulate(sigma2.begin(), sigma2.end(), 0.0); }

    bool conforms_to(const DesignSpace& space) const {
        if (sigma2.size() != space.q() + 1 || theta0.size() != space.p() || theta_h.size() != space.q()) {
            return false;
        }
        for (std::size_t h = 0; h < space.q(); ++h) {
            if (theta_h[h].rows() != static_cast<Eigen::Index>(space.p()) || theta_h[h].cols() != space.levels()[h]) {
                return false;
            }
        }
        return true;
    }
};

inline double covariance(const EzGpParams& params, const MixedPoint& a, const MixedPoint& b) {
    const std::size_t p = a.x.size();
    double base = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        const double d = a.x[k] - b.x[k];
        base += params.theta0[k] * d * d;
    }
    double cov = params.sigma2[0] * std::exp(-base);
    for (std::size_t h = 0; h < a.z.size(); ++h) {
        if (a.z[h] != b.z[h]) continue;
        const auto level = static_cast<Eigen::Index>(a.z[h] - 1);
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            const double d = a.x[k] - b.x[k];
            s += params.theta_h[h](static_cast<Eigen::Index>(k), level) * d * d;
        }
        cov += params.sigma2[h + 1] * std::exp(-s);
    }
    return cov;
}

enum class ResponseTransform { Identity, Log };

inline std::string to_string(ResponseTransform t) { return t == ResponseTransform::Log ? "log" : "identity"; }

inline ResponseTransform parse_transform(const std::string& s) {
    if (s == "identity") return ResponseTransform::Identity;
    if (s == "log") return ResponseTransform::Log;
    throw ValidationError("unknown response transform '" + s + "' (expected identity or log)", "transform");
}

inline double apply_transform(ResponseTransform t, double y) {
    if (t == ResponseTransform::Identity) return y;
    if (!(y > 0.0)) throw ValidationError("log transform needs positive responses, got " + std::to_string(y));
    return std::log(y);
}

/// Training data D_n: distinct points of one design space and their
/// (already transformed) responses.
class Dataset {
public:
    Dataset() = default;

    static Dataset make(DesignSpace space, std::vector<MixedPoint> points, std::vector<double> y,
                        ResponseTransform transform = ResponseTransform::Identity) {
        if (points.size() != y.size()) {
            throw ValidationError("dataset has " + std::to_string(points.size()) + " points but " +
                                  std::to_string(y.size()) + " responses");
        }
        if (points.size() < 2) throw ValidationError("dataset needs at least 2 points", "data");
        Dataset d;
        d.space_ = std::move(space);
        d.transform_ = transform;
        for (std::size_t i = 0; i < points.size(); ++i) d.add(std::move(points[i]), y[i]);
        return d;
    }

    /// Appends one observation; rejects out-of-space and duplicate points.
    void add(MixedPoint w, double y) {
        if (!space_.contains(w)) {
            throw ValidationError("point " + std::to_string(points_.size()) + " lies outside the design space");
        }
        if (!std::isfinite(y)) throw ValidationError("response " + std::to_string(points_.size()) + " is not finite");
        if (auto dup = find(w)) {
            throw ValidationError("duplicate design point: rows " + std::to_string(*dup) + " and " +
                                      std::to_string(points_.size()),
                                  "data");
        }
        points_.push_back(std::move(w));
        y_.push_back(y);
    }

    /// Index of a stored point equal to w within 1e-12, if any.
    std::optional<std::size_t> find(const MixedPoint& w) const {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (same_point(points_[i], w)) return i;
        }
        return std::nullopt;
    }

    std::size_t size() const { return points_.size(); }
    const DesignSpace& space() const { return space_; }
    const std::vector<MixedPoint>& points() const { return points_; }
    const std::vector<double>& y() const { return y_; }
    ResponseTransform transform() const { return transform_; }

    double response_range() const {
        if (y_.empty()) return 0.0;
        auto [lo, hi] = std::minmax_element(y_.begin(), y_.end());
        return *hi - *lo;
    }

    double response_variance() const {
        if (y_.empty()) return 0.0;
        const double mean = std::accumulate(y_.begin(), y_.end(), 0.0) / static_cast<double>(y_.size());
        double v = 0.0;
        for (double y : y_) v += (y - mean) * (y - mean);
        return v / static_cast<double>(y_.size());
    }

private:
    DesignSpace space_;
    std::vector<MixedPoint> points_;
    std::vector<double> y_;
    ResponseTransform transform_ = ResponseTransform::Identity;
};

inline Eigen::MatrixXd gram_matrix(const EzGpParams& params, std::span<const MixedPoint> pts) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = covariance(params, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double c = covariance(params, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
            K(i, j) = c;
            K(j, i) = c;
        }
    }
    return K;
}

/// Relative jitter (fraction of the mean Gram diagonal) tried first.
inline constexpr double kDefaultJitter = 1e-8;
/// Largest relative jitter before giving up.
inline constexpr double kMaxJitter = 1e-4;
/// Factorizations with a reciprocal condition estimate below this are rejected.
inline constexpr double kMinRcond = 1e-15;

/// Cholesky factor of Phi + jitter * I.
struct GramFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;      // absolute value added to the diagonal
    double rel_jitter = 0.0;  // jitter / mean diagonal
    double rcond = 0.0;

    double log_det() const {
        const auto& L = llt.matrixLLT();
        double s = 0.0;
        for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
        return 2.0 * s;
    }
};

/// Factorizes a covariance matrix, starting at `rel_jitter` times its mean
/// diagonal and escalating x10 up to kMaxJitter. Throws IllConditionedError.
inline GramFactor factorize_gram(const Eigen::MatrixXd& K, double rel_jitter = kDefaultJitter) {
    const double mean_diag = K.diagonal().mean();
    if (!(mean_diag > 0.0) || !std::isfinite(mean_diag)) {
        throw IllConditionedError("Gram matrix has a non-positive diagonal", 0.0, 0.0);
    }
    double rel = std::max(rel_jitter, 0.0);
    double last_rcond = 0.0;
    for (;;) {
        GramFactor f;
        f.rel_jitter = rel;
        f.jitter = rel * mean_diag;
        Eigen::MatrixXd A = K;
        A.diagonal().array() += f.jitter;
        f.llt.compute(A);
        if (f.llt.info() == Eigen::Success) {
            f.rcond = f.llt.rcond();
            if (f.rcond >= kMinRcond) return f;
            last_rcond = f.rcond;
        }
        const double next = rel == 0.0 ? kDefaultJitter : rel * 10.0;
        if (next > kMaxJitter * (1.0 + 1e-12)) {
            throw IllConditionedError("Gram matrix not positive definite after jitter escalation (rcond " +
                                          std::to_string(last_rcond) + ")",
                                      last_rcond, f.jitter);
        }
        rel = next;
    }
}

inline GramFactor build_gram(const EzGpParams& params, const Dataset& data, double rel_jitter = kDefaultJitter) {
    return factorize_gram(gram_matrix(params, data.points()), rel_jitter);
}

/// Profiled negative log-likelihood and the closed-form mean that attains it.
struct LikelihoodValue {
    double value = 0.0;
    double mu_hat = 0.0;
    double log_det = 0.0;
    double quadratic = 0.0;  // y'Phi^-1 y - (1'Phi^-1 1)^-1 (1'Phi^-1 y)^2
    double rel_jitter = 0.0;
};

namespace detail {

struct ProfiledSolve {
    GramFactor factor;
    Eigen::VectorXd phi_inv_one;
    Eigen::VectorXd alpha;  // Phi^-1 (y - mu_hat 1)
    double one_phi_inv_one = 0.0;
    double mu_hat = 0.0;
    double quadratic = 0.0;
};

inline ProfiledSolve profiled_solve(const EzGpParams& params, const Dataset& data, double rel_jitter) {
    ProfiledSolve s;
    s.factor = build_gram(params, data, rel_jitter);
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Map<const Eigen::VectorXd> y(data.y().data(), n);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    s.phi_inv_one = s.factor.llt.solve(ones);
    s.one_phi_inv_one = ones.dot(s.phi_inv_one);
    s.mu_hat = s.phi_inv_one.dot(y) / s.one_phi_inv_one;
    const Eigen::VectorXd resid = y - s.mu_hat * ones;
    s.alpha = s.factor.llt.solve(resid);
    s.quadratic = resid.dot(s.alpha);
    return s;
}

}  // namespace detail

/// log|Phi| + y'Phi^-1 y - (1'Phi^-1 1)^-1 (1'Phi^-1 y)^2 with mu profiled out.
/// params.mu is ignored. The quadratic form is evaluated as r'Phi^-1 r with
/// r = y - mu_hat 1, which is algebraically identical and avoids cancellation.
inline LikelihoodValue neg_log_likelihood(const EzGpParams& params, const Dataset& data,
                                          double rel_jitter = kDefaultJitter) {
    auto s = detail::profiled_solve(params, data, rel_jitter);
    LikelihoodValue out;
    out.log_det = s.factor.log_det();
    out.quadratic = s.quadratic;
    out.value = out.log_det + out.quadratic;
    out.mu_hat = s.mu_hat;
    out.rel_jitter = s.factor.rel_jitter;
    return out;
}

struct Prediction {
    double mean = 0.0;
    double sd = 0.0;
};

/// Variance clipping below this magnitude is treated as rounding noise.
inline constexpr double kClipReportThreshold = 1e-8;

/// EzGP conditioned on a dataset. Immutable once built; copies share the
/// factorization and are safe to use for concurrent prediction.
class FittedModel {
public:
    FittedModel() = default;

    /// Conditions the process on `data` with fixed covariance parameters.
    /// mu is replaced by its closed-form estimate.
    static FittedModel condition(Dataset data, EzGpParams params, double rel_jitter = kDefaultJitter) {
        if (!params.conforms_to(data.space())) {
            throw ValidationError("parameter shapes do not match the design space", "params");
        }
        auto st = std::make_shared<State>();
        st->solve = detail::profiled_solve(params, data, rel_jitter);
        params.mu = st->solve.mu_hat;
        st->params = std::move(params);
        st->nll = st->solve.factor.log_det() + st->solve.quadratic;
        st->data = std::move(data);
        FittedModel m;
        m.state_ = std::move(st);
        m.clipped_ = std::make_shared<std::atomic<std::size_t>>(0);
        return m;
    }

    const EzGpParams& params() const { return state_->params; }
    const Dataset& data() const { return state_->data; }
    const DesignSpace& space() const { return state_->data.space(); }
    double nll() const { return state_->nll; }
    double jitter() const { return state_->solve.factor.jitter; }
    double rel_jitter() const { return state_->solve.factor.rel_jitter; }
    double one_phi_inv_one() const { return state_->solve.one_phi_inv_one; }
    /// Number of predictions whose variance was clipped by more than kClipReportThreshold.
    std::size_t clipped_predictions() const { return clipped_ ? clipped_->load() : 0; }

    Prediction predict(const MixedPoint& w) const {
        const auto& st = *state_;
        const auto& pts = st.data.points();
        const auto n = static_cast<Eigen::Index>(pts.size());
        Eigen::VectorXd r0(n);
        for (Eigen::Index i = 0; i < n; ++i) r0(i) = covariance(st.params, w, pts[static_cast<std::size_t>(i)]);

        Prediction out;
        out.mean = st.params.mu + r0.dot(st.solve.alpha);

        const Eigen::VectorXd v = st.solve.factor.llt.matrixL().solve(r0);
        const double one_phi_inv_r = st.solve.phi_inv_one.dot(r0);
        const double correction = 1.0 - one_phi_inv_r;
        double var = st.params.total_variance() - v.squaredNorm() +
                     correction * correction / st.solve.one_phi_inv_one;
        if (var < 0.0) {
            if (-var > kClipReportThreshold) clipped_->fetch_add(1, std::memory_order_relaxed);
            var = 0.0;
        }
        out.sd = std::sqrt(var);
        return out;
    }

    std::vector<Prediction> predict_batch(std::span<const MixedPoint> pts, std::size_t threads = 1) const {
        std::vector<Prediction> out(pts.size());
        parallel_for(pts.size(), threads, [&](std::size_t i) { out[i] = predict(pts[i]); });
        return out;
    }

    std::vector<Prediction> predict_batch(const CandidateSet& set, std::size_t threads = 1) const {
        return predict_batch(std::span<const MixedPoint>(set.points), threads);
    }

private:
    struct State {
        EzGpParams params;
        Dataset data;
        detail::ProfiledSolve solve;
        double nll = 0.0;
    };
    std::shared_ptr<const State> state_;
    std::shared_ptr<std::atomic<std::size_t>> clipped_;
};

/// Maximum-likelihood settings. Rates are searched on [theta_min, theta_max]
/// and variances on [sigma2_min_rel, sigma2_max_rel] * var(y), all in log space.
struct FitSettings {
    std::size_t starts = 8;
    double theta_min = 1e-2;
    double theta_max = 1e2;
    double sigma2_min_rel = 1e-6;
    double sigma2_max_rel = 10.0;
    std::size_t max_evaluations = 0;  // per start; 0 selects 200 * dimension
    double tolerance = 1e-5;          // simplex size in the unconstrained coordinates
    std::uint64_t seed = 0;
    double jitter = kDefaultJitter;
    std::size_t threads = 1;
};

/// Outcome of one optimizer start, kept for diagnostics and tests.
struct StartResult {
    double initial_value = std::numeric_limits<double>::infinity();
    double final_value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    bool ok = false;
};

namespace detail {

inline constexpr double kPenalty = 1e100;

// Box in log space: variances first (q + 1), then theta0 (p), then each
// theta_h column-major.
struct LogBox {
    std::vector<double> lo, hi;

    std::size_t dim() const { return lo.size(); }
};

inline LogBox make_log_box(const DesignSpace& space, const FitSettings& cfg, double var_scale) {
    LogBox box;
    const std::size_t n_var = space.q() + 1;
    std::size_t n_theta = space.p();
    for (int m : space.levels()) n_theta += space.p() * static_cast<std::size_t>(m);
    for (std::size_t i = 0; i < n_var; ++i) {
        box.lo.push_back(std::log(cfg.sigma2_min_rel * var_scale));
        box.hi.push_back(std::log(cfg.sigma2_max_rel * var_scale));
    }
    for (std::size_t i = 0; i < n_theta; ++i) {
        box.lo.push_back(std::log(cfg.theta_min));
        box.hi.push_back(std::log(cfg.theta_max));
    }
    return box;
}

inline EzGpParams unpack(const DesignSpace& space, std::span<const double> logp) {
    EzGpParams out;
    std::size_t i = 0;
    for (std::size_t h = 0; h <= space.q(); ++h) out.sigma2.push_back(std::exp(logp[i++]));
    for (std::size_t k = 0; k < space.p(); ++k) out.theta0.push_back(std::exp(logp[i++]));
    for (int m : space.levels()) {
        Eigen::MatrixXd t(static_cast<Eigen::Index>(space.p()), m);
        for (Eigen::Index c = 0; c < t.cols(); ++c) {
            for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = std::exp(logp[i++]);
        }
        out.theta_h.push_back(std::move(t));
    }
    return out;
}

inline std::vector<double> pack(const EzGpParams& params) {
    std::vector<double> out;
    for (double s : params.sigma2) out.push_back(std::log(s));
    for (double t : params.theta0) out.push_back(std::log(t));
    for (const auto& t : params.theta_h) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) {
            for (Eigen::Index r = 0; r < t.rows(); ++r) out.push_back(std::log(t(r, c)));
        }
    }
    return out;
}

// The simplex runs on unconstrained u; u -> lo + (hi - lo) * logistic(u)
// keeps every evaluated point inside the box.
inline double to_box(double u, double lo, double hi) { return lo + (hi - lo) / (1.0 + std::exp(-u)); }

inline double from_box(double v, double lo, double hi) {
    double f = (v - lo) / (hi - lo);
    f = std::clamp(f, 1e-6, 1.0 - 1e-6);
    return std::log(f / (1.0 - f));
}

struct Objective {
    const Dataset* data;
    const LogBox* box;
    double rel_jitter;
    std::size_t evaluations = 0;

    double operator()(std::span<const double> u) {
        ++evaluations;
        std::vector<double> logp(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) logp[i] = to_box(u[i], box->lo[i], box->hi[i]);
        try {
            const double v = neg_log_likelihood(unpack(data->space(), logp), *data, rel_jitter).value;
            return std::isfinite(v) ? v : kPenalty;
        } catch (const IllConditionedError&) {
            return kPenalty;
        }
    }
};

inline double gsl_objective(const gsl_vector* u, void* ctx) {
    auto* obj = static_cast<Objective*>(ctx);
    return (*obj)(std::span<const double>(u->data, u->size));
}

struct MinimizeResult {
    std::vector<double> u;
    StartResult stats;
};

// Bounded Nelder-Mead (GSL nmsimplex2) from one start. The returned point is
// the best vertex seen, so it is never worse than the start.
inline MinimizeResult minimize_from(const Dataset& data, const LogBox& box, std::vector<double> u0,
                                    const FitSettings& cfg) {
    Objective obj{&data, &box, cfg.jitter};
    MinimizeResult res;
    res.stats.initial_value = obj(u0);
    res.u = u0;
    res.stats.final_value = res.stats.initial_value;

    const std::size_t dim = u0.size();
    const std::size_t budget = cfg.max_evaluations ? cfg.max_evaluations : 200 * dim;

    gsl_multimin_function fn{&gsl_objective, dim, &obj};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(dim), &gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(dim), &gsl_vector_free);
    std::copy(u0.begin(), u0.end(), x->data);
    gsl_vector_set_all(step.get(), 1.0);
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim), &gsl_multimin_fminimizer_free);
    if (gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get()) != GSL_SUCCESS) {
        res.stats.evaluations = obj.evaluations;
        res.stats.ok = res.stats.initial_value < kPenalty;
        return res;
    }
    while (obj.evaluations < budget) {
        if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), cfg.tolerance) == GSL_SUCCESS) break;
    }
    if (s->fval <= res.stats.final_value) {
        res.stats.final_value = s->fval;
        res.u.assign(s->x->data, s->x->data + dim);
    }
    res.stats.evaluations = obj.evaluations;
    res.stats.ok = res.stats.final_value < kPenalty;
    return res;
}

struct GslErrorsOff {
    GslErrorsOff() { gsl_set_error_handler_off(); }
};

}  // namespace detail

/// Multi-start maximum-likelihood fit. Starts: the box centre (variances at
/// var(y)/(q+1)), the optional warm start, then starts - 1 LHD points of the
/// log-parameter box. Returns the best start (lowest index on ties).
/// Throws FitError when no start yields a factorizable model.
inline FittedModel fit(const Dataset& data, const FitSettings& cfg = {}, const EzGpParams* warm = nullptr,
                       std::vector<StartResult>* diagnostics = nullptr) {
    static const detail::GslErrorsOff gsl_guard;
    if (data.size() < 2) throw ValidationError("fit needs at least 2 points", "data");
    if (cfg.starts == 0) throw ValidationError("fit needs at least one start", "starts");
    const auto& space = data.space();
    double var_scale = data.response_variance();
    if (!(var_scale > 1e-300) || !std::isfinite(var_scale)) var_scale = 1.0;
    const auto box = detail::make_log_box(space, cfg, var_scale);
    const std::size_t dim = box.dim();

    std::vector<std::vector<double>> starts;
    {
        std::vector<double> centre(dim);
        const double var0 = std::log(var_scale / static_cast<double>(space.q() + 1));
        for (std::size_t i = 0; i < dim; ++i) {
            const double mid = 0.5 * (box.lo[i] + box.hi[i]);
            const double v = i <= space.q() ? std::clamp(var0, box.lo[i], box.hi[i]) : mid;
            centre[i] = detail::from_box(v, box.lo[i], box.hi[i]);
        }
        starts.push_back(std::move(centre));
    }
    if (warm != nullptr && warm->conforms_to(space)) {
        const auto logp = detail::pack(*warm);
        std::vector<double> u(dim);
        for (std::size_t i = 0; i < dim; ++i) u[i] = detail::from_box(logp[i], box.lo[i], box.hi[i]);
        starts.push_back(std::move(u));
    }
    if (cfg.starts > 1) {
        const auto unit = DesignSpace::make(std::vector<Interval>(dim, Interval{0.0, 1.0}), {});
        for (auto& pt : latin_hypercube(unit, cfg.starts - 1, derive_seed(cfg.seed, Stream::FitStarts))) {
            std::vector<double> u(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                u[i] = detail::from_box(box.lo[i] + pt[i] * (box.hi[i] - box.lo[i]), box.lo[i], box.hi[i]);
            }
            starts.push_back(std::move(u));
        }
    }

    std::vector<detail::MinimizeResult> results(starts.size());
    parallel_for(starts.size(), cfg.threads,
                 [&](std::size_t i) { results[i] = detail::minimize_from(data, box, starts[i], cfg); });

    std::size_t best = results.size();
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].stats.ok) continue;
        if (best == results.size() || results[i].stats.final_value < results[best].stats.final_value) best = i;
    }
    if (diagnostics != nullptr) {
        diagnostics->clear();
        for (const auto& r : results) diagnostics->push_back(r.stats);
    }
    if (best == results.size()) throw FitError("no optimizer start produced a factorizable Gram matrix");

    std::vector<double> logp(dim);
    for (std::size_t i = 0; i < dim; ++i) logp[i] = detail::to_box(results[best].u[i], box.lo[i], box.hi[i]);
    return FittedModel::condition(data, detail::unpack(space, logp), cfg.jitter);
}

}  // namespace contour_seeker

#endif  // CONTOUR_SEEKER_EZGP_HPP
