// Independent reference computations shared by the unit and acceptance suites.
#ifndef CONTOUR_SEEKER_TESTS_ORACLES_HPP
#define CONTOUR_SEEKER_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/LU>

#include "contour_seeker/ezgp.hpp"

namespace oracles {

using namespace contour_seeker;

inline DesignSpace unit_space(std::size_t p, std::vector<int> levels) {
    return DesignSpace::make(std::vector<Interval>(p, Interval{0.0, 1.0}), std::move(levels));
}

inline EzGpParams random_params(const DesignSpace& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> lv(-3.0, 1.0), lt(-2.0, 2.0);
    EzGpParams p = EzGpParams::uniform(s, 1.0, 1.0);
    for (auto& v : p.sigma2) v = std::pow(10.0, lv(rng));
    for (auto& t : p.theta0) t = std::pow(10.0, lt(rng));
    for (auto& m : p.theta_h) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::pow(10.0, lt(rng));
    }
    return p;
}

// Rates of at least 1 on [0,1]^p keep Phi far enough from singular that the
// 1e-8 relative jitter stays a rounding-level perturbation.
inline EzGpParams well_posed_params(const DesignSpace& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> lv(-1.0, 1.0), lt(0.0, 2.0);
    EzGpParams p = EzGpParams::uniform(s, 1.0, 1.0);
    for (auto& v : p.sigma2) v = std::pow(10.0, lv(rng));
    for (auto& t : p.theta0) t = std::pow(10.0, lt(rng));
    for (auto& m : p.theta_h) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::pow(10.0, lt(rng));
    }
    return p;
}

inline MixedPoint random_point(const DesignSpace& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MixedPoint w;
    for (std::size_t k = 0; k < s.p(); ++k) w.x.push_back(u(rng));
    for (int m : s.levels()) w.z.push_back(1 + static_cast<int>(rng() % static_cast<unsigned>(m)));
    return w;
}

// Straight transcription of the kernel with nested loops over every level
// pair, independent of the library's indicator shortcut.
inline double kernel_oracle(const EzGpParams& p, const MixedPoint& a, const MixedPoint& b) {
    double d0 = 0.0;
    for (std::size_t k = 0; k < a.x.size(); ++k) d0 += p.theta0[k] * (a.x[k] - b.x[k]) * (a.x[k] - b.x[k]);
    double out = p.sigma2[0] * std::exp(-d0);
    for (std::size_t h = 0; h < a.z.size(); ++h) {
        for (int l = 1; l <= p.theta_h[h].cols(); ++l) {
            if (a.z[h] != l || b.z[h] != l) continue;
            double d = 0.0;
            for (std::size_t k = 0; k < a.x.size(); ++k) {
                d += p.theta_h[h](static_cast<Eigen::Index>(k), l - 1) * (a.x[k] - b.x[k]) * (a.x[k] - b.x[k]);
            }
            out += p.sigma2[h + 1] * std::exp(-d);
        }
    }
    return out;
}

struct BruteForce {
    double nll, mu_hat;
    std::vector<Prediction> preds;
};

// Explicit-inverse evaluation of the profiled likelihood and the predictive
// equations, with the same absolute jitter the factorization used.
inline BruteForce brute_force(const EzGpParams& p, const Dataset& d, double abs_jitter,
                       const std::vector<MixedPoint>& at) {
    const auto n = static_cast<Eigen::Index>(d.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            K(i, j) = kernel_oracle(p, d.points()[static_cast<std::size_t>(i)], d.points()[static_cast<std::size_t>(j)]);
        }
    }
    K.diagonal().array() += abs_jitter;
    const Eigen::MatrixXd Ki = K.fullPivLu().inverse();
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(d.y().data(), n);
    const double oko = one.dot(Ki * one);
    BruteForce out;
    out.mu_hat = one.dot(Ki * y) / oko;
    const double oky = one.dot(Ki * y);
    out.nll = std::log(K.determinant()) + y.dot(Ki * y) - oky * oky / oko;
    for (const auto& w : at) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r(i) = kernel_oracle(p, w, d.points()[static_cast<std::size_t>(i)]);
        const double mean = out.mu_hat + r.dot(Ki * (y - out.mu_hat * one));
        const double c = 1.0 - one.dot(Ki * r);
        const double var = p.total_variance() - r.dot(Ki * r) + c * c / oko;
        out.preds.push_back({mean, std::sqrt(std::max(var, 0.0))});
    }
    return out;
}


struct MonteCarlo {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Sample mean of the contour improvement eps^2 - min((Y - a)^2, eps^2)
/// with Y ~ N(mean, sd^2) and eps = ei_alpha * sd.
inline MonteCarlo contour_improvement(double mean, double sd, double a, double ei_alpha, std::size_t draws,
                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(mean, sd);
    const double eps2 = ei_alpha * sd * ei_alpha * sd;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double y = nd(rng);
        const double v = eps2 - std::min((y - a) * (y - a), eps2);
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(draws);
    MonteCarlo out;
    out.mean = s / n;
    out.stderr_ = std::sqrt(std::max(s2 / n - out.mean * out.mean, 0.0) / n);
    return out;
}

/// Bernoulli entropy computed from the complementary tail directly.
inline double bernoulli_entropy(double z) {
    const double p = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double q = 0.5 * std::erfc(z / std::sqrt(2.0));
    auto term = [](double v) { return v > 0.0 ? -v * std::log(v) : 0.0; };
    return term(p) + term(q);
}

}  // namespace oracles

#endif  // CONTOUR_SEEKER_TESTS_ORACLES_HPP
