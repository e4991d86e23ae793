#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <random>

#include "contour_seeker/ezgp.hpp"
#include "oracles.hpp"

using namespace contour_seeker;
using namespace oracles;

namespace {

bool same_params(const EzGpParams& a, const EzGpParams& b) {
    if (a.mu != b.mu || a.sigma2 != b.sigma2 || a.theta0 != b.theta0 || a.theta_h.size() != b.theta_h.size()) return false;
    for (std::size_t h = 0; h < a.theta_h.size(); ++h) {
        if (a.theta_h[h] != b.theta_h[h]) return false;
    }
    return true;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Draws a joint sample of the true process at `pts`.
Eigen::VectorXd sample_path(const EzGpParams& p, const std::vector<MixedPoint>& pts, std::mt19937_64& rng) {
    Eigen::MatrixXd K = gram_matrix(p, pts);
    K.diagonal().array() += 1e-10 * K.diagonal().mean();
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    std::normal_distribution<double> nd;
    Eigen::VectorXd xi(K.rows());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = nd(rng);
    return (llt.matrixL() * xi).array() + p.mu;
}

}  // namespace

// ---------------------------------------------------------------------------
// Covariance

TEST(Covariance, SamePointIsTotalVariance) {
    auto s = unit_space(2, {3, 2});
    std::mt19937_64 rng(1);
    const auto p = random_params(s, rng);
    const auto w = random_point(s, rng);
    EXPECT_DOUBLE_EQ(covariance(p, w, w), p.total_variance());
}

TEST(Covariance, NoSharedLevelsLeavesBaseTerm) {
    auto s = unit_space(2, {3, 2});
    std::mt19937_64 rng(2);
    const auto p = random_params(s, rng);
    MixedPoint a{{0.1, 0.7}, {1, 1}}, b{{0.4, 0.2}, {2, 2}};
    const double expected = p.sigma2[0] * std::exp(-p.theta0[0] * 0.09 - p.theta0[1] * 0.25);
    EXPECT_NEAR(covariance(p, a, b), expected, 1e-15);
}

TEST(Covariance, HandValue) {
    auto s = unit_space(1, {3});
    const auto p = EzGpParams::uniform(s, 1.0, 1.0);
    EXPECT_NEAR(covariance(p, {{0.0}, {2}}, {{1.0}, {2}}), 2.0 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(covariance(p, {{0.0}, {2}}, {{1.0}, {2}}), 0.73576, 1e-5);
}

TEST(Covariance, UsesLevelSpecificRates) {
    auto s = unit_space(1, {3});
    auto p = EzGpParams::uniform(s, 1.0, 1.0);
    p.theta_h[0](0, 2) = 4.0;
    MixedPoint a{{0.0}, {3}}, b{{0.5}, {3}};
    EXPECT_NEAR(covariance(p, a, b), std::exp(-0.25) + std::exp(-1.0), 1e-15);
}

TEST(Covariance, MatchesOracleAndIsExactlySymmetric) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 500; ++t) {
        std::vector<int> levels;
        for (std::size_t h = 0, q = rng() % 4; h < q; ++h) levels.push_back(2 + static_cast<int>(rng() % 4));
        const auto s = unit_space(1 + rng() % 4, levels);
        const auto p = random_params(s, rng);
        const auto a = random_point(s, rng), b = random_point(s, rng);
        EXPECT_EQ(covariance(p, a, b), covariance(p, b, a));
        EXPECT_LE(rel_err(covariance(p, a, b), kernel_oracle(p, a, b)), 1e-14);
    }
}

TEST(Gram, PositiveSemidefiniteOnRandomDraws) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        std::vector<int> levels;
        for (std::size_t h = 0, q = rng() % 3; h < q; ++h) levels.push_back(2 + static_cast<int>(rng() % 3));
        const auto s = unit_space(1 + rng() % 3, levels);
        const auto p = random_params(s, rng);
        std::vector<MixedPoint> pts;
        for (std::size_t i = 0, n = 1 + rng() % 12; i < n; ++i) pts.push_back(random_point(s, rng));
        const Eigen::MatrixXd K = gram_matrix(p, pts);
        ASSERT_TRUE(K.isApprox(K.transpose(), 0.0));
        const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff();
        EXPECT_GE(min_eig, -1e-8 * K.trace() / static_cast<double>(K.rows()));
    }
}

TEST(Gram, TwoSeparatedPoints) {
    auto s = unit_space(1, {3});
    const auto d = Dataset::make(s, {{{0.1}, {1}}, {{0.9}, {1}}}, {0.0, 1.0});
    const auto p = EzGpParams::uniform(s, 1.0, 1.0);
    const Eigen::MatrixXd K = gram_matrix(p, d.points());
    EXPECT_LT(K(0, 1), K(0, 0));
    EXPECT_NO_THROW(build_gram(p, d));
}

TEST(Gram, IndefiniteMatrixIsRejected) {
    Eigen::MatrixXd K(2, 2);
    K << 1.0, 2.0, 2.0, 1.0;
    try {
        factorize_gram(K);
        FAIL();
    } catch (const IllConditionedError& e) {
        EXPECT_GT(e.jitter(), 0.0);
    }
}

TEST(Gram, JitterEscalatesForSlightlyIndefiniteMatrix) {
    // Eigenvalues 2 + 3e-8 and -3e-8: 1e-8 jitter fails, 1e-7 succeeds.
    Eigen::MatrixXd K(2, 2);
    K << 1.0, 1.0 + 3e-8, 1.0 + 3e-8, 1.0;
    const auto f = factorize_gram(K);
    EXPECT_NEAR(f.rel_jitter, 1e-7, 1e-20);
    EXPECT_NEAR(f.jitter, 1e-7, 1e-20);
    EXPECT_GE(f.rcond, kMinRcond);
}

// ---------------------------------------------------------------------------
// Dataset

TEST(Dataset, Validation) {
    auto s = unit_space(1, {3});
    EXPECT_THROW(Dataset::make(s, {{{0.1}, {1}}}, {1.0}), ValidationError);
    EXPECT_THROW(Dataset::make(s, {{{0.1}, {1}}, {{0.2}, {1}}}, {1.0}), ValidationError);
    EXPECT_THROW(Dataset::make(s, {{{0.1}, {1}}, {{1.2}, {1}}}, {1.0, 2.0}), ValidationError);
    EXPECT_THROW(Dataset::make(s, {{{0.1}, {1}}, {{0.2}, {1}}}, {1.0, NAN}), ValidationError);
    // Same x, different level is not a duplicate.
    EXPECT_NO_THROW(Dataset::make(s, {{{0.1}, {1}}, {{0.1}, {2}}}, {1.0, 2.0}));
}

TEST(Dataset, DuplicateNamesRows) {
    auto s = unit_space(1, {3});
    try {
        Dataset::make(s, {{{0.1}, {1}}, {{0.3}, {2}}, {{0.1 + 1e-13}, {1}}}, {1.0, 2.0, 3.0});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("rows 0 and 2"), std::string::npos) << e.what();
        EXPECT_EQ(e.field(), "data");
    }
}

TEST(Dataset, LogTransform) {
    EXPECT_NEAR(apply_transform(ResponseTransform::Log, 100.0), 4.6051701859880914, 1e-15);
    EXPECT_THROW(apply_transform(ResponseTransform::Log, 0.0), ValidationError);
    EXPECT_EQ(parse_transform("log"), ResponseTransform::Log);
    EXPECT_THROW(parse_transform("sqrt"), ValidationError);
}

// ---------------------------------------------------------------------------
// Likelihood

TEST(Likelihood, ConstantResponseHasZeroQuadratic) {
    auto s = unit_space(1, {3});
    std::mt19937_64 rng(5);
    const auto p = random_params(s, rng);
    std::vector<MixedPoint> pts{{{0.1}, {1}}, {{0.5}, {2}}, {{0.8}, {3}}, {{0.3}, {1}}};
    const auto d = Dataset::make(s, pts, {2.5, 2.5, 2.5, 2.5});
    const auto v = neg_log_likelihood(p, d);
    EXPECT_NEAR(v.mu_hat, 2.5, 1e-9);
    EXPECT_NEAR(v.quadratic, 0.0, 1e-12);
}

TEST(Likelihood, TwoPointClosedForm) {
    // Phi = [[s, c], [c, s]]: log|Phi| = log(s^2 - c^2), mu_hat = mean(y),
    // quadratic = (y1 - y2)^2 / (2 (s - c)).
    auto s = unit_space(1, {2});
    auto p = EzGpParams::uniform(s, 1.0, 1.0);
    p.sigma2 = {0.7, 0.4};
    p.theta0 = {2.0};
    const auto d = Dataset::make(s, {{{0.2}, {1}}, {{0.6}, {1}}}, {1.3, -0.4});
    const auto v = neg_log_likelihood(p, d);
    const auto f = build_gram(p, d);
    const double ss = 1.1 + f.jitter;
    const double c = 0.7 * std::exp(-2.0 * 0.16) + 0.4 * std::exp(-1.0 * 0.16);
    EXPECT_NEAR(v.mu_hat, 0.45, 1e-12);
    EXPECT_NEAR(v.log_det, std::log(ss * ss - c * c), 1e-10);
    EXPECT_NEAR(v.quadratic, 1.7 * 1.7 / (2.0 * (ss - c)), 1e-10);
    EXPECT_NEAR(v.value, std::log(ss * ss - c * c) + 1.7 * 1.7 / (2.0 * (ss - c)), 1e-10);
}

TEST(Likelihood, VarianceScalingIdentity) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        auto s = unit_space(2, {3});
        const auto p = random_params(s, rng);
        std::vector<MixedPoint> pts;
        std::vector<double> y;
        std::normal_distribution<double> nd;
        for (int i = 0; i < 6; ++i) {
            pts.push_back(random_point(s, rng));
            y.push_back(nd(rng));
        }
        const auto d = Dataset::make(s, pts, y);
        const double c = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 2.0)(rng));
        auto pc = p;
        for (auto& v : pc.sigma2) v *= c;
        const auto v1 = neg_log_likelihood(p, d), v2 = neg_log_likelihood(pc, d);
        ASSERT_EQ(v1.rel_jitter, v2.rel_jitter);
        EXPECT_NEAR(v2.log_det, v1.log_det + 6.0 * std::log(c), 1e-8 * (1.0 + std::abs(v1.log_det)));
        EXPECT_LE(rel_err(v2.quadratic, v1.quadratic / c), 1e-7);
    }
}

TEST(Likelihood, MuIsIgnored) {
    auto s = unit_space(1, {3});
    auto p = EzGpParams::uniform(s, 1.0, 3.0);
    const auto d = Dataset::make(s, {{{0.1}, {1}}, {{0.5}, {2}}, {{0.9}, {3}}}, {1.0, 0.0, 2.0});
    auto q = p;
    q.mu = 123.0;
    EXPECT_EQ(neg_log_likelihood(p, d).value, neg_log_likelihood(q, d).value);
}

// ---------------------------------------------------------------------------
// Brute-force equivalence and prediction

TEST(BruteForce, SmallDatasetsAgreeWithFactorizationPath) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 300; ++t) {
        std::vector<int> levels;
        for (std::size_t h = 0, q = rng() % 3; h < q; ++h) levels.push_back(2 + static_cast<int>(rng() % 3));
        const auto s = unit_space(1 + rng() % 3, levels);
        const auto p = well_posed_params(s, rng);
        const std::size_t n = 2 + rng() % 3;
        std::vector<MixedPoint> pts;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            pts.push_back(random_point(s, rng));
            y.push_back(nd(rng));
        }
        Dataset d;
        try {
            d = Dataset::make(s, pts, y);
        } catch (const ValidationError&) {
            continue;
        }
        const auto model = FittedModel::condition(d, p);
        std::vector<MixedPoint> at{random_point(s, rng), random_point(s, rng), pts[0]};
        const auto bf = brute_force(p, d, model.jitter(), at);
        EXPECT_LE(std::abs(model.nll() - bf.nll), 1e-9 * std::max(1.0, std::abs(bf.nll))) << "t=" << t;
        EXPECT_LE(std::abs(model.params().mu - bf.mu_hat), 1e-9 * std::max(1.0, std::abs(bf.mu_hat)));
        for (std::size_t i = 0; i < at.size(); ++i) {
            const auto pr = model.predict(at[i]);
            EXPECT_LE(std::abs(pr.mean - bf.preds[i].mean), 1e-9 * std::max(1.0, std::abs(bf.preds[i].mean)));
            EXPECT_LE(std::abs(pr.sd * pr.sd - bf.preds[i].sd * bf.preds[i].sd), 1e-9 * p.total_variance());
        }
    }
}

TEST(Prediction, TwoPointSymmetricClosedForm) {
    auto s = unit_space(1, {});
    auto p = EzGpParams::uniform(s, 1.0, 2.0);
    const auto d = Dataset::make(s, {{{0.25}, {}}, {{0.75}, {}}}, {1.0, 3.0});
    const auto m = FittedModel::condition(d, p);
    const double ss = 1.0 + m.jitter();
    const double c = std::exp(-2.0 * 0.25);
    const double r = std::exp(-2.0 * 0.0625);
    const auto pr = m.predict({{0.5}, {}});
    const double var = 1.0 - 2.0 * r * r / (ss + c) + std::pow(1.0 - 2.0 * r / (ss + c), 2) * (ss + c) / 2.0;
    EXPECT_NEAR(pr.mean, 2.0, 1e-10);
    EXPECT_NEAR(pr.sd * pr.sd, var, 1e-10);
}

TEST(Prediction, FarAwayRevertsToMeanWithInflatedVariance) {
    auto s = unit_space(1, {2});
    auto p = EzGpParams::uniform(s, 1.0, 100.0);
    p.sigma2 = {0.8, 0.3};
    const auto d = Dataset::make(s, {{{0.0}, {1}}, {{0.05}, {1}}, {{0.1}, {1}}}, {1.0, 2.0, 4.0});
    const auto m = FittedModel::condition(d, p);
    const auto pr = m.predict({{1.0}, {2}});
    EXPECT_NEAR(pr.mean, m.params().mu, 1e-12);
    EXPECT_NEAR(pr.sd * pr.sd, 1.1 + 1.0 / m.one_phi_inv_one(), 1e-12);
}

TEST(Prediction, InterpolatesTrainingPoints) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 50; ++t) {
        const auto s = unit_space(2, {3});
        const auto p = well_posed_params(s, rng);
        std::vector<MixedPoint> pts;
        std::vector<double> y;
        std::normal_distribution<double> nd;
        for (int i = 0; i < 10; ++i) {
            pts.push_back(random_point(s, rng));
            y.push_back(std::sin(3.0 * pts.back().x[0]) + pts.back().z[0] + 0.1 * nd(rng));
        }
        const auto d = Dataset::make(s, pts, y);
        const auto m = FittedModel::condition(d, p);
        const double range = d.response_range();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto pr = m.predict(pts[i]);
            EXPECT_LE(std::abs(pr.mean - y[i]), 1e-6 * range) << "t=" << t;
            EXPECT_LE(pr.sd * pr.sd, 10.0 * m.jitter() + 1e-14);
        }
    }
}

TEST(Prediction, BatchMatchesPointwiseAndPermutes) {
    auto s = unit_space(2, {3});
    std::mt19937_64 rng(9);
    const auto p = random_params(s, rng);
    const auto d = Dataset::make(s, {{{0.1, 0.2}, {1}}, {{0.5, 0.9}, {2}}, {{0.7, 0.4}, {3}}}, {0.3, 1.0, -0.2});
    const auto m = FittedModel::condition(d, p);
    std::vector<MixedPoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(random_point(s, rng));
    pts.push_back(d.points()[1]);
    const auto batch = m.predict_batch(pts, 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto one = m.predict(pts[i]);
        EXPECT_EQ(batch[i].mean, one.mean);
        EXPECT_EQ(batch[i].sd, one.sd);
    }
    EXPECT_NEAR(batch.back().mean, 1.0, 1e-6);

    const std::vector<MixedPoint> single{pts[3]};
    EXPECT_EQ(m.predict_batch(single)[0].mean, m.predict(pts[3]).mean);

    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<MixedPoint> permuted;
    for (auto i : perm) permuted.push_back(pts[i]);
    const auto pb = m.predict_batch(permuted);
    for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(pb[i].mean, batch[perm[i]].mean);
}

TEST(Prediction, SdIsFiniteAndNonNegative) {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 30; ++t) {
        const auto s = unit_space(1, {3});
        const auto p = random_params(s, rng);
        std::vector<MixedPoint> pts;
        std::vector<double> y;
        for (int i = 0; i < 12; ++i) {
            pts.push_back(random_point(s, rng));
            y.push_back(pts.back().x[0]);
        }
        const auto m = FittedModel::condition(Dataset::make(s, pts, y), p);
        for (int i = 0; i < 50; ++i) {
            const auto pr = m.predict(random_point(s, rng));
            EXPECT_TRUE(std::isfinite(pr.sd));
            EXPECT_GE(pr.sd, 0.0);
        }
    }
}

TEST(Prediction, CachedSolvesSatisfyTheSystem) {
    auto s = unit_space(2, {2});
    std::mt19937_64 rng(11);
    const auto p = random_params(s, rng);
    std::vector<MixedPoint> pts;
    std::vector<double> y;
    for (int i = 0; i < 8; ++i) {
        pts.push_back(random_point(s, rng));
        y.push_back(std::cos(4.0 * pts.back().x[1]));
    }
    const auto d = Dataset::make(s, pts, y);
    const auto sol = detail::profiled_solve(p, d, kDefaultJitter);
    Eigen::MatrixXd K = gram_matrix(p, d.points());
    K.diagonal().array() += sol.factor.jitter;
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(8);
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 8);
    const Eigen::VectorXd rhs = yv - sol.mu_hat * one;
    EXPECT_LE((K * sol.alpha - rhs).norm(), 1e-8 * rhs.norm());
    EXPECT_LE((K * sol.phi_inv_one - one).norm(), 1e-8 * one.norm());
}

// ---------------------------------------------------------------------------
// Fitting

TEST(Fit, EveryStartEndsNoWorseThanItBegan) {
    auto s = unit_space(1, {3});
    std::vector<MixedPoint> pts;
    std::vector<double> y;
    std::mt19937_64 rng(12);
    for (int i = 0; i < 12; ++i) {
        pts.push_back(random_point(s, rng));
        y.push_back(std::cos(6.0 * pts.back().x[0]) * pts.back().z[0]);
    }
    const auto d = Dataset::make(s, pts, y);
    FitSettings fs;
    fs.seed = 3;
    std::vector<StartResult> diag;
    const auto m = fit(d, fs, nullptr, &diag);
    ASSERT_EQ(diag.size(), fs.starts);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : diag) {
        if (!r.ok) continue;
        EXPECT_LE(r.final_value, r.initial_value);
        best = std::min(best, r.final_value);
    }
    EXPECT_NEAR(m.nll(), best, 1e-9 * std::max(1.0, std::abs(best)));
    for (double th : m.params().theta0) {
        EXPECT_GE(th, fs.theta_min * (1 - 1e-9));
        EXPECT_LE(th, fs.theta_max * (1 + 1e-9));
    }
}

TEST(Fit, DeterministicUnderFixedSeed) {
    auto s = unit_space(2, {2});
    std::vector<MixedPoint> pts;
    std::vector<double> y;
    std::mt19937_64 rng(13);
    for (int i = 0; i < 10; ++i) {
        pts.push_back(random_point(s, rng));
        y.push_back(pts.back().x[0] - pts.back().x[1] * pts.back().z[0]);
    }
    const auto d = Dataset::make(s, pts, y);
    FitSettings fs;
    fs.seed = 99;
    const auto a = fit(d, fs), b = fit(d, fs);
    EXPECT_EQ(a.nll(), b.nll());
    EXPECT_TRUE(same_params(a.params(), b.params()));
}

TEST(Fit, ConstantResponse) {
    auto s = unit_space(1, {3});
    const auto d = Dataset::make(s, {{{0.1}, {1}}, {{0.4}, {2}}, {{0.8}, {3}}, {{0.6}, {1}}}, {4.0, 4.0, 4.0, 4.0});
    const auto m = fit(d);
    EXPECT_NEAR(m.params().mu, 4.0, 1e-9);
    for (double x : {0.0, 0.33, 0.95}) {
        for (int z : {1, 2, 3}) {
            const auto pr = m.predict({{x}, {z}});
            EXPECT_NEAR(pr.mean, 4.0, 1e-9);
            EXPECT_LE(pr.sd, std::sqrt(m.params().total_variance()) + 1e-12);
        }
    }
}

TEST(Fit, MinimalTwoPointFit) {
    auto s = unit_space(1, {3});
    const auto d = Dataset::make(s, {{{0.1}, {1}}, {{0.9}, {2}}}, {0.0, 1.0});
    EXPECT_NO_THROW(fit(d));
}

TEST(Fit, RefitRecoversKnownProcess) {
    auto s = unit_space(1, {3});
    auto truth = EzGpParams::uniform(s, 1.0, 1.0);
    truth.mu = 0.5;
    truth.sigma2 = {1.0, 0.5};
    truth.theta0 = {8.0};
    truth.theta_h[0] << 5.0, 15.0, 30.0;
    std::mt19937_64 rng(14);
    std::vector<MixedPoint> all;
    for (int i = 0; i < 180; ++i) all.push_back(random_point(s, rng));
    const auto path = sample_path(truth, all, rng);

    std::vector<MixedPoint> train(all.begin(), all.begin() + 80);
    std::vector<double> y(path.data(), path.data() + 80);
    const auto d = Dataset::make(s, train, y);
    const auto known = FittedModel::condition(d, truth);
    FitSettings fs;
    fs.seed = 1;
    const auto fitted = fit(d, fs);
    double err_known = 0.0, err_fit = 0.0;
    for (std::size_t i = 80; i < all.size(); ++i) {
        err_known += std::abs(known.predict(all[i]).mean - path(static_cast<Eigen::Index>(i)));
        err_fit += std::abs(fitted.predict(all[i]).mean - path(static_cast<Eigen::Index>(i)));
    }
    EXPECT_LE(err_fit, 1.5 * err_known) << "fitted " << err_fit / 100 << " known " << err_known / 100;
}

TEST(Fit, WarmStartNeverHurts) {
    auto s = unit_space(1, {3});
    std::vector<MixedPoint> pts;
    std::vector<double> y;
    std::mt19937_64 rng(15);
    for (int i = 0; i < 12; ++i) {
        pts.push_back(random_point(s, rng));
        y.push_back(std::sin(5.0 * pts.back().x[0]) + pts.back().z[0]);
    }
    const auto d = Dataset::make(s, pts, y);
    FitSettings fs;
    fs.starts = 2;
    const auto cold = fit(d, fs);
    const auto warm = fit(d, fs, &cold.params());
    EXPECT_LE(warm.nll(), cold.nll() + 1e-9 * std::abs(cold.nll()));
}
