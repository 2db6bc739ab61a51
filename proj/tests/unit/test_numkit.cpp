#include <cmath>
#include <numeric>

#include <doctest.h>

#include "sprobe/error.hpp"
#include "sprobe/numkit.hpp"
#include "sprobe/rng.hpp"
#include "support/oracles.hpp"

using namespace sprobe;
using namespace sprobe::numkit;

namespace {

MatrixXd gaussian(Rng& rng, Eigen::Index n, Eigen::Index d) {
    MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal();
    return X;
}

}  // namespace

TEST_CASE("ridge fit matches closed-form and augmented-QR oracles") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto n = static_cast<Eigen::Index>(20 + rng.index(150));
        const auto d = static_cast<Eigen::Index>(1 + rng.index(30));
        MatrixXd X = gaussian(rng, n, d) * 3.0;
        X.array() += 5.0;
        VectorXd w = VectorXd::NullaryExpr(d, [&] { return rng.normal(); });
        VectorXd y = X * w + VectorXd::NullaryExpr(n, [&] { return 0.1 * rng.normal(); });
        y.array() += 7.0;
        for (double alpha : {1e-3, 1.0, 100.0}) {
            const auto m = ridge_fit(X, y, alpha);
            const auto ne = oracle::ridge_normal_equations(X, y, alpha);
            const auto qr = oracle::ridge_augmented_qr(X, y, alpha);
            CHECK((m.weights - ne.w).cwiseAbs().maxCoeff() <= 1e-8);
            CHECK(std::abs(m.intercept - ne.b) <= 1e-8);
            CHECK((m.weights - qr.w).cwiseAbs().maxCoeff() <= 1e-8);
            CHECK(m.alpha == alpha);
        }
    }
}

TEST_CASE("ridge fit edge cases") {
    SUBCASE("exact linear data at alpha 0 recovers the coefficients") {
        Rng rng(1);
        MatrixXd X = gaussian(rng, 50, 4);
        VectorXd w(4);
        w << 1.0, -2.0, 0.5, 3.0;
        VectorXd y = (X * w).array() + 10.0;
        const auto m = ridge_fit(X, y, 0.0);
        CHECK((m.weights - w).norm() < 1e-10);
        CHECK(m.intercept == doctest::Approx(10.0).epsilon(1e-12));
    }
    SUBCASE("constant features give the intercept-only model") {
        MatrixXd X = MatrixXd::Constant(10, 3, 0.7);
        VectorXd y = VectorXd::LinSpaced(10, 1.0, 10.0);
        const auto m = ridge_fit(X, y, 1.0);
        CHECK(m.weights.isZero(0.0));
        CHECK(m.intercept == 5.5);
    }
    SUBCASE("rank deficiency at alpha 0 is reported") {
        Rng rng(2);
        MatrixXd X = gaussian(rng, 30, 3);
        X.col(2) = X.col(0) + X.col(1);
        CHECK_THROWS_AS(ridge_fit(X, VectorXd::Ones(30), 0.0), RankDeficientError);
        CHECK_NOTHROW(ridge_fit(X, VectorXd::Ones(30), 1e-3));
    }
    SUBCASE("invalid inputs") {
        MatrixXd X = MatrixXd::Ones(5, 2);
        CHECK_THROWS_AS(ridge_fit(X, VectorXd::Ones(4), 1.0), ValidationError);
        CHECK_THROWS_AS(ridge_fit(X, VectorXd::Ones(5), -1.0), ValidationError);
        X(0, 0) = NAN;
        CHECK_THROWS_AS(ridge_fit(X, VectorXd::Ones(5), 1.0), ValidationError);
    }
}

TEST_CASE("k-fold assignment partitions rows into near-equal folds") {
    for (std::size_t n : {5u, 17u, 100u, 203u}) {
        for (int k : {2, 5, 7}) {
            if (n < static_cast<std::size_t>(k)) continue;
            const auto f = kfold_assignment(n, k, 3);
            std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
            for (int x : f) {
                REQUIRE(x >= 0);
                REQUIRE(x < k);
                ++count[static_cast<std::size_t>(x)];
            }
            for (int j = 0; j < k; ++j) {
                const std::size_t expect = n / static_cast<std::size_t>(k) + (static_cast<std::size_t>(j) < n % k ? 1 : 0);
                CHECK(count[static_cast<std::size_t>(j)] == expect);
            }
            CHECK(kfold_assignment(n, k, 3) == f);
        }
    }
    CHECK_THROWS_AS(kfold_assignment(3, 5, 0), ValidationError);
    CHECK_THROWS_AS(kfold_assignment(10, 1, 0), ValidationError);
}

TEST_CASE("ridge CV agrees with an exhaustive re-implementation") {
    const auto grid = default_alpha_grid();
    REQUIRE(grid.size() == 10);
    CHECK(grid.front() == doctest::Approx(1e-3));
    CHECK(grid.back() == doctest::Approx(1e6));
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        Rng rng(100 + seed);
        const auto n = static_cast<Eigen::Index>(40 + rng.index(160));
        const auto d = static_cast<Eigen::Index>(2 + rng.index(40));
        MatrixXd X = gaussian(rng, n, d);
        VectorXd w = VectorXd::NullaryExpr(d, [&] { return rng.normal() * (rng.uniform() < 0.3 ? 1.0 : 0.05); });
        VectorXd y = X * w + VectorXd::NullaryExpr(n, [&] { return rng.normal(); });
        const auto cv = ridge_cv(X, y, grid, 5, seed);
        std::vector<double> mse;
        const double expect = oracle::exhaustive_cv_alpha(X, y, grid, kfold_assignment(static_cast<std::size_t>(n), 5, seed), 5, &mse);
        CHECK(cv.chosen_alpha == expect);
        for (std::size_t a = 0; a < grid.size(); ++a)
            CHECK(cv.mean_validation_mse[a] == doctest::Approx(mse[a]).epsilon(1e-9));
        const auto refit = ridge_fit(X, y, cv.chosen_alpha);
        CHECK((cv.model.weights - refit.weights).norm() == 0.0);
    }
}

TEST_CASE("ridge CV breaks exact ties toward the larger penalty") {
    // Constant features: every alpha predicts the training mean, so all scores tie.
    MatrixXd X = MatrixXd::Constant(20, 2, 1.0);
    VectorXd y = VectorXd::LinSpaced(20, 0.0, 19.0);
    const auto cv = ridge_cv(X, y, {0.1, 10.0, 1.0}, 4, 0);
    CHECK(cv.chosen_alpha == 10.0);
    CHECK_THROWS_AS(ridge_cv(X, y, {}, 4, 0), ValidationError);
    CHECK_THROWS_AS(ridge_cv(X, y, {0.0}, 4, 0), ValidationError);
}

TEST_CASE("covariance spectrum matches the SVD oracle") {
    Rng rng(4);
    MatrixXd X = gaussian(rng, 300, 6);
    X.col(1) *= 3.0;
    X.col(4) *= 0.1;
    const VectorXd ev = covariance_eigenvalues(X);
    const VectorXd ref = oracle::covariance_spectrum_svd(X);
    REQUIRE(ev.size() == 6);
    for (Eigen::Index i = 0; i < 6; ++i) CHECK(ev(i) == doctest::Approx(ref(i)).epsilon(1e-10));
    for (Eigen::Index i = 1; i < 6; ++i) CHECK(ev(i - 1) >= ev(i));

    // Rank-deficient data: trailing eigenvalues are clamped at zero, not negative.
    MatrixXd low = gaussian(rng, 10, 20);
    const VectorXd lev = covariance_eigenvalues(low);
    CHECK(lev.minCoeff() >= 0.0);
    CHECK(lev.tail(11).maxCoeff() <= 1e-10 * lev(0));
}

TEST_CASE("participation ratio closed forms") {
    CHECK(participation_ratio(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(4.0));
    CHECK(participation_ratio(std::vector<double>{5, 0, 0}) == doctest::Approx(1.0));
    CHECK(participation_ratio(std::vector<double>{2, 1}) == doctest::Approx(9.0 / 5.0));
    CHECK_THROWS_AS(participation_ratio(std::vector<double>{0, 0}), ValidationError);
    CHECK_THROWS_AS(participation_ratio(std::vector<double>{1, -1}), ValidationError);
    // Scale invariance and the 1 <= d_eff <= d property.
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        VectorXd l = VectorXd::NullaryExpr(10, [&] { return rng.uniform(0.0, 5.0); });
        const double pr = participation_ratio(l);
        CHECK(pr >= 1.0);
        CHECK(pr <= 10.0 + 1e-12);
        CHECK(participation_ratio(VectorXd(l * 7.3)) == doctest::Approx(pr).epsilon(1e-12));
        CHECK(pr == doctest::Approx(oracle::participation_ratio(l)).epsilon(1e-12));
    }
}

TEST_CASE("PCA components are orthonormal with a deterministic sign") {
    Rng rng(12);
    MatrixXd X = gaussian(rng, 500, 5);
    X.col(0) = 4.0 * X.col(0) + X.col(1);
    const auto pca = pca_fit(X, 3);
    const MatrixXd G = pca.components.transpose() * pca.components;
    CHECK((G - MatrixXd::Identity(3, 3)).norm() < 1e-10);
    for (Eigen::Index c = 0; c < 3; ++c) {
        Eigen::Index k;
        pca.components.col(c).cwiseAbs().maxCoeff(&k);
        CHECK(pca.components(k, c) > 0.0);
    }
    // Variance of PC scores equals the eigenvalue; projections of a negated copy flip.
    const VectorXd s = pca.project(X, 0);
    CHECK((s.array() - s.mean()).square().mean() == doctest::Approx(pca.eigenvalues(0)).epsilon(1e-9));
    CHECK(s.mean() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("pairwise spread: exhaustive, sampled, and closed forms") {
    // Equilateral triangle with unit sides.
    MatrixXd T(3, 2);
    T << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2;
    CHECK(pairwise_spread(T, 100, 0) == doctest::Approx(1.0).epsilon(1e-12));
    Rng rng(5);
    MatrixXd X = gaussian(rng, 60, 4);
    CHECK(pairwise_spread(X, 1u << 20, 0) == doctest::Approx(oracle::exhaustive_spread(X)).epsilon(1e-12));
    // A pair budget below n(n-1)/2 switches to sampling, which stays close.
    CHECK(pairwise_spread(X, 800, 1) == doctest::Approx(oracle::exhaustive_spread(X)).epsilon(0.03));
    CHECK(pairwise_spread(X, 800, 1) == pairwise_spread(X, 800, 1));
    // Translation invariance.
    MatrixXd Y = X.array() + 100.0;
    CHECK(pairwise_spread(Y, 1u << 20, 0) == doctest::Approx(pairwise_spread(X, 1u << 20, 0)).epsilon(1e-9));
}

TEST_CASE("spearman with ties matches the rank oracle") {
    CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(std::isnan(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3})));
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x(40), y(40);
        for (std::size_t i = 0; i < 40; ++i) {
            x[i] = static_cast<double>(rng.index(8));
            y[i] = x[i] * 0.5 + static_cast<double>(rng.index(5));
        }
        CHECK(spearman(x, y) == doctest::Approx(oracle::spearman(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("binning helpers use half-open bins") {
    CHECK(bin_index(980.0, 10.0) == 98);
    CHECK(bin_index(979.999, 10.0) == 97);
    CHECK(bin_index(-0.5, 1.0) == -1);
    CHECK(bin_center(97, 10.0) == 975.0);
    std::vector<double> x{1, 2, 11, 12, 13, 25};
    std::vector<double> y{1, 3, 10, 20, 30, 99};
    const auto bins = binned_conditional_mean(x, y, 10.0, 2);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].center == 5.0);
    CHECK(bins[0].mean == 2.0);
    CHECK(bins[1].center == 15.0);
    CHECK(bins[1].count == 3);
    CHECK(bins[1].mean == 20.0);
}

TEST_CASE("summary statistics") {
    std::vector<double> v{4, 1, 3, 2};
    CHECK(quantile(v, 0.5) == 2.5);
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.9) == doctest::Approx(3.7));
    CHECK(mean(v) == 2.5);
    CHECK(stddev(v) == doctest::Approx(std::sqrt(1.25)));
    CHECK_THROWS_AS(quantile({}, 0.5), ValidationError);
}

TEST_CASE("kernel smoother reproduces constants and interpolates lines") {
    std::vector<double> x, c, l;
    for (int i = 0; i <= 100; ++i) {
        x.push_back(i * 0.1);
        c.push_back(3.0);
        l.push_back(2.0 * i * 0.1 + 1.0);
    }
    std::vector<double> at{2.0, 5.0, 8.0};
    for (double v : kernel_smooth(x, c, at, 0.5)) CHECK(v == doctest::Approx(3.0));
    const auto s = kernel_smooth(x, l, at, 0.3);
    for (std::size_t i = 0; i < at.size(); ++i) CHECK(s[i] == doctest::Approx(2.0 * at[i] + 1.0).epsilon(1e-6));
}
