#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sdgen/density.hpp"
#include "sdgen/error.hpp"
#include "test_util.hpp"

using namespace sdgen;

TEST_CASE("kde density closed forms") {
    SUBCASE("single point at the origin") {
        const double h = 0.2;
        for (int d = 1; d <= 3; ++d) {
            const auto model = density::kde_fit(Eigen::MatrixXd::Zero(1, d), h);
            const Eigen::VectorXd at_origin =
                density::kde_density(model, Eigen::MatrixXd::Zero(1, d));
            const double expected = std::pow(2.0 * std::numbers::pi * h * h, -0.5 * d);
            CHECK(at_origin[0] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("density of a symmetric point set is symmetric") {
        Eigen::MatrixXd pts(2, 2);
        pts << -0.7, 0.1, 0.7, -0.1;
        const auto model = density::kde_fit(pts, 0.2);
        Eigen::MatrixXd queries(2, 2);
        queries << 0.3, 0.25, -0.3, -0.25;
        const Eigen::VectorXd dens = density::kde_density(model, queries);
        CHECK(dens[0] == doctest::Approx(dens[1]).epsilon(1e-12));
    }
    SUBCASE("density integrates to one") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> dist(0.0, 0.3);
        for (int d = 1; d <= 2; ++d) {
            Eigen::MatrixXd pts(40, d);
            for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = dist(rng);
            const auto model = density::kde_fit(pts, 0.2);
            const auto grid = density::EvalGrid::uniform(d, -3.0, 3.0, 121);
            const Eigen::VectorXd dens = density::kde_density(model, grid.points());
            const double cell = std::pow(6.0 / 120.0, d);
            CHECK(dens.sum() * cell == doctest::Approx(1.0).epsilon(0.01));
        }
    }
    SUBCASE("empty points or bad bandwidth throw") {
        CHECK_THROWS_AS(density::kde_fit(Eigen::MatrixXd(0, 2), 0.2), InputError);
        CHECK_THROWS_AS(density::kde_fit(Eigen::MatrixXd::Zero(1, 2), 0.0), InputError);
    }
}

TEST_CASE("eval_on_grid") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    SUBCASE("normalized distribution sums to one") {
        Eigen::MatrixXd pts(25, 2);
        for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = unif(rng);
        const auto grid = density::EvalGrid::uniform(2, -1.2, 1.2, 40);
        const Eigen::VectorXd P = density::eval_on_grid(density::kde_fit(pts, 0.2), grid);
        CHECK((P.array() >= 0.0).all());
        CHECK(P.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("matches the naive double-loop oracle") {
        for (int trial = 0; trial < 12; ++trial) {
            const int d = 1 + trial % 3;
            const int n = 5 + trial * 7;
            Eigen::MatrixXd pts(n, d);
            for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = unif(rng);
            const auto grid = density::EvalGrid::uniform(d, -1.2, 1.2, d == 3 ? 8 : 15);
            const Eigen::VectorXd fast = density::eval_on_grid(density::kde_fit(pts, 0.2), grid);
            const Eigen::VectorXd naive = testutil::naive_grid_distribution(pts, 0.2, grid);
            CHECK((fast - naive).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("translation of points and bounds together is invariant") {
        Eigen::MatrixXd pts(30, 2);
        for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = unif(rng);
        const auto grid = density::EvalGrid::uniform(2, -1.2, 1.2, 20);
        const Eigen::VectorXd base = density::eval_on_grid(density::kde_fit(pts, 0.2), grid);

        const double shift = 5.25;
        density::EvalGrid shifted = grid;
        for (auto& axis : shifted.axes) {
            axis.lower += shift;
            axis.upper += shift;
        }
        const Eigen::VectorXd moved = density::eval_on_grid(
            density::kde_fit(pts.array() + shift, 0.2), shifted);
        CHECK((base - moved).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("points far outside the grid raise a coverage error") {
        const auto grid = density::EvalGrid::uniform(2, -1.2, 1.2, 10);
        CHECK_THROWS_AS(
            density::eval_on_grid(density::kde_fit(Eigen::MatrixXd::Constant(3, 2, 100.0), 0.2), grid),
            CoverageError);
    }
}

TEST_CASE("kl_divergence") {
    SUBCASE("identical distributions give zero") {
        Eigen::VectorXd p(4);
        p << 0.1, 0.2, 0.3, 0.4;
        CHECK(density::kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("hand-computed two-cell value") {
        Eigen::VectorXd p(2), q(2);
        p << 0.75, 0.25;
        q << 0.5, 0.5;
        const double expected = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
        CHECK(density::kl_divergence(p, q) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(density::kl_divergence(p, q) == doctest::Approx(0.130812).epsilon(1e-5));
        // asymmetry
        CHECK(density::kl_divergence(q, p) != doctest::Approx(density::kl_divergence(p, q)));
    }
    SUBCASE("Gibbs inequality on shared support with epsilon 0") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> unif(0.05, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXd p(8), q(8);
            for (int i = 0; i < 8; ++i) {
                p[i] = unif(rng);
                q[i] = unif(rng);
            }
            p /= p.sum();
            q /= q.sum();
            CHECK(density::kl_divergence(p, q, 0.0) >= -1e-15);
        }
    }
    SUBCASE("length mismatch throws") {
        CHECK_THROWS_AS(
            density::kl_divergence(Eigen::VectorXd::Constant(2, 0.5), Eigen::VectorXd::Constant(3, 1.0 / 3)),
            ShapeError);
    }
}

TEST_CASE("cumulative_validation_kl") {
    std::mt19937_64 data_rng(11);
    std::normal_distribution<double> noise(0.0, 0.1);

    GroupedDataset validation;
    for (int g = 0; g < 3; ++g) {
        CodeGroup group;
        group.physical_code = 0.2 * g;
        group.code = Eigen::VectorXd::Constant(1, 0.2 * g);
        group.features.resize(60, 2);
        for (Eigen::Index i = 0; i < group.features.rows(); ++i) {
            group.features(i, 0) = 0.3 * g - 0.3 + noise(data_rng);
            group.features(i, 1) = noise(data_rng);
        }
        validation.push_back(std::move(group));
    }
    const auto grid = density::EvalGrid::uniform(2, -1.2, 1.2, 30);

    SUBCASE("a generator that replays the real points scores near zero") {
        int which = 0;
        density::Sampler replay = [&](const Eigen::VectorXd&, int, std::mt19937_64&) {
            return validation[which++].features;
        };
        std::mt19937_64 rng(0);
        const auto report =
            density::cumulative_validation_kl(replay, validation, grid, 0.2, 60, rng);
        REQUIRE(report.per_code.size() == 3);
        for (const auto& [code, kl] : report.per_code) CHECK(kl < 1e-6);
        double sum = 0.0;
        for (const auto& [code, kl] : report.per_code) sum += kl;
        CHECK(report.cumulative == sum);
    }
    SUBCASE("a distant cluster scores at least 10x worse than replay") {
        density::Sampler distant = [&](const Eigen::VectorXd&, int n, std::mt19937_64& rng) {
            Eigen::MatrixXd pts(n, 2);
            std::normal_distribution<double> d(0.9, 0.05);
            for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = d(rng);
            return pts;
        };
        int which = 0;
        density::Sampler replay = [&](const Eigen::VectorXd&, int, std::mt19937_64&) {
            return validation[which++].features;
        };
        std::mt19937_64 rng_a(0), rng_b(0);
        const double kl_replay =
            density::cumulative_validation_kl(replay, validation, grid, 0.2, 60, rng_a).cumulative;
        const double kl_distant =
            density::cumulative_validation_kl(distant, validation, grid, 0.2, 60, rng_b).cumulative;
        CHECK(kl_distant > 10.0 * std::max(kl_replay, 1e-9));
    }
    SUBCASE("empty validation group throws") {
        GroupedDataset bad = validation;
        bad[1].features.resize(0, 2);
        density::Sampler noop = [](const Eigen::VectorXd&, int n, std::mt19937_64&) {
            return Eigen::MatrixXd::Zero(n, 2);
        };
        std::mt19937_64 rng(0);
        CHECK_THROWS_AS(density::cumulative_validation_kl(noop, bad, grid, 0.2, 10, rng),
                        InputError);
    }
}

TEST_CASE("grid refinement changes KL by less than 5 percent") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> a(0.0, 0.25), b(0.2, 0.3);
    Eigen::MatrixXd pa(120, 2), pb(120, 2);
    for (Eigen::Index i = 0; i < pa.size(); ++i) pa.data()[i] = a(rng);
    for (Eigen::Index i = 0; i < pb.size(); ++i) pb.data()[i] = b(rng);

    auto kl_at = [&](int res) {
        const auto grid = density::EvalGrid::uniform(2, -1.2, 1.2, res);
        const Eigen::VectorXd P = density::eval_on_grid(density::kde_fit(pa, 0.2), grid);
        const Eigen::VectorXd Q = density::eval_on_grid(density::kde_fit(pb, 0.2), grid);
        return density::kl_divergence(P, Q);
    };
    const double coarse = kl_at(40);
    const double fine = kl_at(80);
    CHECK(std::abs(fine - coarse) / coarse < 0.05);
}
