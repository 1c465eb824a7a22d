#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "sdgen/error.hpp"
#include "sdgen/features.hpp"
#include "test_util.hpp"

using namespace sdgen;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

// data with a controlled, well-separated spectrum
Eigen::MatrixXd spectrum_data(Eigen::Index rows, const Eigen::VectorXd& scales,
                              std::uint64_t seed) {
    Eigen::MatrixXd base = random_matrix(rows, scales.size(), seed);
    return base * scales.asDiagonal();
}

}  // namespace

TEST_CASE("normalizer maps column ranges onto [-1, 1]") {
    Eigen::MatrixXd data(3, 2);
    data << 0.0, 7.0, 5.0, 7.0, 10.0, 7.0;
    const auto norm = features::fit_normalizer(data);
    const Eigen::MatrixXd mapped = features::normalize(data, norm);
    CHECK(mapped(0, 0) == doctest::Approx(-1.0));
    CHECK(mapped(1, 0) == doctest::Approx(0.0));
    CHECK(mapped(2, 0) == doctest::Approx(1.0));
    // constant column flagged and mapped to zero
    CHECK(norm.constant[1]);
    CHECK_FALSE(norm.constant[0]);
    CHECK(mapped.col(1).isZero());
    // denormalize restores the constant
    const Eigen::MatrixXd back = features::denormalize(mapped, norm);
    CHECK((back - data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize/denormalize round-trips random data") {
    const Eigen::MatrixXd data = 3.0 * random_matrix(50, 6, 9).array() + 2.0;
    const auto norm = features::fit_normalizer(data);
    const Eigen::MatrixXd back = features::denormalize(features::normalize(data, norm), norm);
    CHECK((back - data).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(features::fit_normalizer(Eigen::MatrixXd(0, 3)), InputError);
}

TEST_CASE("pca on a perfect line finds rank one") {
    Eigen::MatrixXd data(30, 2);
    for (int i = 0; i < 30; ++i) {
        const double t = -1.0 + 2.0 * i / 29.0;
        data(i, 0) = t;
        data(i, 1) = 0.5 * t;
    }
    const auto model = features::fit_pca(data, 2);
    CHECK(model.eigenvalues[0] > 0.0);
    CHECK(model.eigenvalues[1] <= 1e-10);
}

TEST_CASE("pca eigenvalue sum equals total variance") {
    const Eigen::MatrixXd data = spectrum_data(60, Eigen::Vector4d(3.0, 2.0, 1.0, 0.5), 4);
    const auto model = features::fit_pca(data, 4);
    const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    const double trace =
        (centered.transpose() * centered / (data.rows() - 1.0)).trace();
    CHECK(model.eigenvalues.sum() == doctest::Approx(trace).epsilon(1e-9));
}

TEST_CASE("pca agrees with an SVD oracle on a 20x5 matrix") {
    Eigen::VectorXd scales(5);
    scales << 4.0, 3.0, 2.0, 1.0, 0.5;
    const Eigen::MatrixXd data = spectrum_data(20, scales, 81);
    const auto model = features::fit_pca(data, 3);

    // oracle: thin SVD of the centered data
    const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    for (int k = 0; k < 3; ++k) {
        const double sigma = svd.singularValues()[k];
        CHECK(model.eigenvalues[k] ==
              doctest::Approx(sigma * sigma / (data.rows() - 1.0)).epsilon(1e-9));
        // sine of the angle between the two routes' components; the sine
        // form stays resolvable down to machine precision
        const Eigen::VectorXd impl = model.components.row(k).transpose();
        const Eigen::VectorXd oracle = svd.matrixV().col(k);
        const double angle = std::asin(
            std::min(1.0, (impl - impl.dot(oracle) * oracle).norm()));
        CHECK(angle < 1e-8);
    }
}

TEST_CASE("pca components are orthonormal with non-increasing eigenvalues") {
    const Eigen::MatrixXd data = spectrum_data(80, Eigen::Vector4d(2.5, 1.5, 0.8, 0.3), 12);
    const auto model = features::fit_pca(data, 3);
    const Eigen::MatrixXd gram = model.components * model.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 1; k < 3; ++k) CHECK(model.eigenvalues[k] <= model.eigenvalues[k - 1]);
    // sign convention: the largest-magnitude entry of each component is positive
    for (int k = 0; k < 3; ++k) {
        Eigen::Index imax = 0;
        model.components.row(k).cwiseAbs().maxCoeff(&imax);
        CHECK(model.components(k, imax) > 0.0);
    }
}

TEST_CASE("project and reconstruct") {
    const Eigen::MatrixXd data = spectrum_data(50, Eigen::Vector4d(3.0, 2.0, 1.0, 0.4), 7);

    SUBCASE("the mean projects to zero") {
        const auto model = features::fit_pca(data, 3);
        const Eigen::MatrixXd score =
            features::project(data.colwise().mean(), model);
        CHECK(score.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("full-rank round trip") {
        const auto model = features::fit_pca(data, 4);
        const Eigen::MatrixXd back =
            features::reconstruct(features::project(data, model), model);
        CHECK((back - data).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("truncated reconstruction error equals the dropped eigenvalue sum") {
        const auto full = features::fit_pca(data, 4);
        const auto truncated = features::fit_pca(data, 2);
        const Eigen::MatrixXd back =
            features::reconstruct(features::project(data, truncated), truncated);
        const double mse =
            (data - back).rowwise().squaredNorm().sum() / (data.rows() - 1.0);
        const double dropped = full.eigenvalues.tail(2).sum();
        CHECK(mse == doctest::Approx(dropped).epsilon(1e-6));
    }
    SUBCASE("projected scores are decorrelated") {
        const auto model = features::fit_pca(data, 3);
        const Eigen::MatrixXd scores = features::project(data, model);
        const Eigen::MatrixXd centered = scores.rowwise() - scores.colwise().mean();
        const Eigen::MatrixXd cov = centered.transpose() * centered / (scores.rows() - 1.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) CHECK(std::abs(cov(i, j)) < 1e-8);
    }
    SUBCASE("dimension mismatches throw") {
        const auto model = features::fit_pca(data, 2);
        CHECK_THROWS_AS(features::project(Eigen::MatrixXd::Zero(3, 5), model), ShapeError);
        CHECK_THROWS_AS(features::reconstruct(Eigen::MatrixXd::Zero(3, 3), model), ShapeError);
    }
}

TEST_CASE("fit_pca rejects bad component counts") {
    const Eigen::MatrixXd data = random_matrix(10, 4, 2);
    CHECK_THROWS_AS(features::fit_pca(data, 5), ConfigError);
    CHECK_THROWS_AS(features::fit_pca(data, 0), ConfigError);
}

TEST_CASE("pca and normalizer files round-trip") {
    testutil::TempDir dir("features");
    const Eigen::MatrixXd data = spectrum_data(40, Eigen::Vector4d(2.0, 1.2, 0.6, 0.2), 19);

    const auto pca = features::fit_pca(data, 3);
    features::save_pca(dir.file("model.txt"), pca);
    const auto pca2 = features::load_pca(dir.file("model.txt"));
    CHECK((pca2.mean - pca.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((pca2.eigenvalues - pca.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
    CHECK((pca2.components - pca.components).cwiseAbs().maxCoeff() == 0.0);

    const auto norm = features::fit_normalizer(data);
    features::save_normalizer(dir.file("norm.txt"), norm);
    const auto norm2 = features::load_normalizer(dir.file("norm.txt"));
    CHECK((norm2.min - norm.min).cwiseAbs().maxCoeff() == 0.0);
    CHECK((norm2.max - norm.max).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(features::load_pca(dir.file("missing.txt")), InputError);
}
