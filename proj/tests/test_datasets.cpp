#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "sdgen/datasets.hpp"
#include "sdgen/error.hpp"
#include "test_util.hpp"

using namespace sdgen;

TEST_CASE("base_line sampling") {
    std::mt19937_64 rng(8);
    SUBCASE("statistics of a large draw") {
        const Eigen::MatrixXd pts = datasets::base_line(10000, 0.03, rng);
        CHECK(std::abs(pts.col(0).mean()) < 0.02);
        const double y_std = std::sqrt(
            (pts.col(1).array() - pts.col(1).mean()).square().sum() / (pts.rows() - 1.0));
        CHECK(y_std == doctest::Approx(0.03).epsilon(0.05));
        CHECK(pts.col(0).minCoeff() >= -1.0);
        CHECK(pts.col(0).maxCoeff() <= 1.0);
    }
    SUBCASE("zero y_std collapses onto the x axis") {
        const Eigen::MatrixXd pts = datasets::base_line(100, 0.0, rng);
        CHECK(pts.col(1).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("same seed gives the identical cloud") {
        std::mt19937_64 a(3), b(3);
        const Eigen::MatrixXd pa = datasets::base_line(50, 0.03, a);
        const Eigen::MatrixXd pb = datasets::base_line(50, 0.03, b);
        CHECK((pa - pb).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("bad count throws") {
        CHECK_THROWS_AS(datasets::base_line(0, 0.03, rng), InputError);
    }
}

TEST_CASE("rotate") {
    SUBCASE("zero angle is the identity") {
        const Eigen::MatrixXd pts = Eigen::MatrixXd::Random(20, 2);
        CHECK((datasets::rotate(pts, 0.0) - pts).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("quarter turn maps (1,0) to (0,1)") {
        Eigen::MatrixXd p(1, 2);
        p << 1.0, 0.0;
        const Eigen::MatrixXd q = datasets::rotate(p, std::numbers::pi / 2.0);
        CHECK(std::abs(q(0, 0)) < 1e-15);
        CHECK(std::abs(q(0, 1) - 1.0) < 1e-15);
    }
    SUBCASE("rotation is an isometry") {
        std::mt19937_64 rng(9);
        const Eigen::MatrixXd pts = datasets::base_line(40, 0.03, rng);
        const Eigen::MatrixXd rot = datasets::rotate(pts, 0.83);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            CHECK(std::abs(pts.row(i).norm() - rot.row(i).norm()) < 1e-12);
            for (Eigen::Index j = i + 1; j < pts.rows(); j += 7) {
                const double before = (pts.row(i) - pts.row(j)).norm();
                const double after = (rot.row(i) - rot.row(j)).norm();
                CHECK(std::abs(before - after) < 1e-12);
            }
        }
    }
}

TEST_CASE("toy training angles span the full code interval") {
    const auto angles = datasets::toy_train_angles();
    REQUIRE(angles.size() == 11);
    CHECK(angles.front() == doctest::Approx(-std::numbers::pi / 2.0).epsilon(1e-15));
    CHECK(angles.back() == doctest::Approx(2.0 * std::numbers::pi / 5.0).epsilon(1e-15));
    const double spacing = (2.0 * std::numbers::pi / 5.0 + std::numbers::pi / 2.0) / 10.0;
    for (std::size_t i = 1; i < angles.size(); ++i)
        CHECK(angles[i] - angles[i - 1] == doctest::Approx(spacing).epsilon(1e-12));
}

TEST_CASE("make_toy_splits") {
    datasets::ToyConfig cfg;
    cfg.n_per_angle = 60;
    cfg.seed = 5;
    const auto splits = datasets::make_toy_splits(cfg, 5, 5);

    SUBCASE("group counts and sizes") {
        CHECK(splits.train.size() == 11);
        CHECK(splits.validation.size() == 5);
        CHECK(splits.test.size() == 5);
        for (const auto& g : splits.train) CHECK(g.features.rows() == 60);
    }
    SUBCASE("validation and test angles are interior and disjoint") {
        for (const auto& g : splits.validation) {
            CHECK(g.physical_code > splits.angle_lo);
            CHECK(g.physical_code < splits.angle_hi);
            for (const auto& t : splits.test)
                CHECK(g.physical_code != t.physical_code);
            for (const auto& t : splits.train)
                CHECK(g.physical_code != t.physical_code);
        }
    }
    SUBCASE("codes map the training range onto [-1, 1]") {
        CHECK(splits.train.front().code[0] == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(splits.train.back().code[0] == doctest::Approx(1.0).epsilon(1e-12));
        for (const auto& g : splits.validation) {
            CHECK(g.code[0] > -1.0);
            CHECK(g.code[0] < 1.0);
        }
    }
    SUBCASE("determinism") {
        const auto again = datasets::make_toy_splits(cfg, 5, 5);
        CHECK((again.train[4].features - splits.train[4].features).cwiseAbs().maxCoeff() == 0.0);
        CHECK((again.test[2].features - splits.test[2].features).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("adjacent manifolds share the region near the origin") {
        // mirrors the observation that all manifolds overlap near (0, 0)
        const auto& a = splits.train[0].features;
        const auto& b = splits.train[1].features;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (a.row(i).norm() > 0.2) continue;
            for (Eigen::Index j = 0; j < b.rows(); ++j) {
                if (b.row(j).norm() > 0.2) continue;
                best = std::min(best, (a.row(i) - b.row(j)).norm());
            }
        }
        CHECK(best < 0.2);  // closer than the KDE bandwidth
    }
    SUBCASE("too many requested angles throws") {
        CHECK_THROWS_AS(datasets::make_toy_splits(cfg, 6, 5), ConfigError);
    }
}

TEST_CASE("make_sim_splits") {
    const auto temps = datasets::sim_temperatures();
    GroupedDataset groups;
    for (double t : temps) {
        CodeGroup g;
        g.physical_code = t;
        g.features = Eigen::MatrixXd::Constant(10, 3, t);
        groups.push_back(std::move(g));
    }

    SUBCASE("split membership follows the protocol") {
        const auto splits = datasets::make_sim_splits(groups);
        REQUIRE(splits.train.size() == 9);
        REQUIRE(splits.validation.size() == 1);
        REQUIRE(splits.test.size() == 1);
        CHECK(splits.validation[0].physical_code == 24.0);
        CHECK(splits.test[0].physical_code == 34.0);
        const std::vector<double> expected_train = {20, 22, 26, 28, 30, 32, 36, 38, 40};
        for (std::size_t i = 0; i < expected_train.size(); ++i)
            CHECK(splits.train[i].physical_code == expected_train[i]);
        // record counts preserved
        for (const auto& g : splits.train) CHECK(g.features.rows() == 10);
    }
    SUBCASE("missing temperature group throws") {
        GroupedDataset missing(groups.begin(), groups.end() - 1);
        CHECK_THROWS_AS(datasets::make_sim_splits(missing), InputError);
        GroupedDataset wrong = groups;
        wrong[2].physical_code = 25.0;  // displaces the 24 degC group
        CHECK_THROWS_AS(datasets::make_sim_splits(wrong), InputError);
    }
}

TEST_CASE("check_split_codes rejects bad splits") {
    CHECK_THROWS_AS(datasets::check_split_codes({0.0, 1.0}, {0.0}, {}), ConfigError);
    CHECK_THROWS_AS(datasets::check_split_codes({0.0, 1.0}, {1.5}, {}), ConfigError);
    CHECK_THROWS_AS(datasets::check_split_codes({0.0, 1.0}, {0.5}, {0.5}), ConfigError);
    CHECK_NOTHROW(datasets::check_split_codes({0.0, 1.0}, {0.25}, {0.75}));
}

TEST_CASE("toy csv round trip") {
    testutil::TempDir dir("toycsv");
    datasets::ToyConfig cfg;
    cfg.n_per_angle = 12;
    cfg.seed = 2;
    const auto splits = datasets::make_toy_splits(cfg, 2, 2);

    datasets::write_toy_csv(dir.file("toy.csv"), splits.train, "meta line");
    const auto loaded = datasets::read_toy_csv(dir.file("toy.csv"));
    REQUIRE(loaded.size() == splits.train.size());
    for (std::size_t g = 0; g < loaded.size(); ++g) {
        CHECK(loaded[g].physical_code == splits.train[g].physical_code);
        CHECK((loaded[g].features - splits.train[g].features).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("malformed dataset files raise parse errors with line numbers") {
    testutil::TempDir dir("badcsv");
    SUBCASE("truncated row") {
        std::ofstream os(dir.file("bad.csv"));
        os << "angle,x,y\n0.5,0.1,0.2\n0.5,0.3\n";
        os.close();
        try {
            datasets::read_toy_csv(dir.file("bad.csv"));
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(":3") != std::string::npos);
        }
    }
    SUBCASE("non-numeric field") {
        std::ofstream os(dir.file("bad2.csv"));
        os << "angle,x,y\n0.5,oops,0.2\n";
        os.close();
        CHECK_THROWS_AS(datasets::read_toy_csv(dir.file("bad2.csv")), ParseError);
    }
    SUBCASE("empty file") {
        std::ofstream os(dir.file("empty.csv"));
        os.close();
        CHECK_THROWS_AS(datasets::read_toy_csv(dir.file("empty.csv")), InputError);
    }
    SUBCASE("header but no rows") {
        std::ofstream os(dir.file("headeronly.csv"));
        os << "angle,x,y\n";
        os.close();
        CHECK_THROWS_AS(datasets::read_toy_csv(dir.file("headeronly.csv")), InputError);
    }
    SUBCASE("wrong header") {
        std::ofstream os(dir.file("wrong.csv"));
        os << "a,b\n1,2\n";
        os.close();
        CHECK_THROWS_AS(datasets::read_toy_csv(dir.file("wrong.csv")), ParseError);
    }
}

TEST_CASE("simulation csv round trip keeps humidity as metadata") {
    testutil::TempDir dir("simcsv");
    std::vector<dynsim::TransmissibilityFeature> records(4);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.1, 10.0);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].temperature = 20.0 + 2.0 * static_cast<double>(i);
        records[i].humidity = 85.0 + static_cast<double>(i);
        records[i].values.resize(6);
        for (Eigen::Index j = 0; j < 6; ++j) records[i].values[j] = unif(rng);
    }
    datasets::write_sim_csv(dir.file("sim.csv"), records, "meta");
    const auto loaded = datasets::read_sim_csv(dir.file("sim.csv"));
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].temperature == records[i].temperature);
        CHECK(loaded[i].humidity == records[i].humidity);
        CHECK((loaded[i].values - records[i].values).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("projected csv round trip") {
    testutil::TempDir dir("projcsv");
    Eigen::VectorXd temps(5);
    temps << 20, 20, 24, 34, 34;
    const Eigen::MatrixXd scores = Eigen::MatrixXd::Random(5, 3);
    datasets::write_projected_csv(dir.file("proj.csv"), temps, scores, "meta");
    const auto groups = datasets::read_projected_csv(dir.file("proj.csv"));
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].physical_code == 20.0);
    CHECK(groups[0].features.rows() == 2);
    CHECK(groups[2].features.rows() == 2);
    CHECK((groups[1].features.row(0).transpose() -
           scores.row(2).transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("split manifest round trip") {
    testutil::TempDir dir("manifest");
    datasets::SplitManifest manifest;
    manifest.experiment = "toy";
    manifest.code_lo = -1.5707963267948966;
    manifest.code_hi = 1.2566370614359172;
    manifest.train = {-1.5, 0.0, 1.25};
    manifest.validation = {-0.7};
    manifest.test = {0.6};
    datasets::write_split_manifest(dir.file("splits.txt"), manifest, "meta");
    const auto loaded = datasets::read_split_manifest(dir.file("splits.txt"));
    CHECK(loaded.experiment == "toy");
    CHECK(loaded.code_lo == manifest.code_lo);
    CHECK(loaded.code_hi == manifest.code_hi);
    CHECK(loaded.train == manifest.train);
    CHECK(loaded.validation == manifest.validation);
    CHECK(loaded.test == manifest.test);
}
