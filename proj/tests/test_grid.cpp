#include <random>

#include "doctest.h"
#include "trm/grid.hpp"

using namespace trm;

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid(1, 3, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Grid(2, 2, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Grid(2, 3, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Grid(2, 3, 1.0, -1.0), InvalidArgument);
    const Grid g(4, 5, 0.5, 2.0, 1.0, -3.0);
    CHECK(g.time(2) == doctest::Approx(2.0));
    CHECK(g.center(3) == doctest::Approx(3.0));
}

TEST_CASE("normalize divides by rho_max") {
    CHECK(normalize(Mat{{0.49}}, 0.49).values(0, 0) == doctest::Approx(1.0));
    CHECK(normalize(Mat{{0.0}}, 0.49).values(0, 0) == doctest::Approx(0.0));
    // rho_max ~ 0.49 /m, mean-vehicle-length estimate for a 2-lane road
    CHECK(normalize(Mat{{0.245}}, 0.49).values(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("normalize clamps above rho_max with a warning tally") {
    const auto res = normalize(Mat{{0.6, 0.2}, {0.7, 0.1}}, 0.5);
    CHECK(res.clamped == 2);
    CHECK(res.values(0, 0) == 1.0);
    CHECK(res.values(1, 1) == doctest::Approx(0.2));
    CHECK_FALSE(res.all_zero);
}

TEST_CASE("normalize flags the all-zero matrix") {
    const auto res = normalize(Mat(3, 4, 0.0), 1.0);
    CHECK(res.all_zero);
    CHECK(res.clamped == 0);
    CHECK_THROWS_AS(normalize(Mat{{-0.1}}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(normalize(Mat{{0.1}}, 0.0), InvalidArgument);
}

TEST_CASE("restrict_mean identity at (1,1)") {
    Mat fine{{0.1, 0.2}, {0.3, 0.4}};
    const Mat coarse = restrict_mean(fine, SubdivisionSpec(1, 1));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(coarse(i, j) == fine(i, j));
}

TEST_CASE("restrict_mean averages subcells") {
    Mat fine{{0.2, 0.4, 0.6, 0.8}};
    // single row needs p_t = 1
    const Mat coarse = restrict_mean(fine, SubdivisionSpec(1, 2));
    CHECK(coarse(0, 0) == doctest::Approx(0.3));
    CHECK(coarse(0, 1) == doctest::Approx(0.7));
}

TEST_CASE("restrict_mean matches a brute-force loop on a random 7x12 matrix") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mat fine(7, 12);
    for (double& v : fine.data()) v = u(rng);
    const SubdivisionSpec spec(3, 4);  // coarse 3 x 3
    const Mat coarse = restrict_mean(fine, spec);
    REQUIRE(coarse.rows() == 3);
    REQUIRE(coarse.cols() == 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double sum = 0.0;
            for (int k = 0; k < 4; ++k) sum += fine(i * 3, j * 4 + k);
            CHECK(coarse(i, j) == doctest::Approx(sum / 4.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("restrict_mean rejects mismatched shapes") {
    CHECK_THROWS_AS(restrict_mean(Mat(3, 5, 0.0), SubdivisionSpec(1, 2)), ShapeMismatch);
    CHECK_THROWS_AS(restrict_mean(Mat(4, 4, 0.0), SubdivisionSpec(2, 2)), ShapeMismatch);
}

TEST_CASE("restrict of prolong is the identity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const SubdivisionSpec spec : {SubdivisionSpec(1, 1), SubdivisionSpec(2, 3),
                                       SubdivisionSpec(4, 1), SubdivisionSpec(3, 5)}) {
        Mat coarse(4, 6);
        for (double& v : coarse.data()) v = u(rng);
        const Mat fine = prolong_linear(coarse, spec);
        CHECK(fine.rows() == spec.fine_rows(4));
        CHECK(fine.cols() == spec.fine_cols(6));
        const Mat back = restrict_mean(fine, spec);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 6; ++j) CHECK(back(i, j) == doctest::Approx(coarse(i, j)).epsilon(1e-15));
    }
    // constants stay constant
    const Mat fine = prolong_linear(Mat(3, 4, 0.37), SubdivisionSpec(5, 2));
    for (double v : fine.data()) CHECK(v == doctest::Approx(0.37));
}

TEST_CASE("restrict_mean preserves the input range") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.2, 0.8);
    Mat fine(5, 8);
    for (double& v : fine.data()) v = u(rng);
    const Mat coarse = restrict_mean(fine, SubdivisionSpec(2, 4));
    for (double v : coarse.data()) {
        CHECK(v >= 0.2);
        CHECK(v <= 0.8);
    }
}

TEST_CASE("cfl_max_ratio") {
    CHECK(cfl_max_ratio(50.0) == doctest::Approx(0.01));  // 180 km/h cap
    CHECK(cfl_max_ratio(1.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(cfl_max_ratio(0.0), InvalidArgument);
}

TEST_CASE("minimal_p_t satisfies the CFL bound tightly") {
    const Grid g(5, 3, 1.0, 1.0);
    CHECK(minimal_p_t(g, 1, 1.0) == 2);  // dt/dx = 1, bound 0.5

    // highD-style grid: dt = 2 s, dx = 400/11 m, p_x = 3, v = 130 km/h.
    // The smallest P_t satisfying (dt/dx)(p_x/P_t) <= 1/(2v) is 12; 15 also
    // satisfies the inequality but is not minimal.
    const Grid highd(60, 11, 2.0, 400.0 / 11.0);
    const double v = 130.0 / 3.6;
    const int p_t = minimal_p_t(highd, 3, v);
    CHECK(p_t == 12);
    CHECK((highd.dt / highd.dx) * 3.0 / p_t <= cfl_max_ratio(v));
    CHECK((highd.dt / highd.dx) * 3.0 / 15.0 <= cfl_max_ratio(v));
}

TEST_CASE("minimal_p_t minimality property") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> step(0.05, 5.0), speed(0.2, 60.0);
    std::uniform_int_distribution<int> px(1, 6);
    for (int it = 0; it < 200; ++it) {
        const Grid g(4, 5, step(rng), step(rng));
        const int p_x = px(rng);
        const double v = speed(rng);
        const int p_t = minimal_p_t(g, p_x, v);
        const double bound = cfl_max_ratio(v);
        CHECK((g.dt / g.dx) * p_x / p_t <= bound);
        if (p_t > 1) CHECK((g.dt / g.dx) * p_x / (p_t - 1) > bound);
    }
}

TEST_CASE("density matrix validates shape and range") {
    const Grid g(2, 3, 1.0, 1.0);
    CHECK_THROWS_AS(DensityMatrix(g, Mat(2, 4, 0.0)), ShapeMismatch);
    CHECK_THROWS_AS(DensityMatrix(g, Mat(2, 3, 1.5)), DomainError);
    const DensityMatrix ok(g, Mat(2, 3, 1.0 + 1e-13));  // drift is clamped
    CHECK(ok.values(0, 0) == 1.0);
}
