#include <random>

#include "doctest.h"
#include "trm/rollout.hpp"

using namespace trm;

namespace {

DensityMatrix constant_matrix(int n_t, int n_x, double value) {
    return DensityMatrix(Grid(n_t, n_x, 1.0, 1.0), Mat(n_t, n_x, value));
}

}  // namespace

TEST_CASE("constant data is a fixed point for every scheme and subdivision") {
    for (SchemeKind kind : {SchemeKind::Trm, SchemeKind::Godunov, SchemeKind::LaxFriedrichs}) {
        for (SubdivisionSpec spec : {SubdivisionSpec(1, 1), SubdivisionSpec(3, 2)}) {
            RolloutPlan plan{constant_matrix(4, 5, 0.3), spec, kind};
            const Mat fine = run(plan, ControlField::constant(0.25, 4, 5));
            for (double v : fine.data()) CHECK(v == doctest::Approx(0.3).epsilon(1e-15));
        }
    }
}

TEST_CASE("two hand-iterated TRM steps") {
    // row0 = [1,0,0], boundary columns pinned to 1 and 0, C = 0.25
    Mat data(3, 3, 0.0);
    data(0, 0) = 1.0;
    data(1, 0) = 1.0;
    data(2, 0) = 1.0;
    RolloutPlan plan{DensityMatrix(Grid(3, 3, 1.0, 1.0), data), SubdivisionSpec(1, 1),
                     SchemeKind::Trm};
    const Mat fine = run(plan, ControlField::constant(0.25, 3, 3));
    CHECK(fine(1, 1) == doctest::Approx(0.25));
    // 0.25 + 0.25*1*(1-0.25) - 0.25*0.25*(1-0) = 0.375
    const double expected = 0.25 + 0.25 * 1.0 * (1.0 - 0.25) - 0.25 * 0.25 * (1.0 - 0.0);
    CHECK(fine(2, 1) == doctest::Approx(expected));
}

TEST_CASE("bilinear control interpolation hits the corner mean at the midpoint") {
    // n_x = 3 cells -> 4 interfaces; n_t = 2
    Mat field(4, 2);
    field(1, 0) = 0.1;
    field(2, 0) = 0.2;
    field(1, 1) = 0.3;
    field(2, 1) = 0.4;
    const ControlField coarse = ControlField::space_time(field, 2, 3);
    const FineControl fine(coarse, SubdivisionSpec(2, 2));
    // fine interface 3 blends interfaces 1,2 at wx = 1/2; fine time 1 has wt = 1/2
    CHECK(fine.at(1, 3) == doctest::Approx(0.25));
    // knots reproduce the coarse coefficients exactly
    CHECK(fine.at(0, 2) == doctest::Approx(0.1));
    CHECK(fine.at(2, 4) == doctest::Approx(0.4));
}

TEST_CASE("fine boundary columns interpolate the data boundaries linearly") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    Mat data(4, 4);
    for (double& v : data.data()) v = u(rng);
    RolloutPlan plan{DensityMatrix(Grid(4, 4, 1.0, 1.0), data), SubdivisionSpec(3, 2),
                     SchemeKind::Trm};
    const Mat fine = run(plan, ControlField::constant(0.2, 4, 4));
    for (int m = 0; m < fine.rows(); ++m) {
        const int n = std::min(m / 3, 2);
        const double w = (m - n * 3) / 3.0;
        const double left = (1.0 - w) * data(n, 0) + w * data(n + 1, 0);
        const double right = (1.0 - w) * data(n, 3) + w * data(n + 1, 3);
        for (int k = 0; k < 2; ++k) {
            CHECK(fine(m, k) == doctest::Approx(left).epsilon(1e-15));
            CHECK(fine(m, 6 + k) == doctest::Approx(right).epsilon(1e-15));
        }
    }
}

TEST_CASE("restriction reproduces the data boundary columns at coarse knots") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    Mat data(5, 5);
    for (double& v : data.data()) v = u(rng);
    RolloutPlan plan{DensityMatrix(Grid(5, 5, 1.0, 1.0), data), SubdivisionSpec(2, 3),
                     SchemeKind::Trm};
    const Mat coarse = restrict_mean(run(plan, ControlField::constant(0.3, 5, 5)), plan.spec);
    for (int i = 0; i < 5; ++i) {
        CHECK(coarse(i, 0) == doctest::Approx(data(i, 0)).epsilon(1e-15));
        CHECK(coarse(i, 4) == doctest::Approx(data(i, 4)).epsilon(1e-15));
    }
}

TEST_CASE("run matches run_restricted and is deterministic") {
    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    Mat data(4, 6);
    for (double& v : data.data()) v = u(rng);
    RolloutPlan plan{DensityMatrix(Grid(4, 6, 0.5, 1.0), data), SubdivisionSpec(2, 2),
                     SchemeKind::LaxFriedrichs};
    std::vector<double> c(ControlField::expected_size(ControlMode::TimeVarying, 4, 6), 0.0);
    for (double& v : c) v = 0.1 + 0.3 * u(rng);
    const ControlField ctrl = ControlField::time_varying(c, 4, 6);

    const Mat fine1 = run(plan, ctrl);
    const Mat fine2 = run(plan, ctrl);
    for (size_t i = 0; i < fine1.data().size(); ++i) CHECK(fine1.data()[i] == fine2.data()[i]);

    const Mat direct = run_restricted(plan, ctrl);
    const Mat via_full = restrict_mean(fine1, plan.spec);
    for (size_t i = 0; i < direct.data().size(); ++i) CHECK(direct.data()[i] == via_full.data()[i]);
}

TEST_CASE("subdivided and plain rollouts agree on constant data") {
    const auto data = constant_matrix(3, 5, 0.42);
    const ControlField ctrl = ControlField::constant(0.2, 3, 5);
    const Mat plain = run({data, SubdivisionSpec(1, 1), SchemeKind::Trm}, ctrl);
    const Mat fine = run({data, SubdivisionSpec(1, 4), SchemeKind::Trm}, ctrl);
    const Mat back = restrict_mean(fine, SubdivisionSpec(1, 4));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) CHECK(back(i, j) == doctest::Approx(plain(i, j)).epsilon(1e-15));
}

TEST_CASE("rmse examples") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.1, 0.8);
    Mat data(5, 5);
    for (double& v : data.data()) v = u(rng);
    const DensityMatrix dm(Grid(5, 5, 1.0, 1.0), data);
    const SubdivisionSpec spec(2, 3);

    SUBCASE("prolonged data gives zero") {
        const Mat fine = prolong_linear(data, spec);
        CHECK(rmse(fine, dm, spec, all_interior_cols(5)) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("constant offset shows up directly") {
        Mat shifted = data;
        for (double& v : shifted.data()) v += 0.1;
        const Mat fine = prolong_linear(shifted, spec);
        CHECK(rmse(fine, dm, spec, all_interior_cols(5)) == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("random instance equals the nested-loop oracle") {
        Mat fine(spec.fine_rows(5), spec.fine_cols(5));
        for (double& v : fine.data()) v = u(rng);
        const std::vector<int> cols{1, 3};
        double sum = 0.0;
        int count = 0;
        for (int i = 1; i < 5; ++i) {
            for (int j : cols) {
                double mean = 0.0;
                for (int k = 0; k < 3; ++k) mean += fine(i * 2, j * 3 + k);
                mean /= 3.0;
                sum += (mean - data(i, j)) * (mean - data(i, j));
                ++count;
            }
        }
        CHECK(rmse(fine, dm, spec, cols) == doctest::Approx(std::sqrt(sum / count)).epsilon(1e-14));
    }
    SUBCASE("empty observation set is rejected") {
        CHECK_THROWS_AS(rmse(prolong_linear(data, spec), dm, spec, {}), EmptyObservationSet);
        CHECK_THROWS_AS(rmse(prolong_linear(data, spec), dm, spec, {0}), InvalidArgument);
    }
}

TEST_CASE("rollout validates control grid and CFL") {
    const auto data = constant_matrix(3, 4, 0.2);
    RolloutPlan plan{data, SubdivisionSpec(1, 1), SchemeKind::Trm};
    CHECK_THROWS_AS(run(plan, ControlField::constant(0.25, 4, 4)), ShapeMismatch);
    CHECK_THROWS_AS(run(plan, ControlField::constant(0.5, 3, 4)), CflViolation);
}
