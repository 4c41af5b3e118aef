#include <cmath>
#include <random>

#include "doctest.h"
#include "trm/schemes.hpp"

using namespace trm;

namespace {

// dense-sampling oracle for the Godunov flux: scan w(1-w) over the interval
double godunov_sampled(double u, double v, int samples = 10000) {
    const double a = std::min(u, v), b = std::max(u, v);
    double lo = 1e300, hi = -1e300;
    for (int s = 0; s <= samples; ++s) {
        const double w = a + (b - a) * s / samples;
        const double f = w * (1.0 - w);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    return u <= v ? lo : hi;
}

std::vector<double> trm_step(const std::vector<double>& state, double c) {
    std::vector<double> next = state;
    const std::vector<double> coeffs(state.size() + 1, c);
    step_interior(SchemeKind::Trm, state, coeffs, next);
    return next;
}

}  // namespace

TEST_CASE("quadratic flux") {
    CHECK(flux(0.0, 1.0) == 0.0);
    CHECK(flux(1.0, 7.0) == 0.0);
    CHECK(flux(0.5, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("numerical flux consistency F(u,u) = u(1-u) exactly") {
    for (SchemeKind kind : {SchemeKind::Trm, SchemeKind::Godunov, SchemeKind::LaxFriedrichs}) {
        for (int k = 0; k <= 10; ++k) {
            const double u = k / 10.0;
            CHECK(std::abs(numerical_flux(kind, u, u) - u * (1.0 - u)) <= 1e-15);
        }
    }
    for (SchemeKind kind : {SchemeKind::Trm, SchemeKind::Godunov, SchemeKind::LaxFriedrichs})
        CHECK(numerical_flux(kind, 0.3, 0.3) == doctest::Approx(0.21));
}

TEST_CASE("numerical flux closed forms") {
    CHECK(numerical_flux(SchemeKind::Godunov, 0.8, 0.2) == doctest::Approx(0.25));
    CHECK(numerical_flux(SchemeKind::Godunov, 0.2, 0.8) == doctest::Approx(0.16));
    CHECK(numerical_flux(SchemeKind::Trm, 0.2, 0.8) == doctest::Approx(0.04));
}

TEST_CASE("Godunov closed form equals the dense-sampling oracle") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int it = 0; it < 1000; ++it) {
        const double u = u01(rng), v = u01(rng);
        CHECK(std::abs(numerical_flux(SchemeKind::Godunov, u, v) - godunov_sampled(u, v)) <= 1e-8);
    }
}

TEST_CASE("domain drift tolerance") {
    CHECK(numerical_flux(SchemeKind::Trm, -1e-13, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(numerical_flux(SchemeKind::Trm, 1.0 + 1e-13, 0.5) == doctest::Approx(0.5));
    CHECK_THROWS_AS(numerical_flux(SchemeKind::Trm, -1e-6, 0.5), DomainError);
    CHECK_THROWS_AS(numerical_flux(SchemeKind::Godunov, 0.5, 1.1), DomainError);
}

TEST_CASE("step_interior hand-checked values") {
    // constant state is a fixed point of the interior update
    const auto constant = trm_step({0.3, 0.3, 0.3}, 0.25);
    CHECK(constant[1] == doctest::Approx(0.3));

    const auto riemann = trm_step({1.0, 0.0, 0.0}, 0.25);
    CHECK(riemann[1] == doctest::Approx(0.25));

    std::vector<double> state{0.2, 0.5, 0.8};
    std::vector<double> next = state;
    const std::vector<double> coeffs(4, 0.25);
    step_interior(SchemeKind::LaxFriedrichs, state, coeffs, next);
    // symmetric fluxes cancel: 0.5 + 0.25*((0.16+0.25)/2 - (0.25+0.16)/2)
    CHECK(next[1] == doctest::Approx(0.5));
}

TEST_CASE("step_interior leaves boundary cells untouched") {
    std::vector<double> state{0.9, 0.4, 0.1, 0.6};
    std::vector<double> next(4, -7.0);
    const std::vector<double> coeffs(5, 0.3);
    step_interior(SchemeKind::Trm, state, coeffs, next);
    CHECK(next[0] == -7.0);
    CHECK(next[3] == -7.0);
}

TEST_CASE("step_interior rejects CFL violations") {
    std::vector<double> state{0.1, 0.2, 0.3};
    std::vector<double> next(3);
    CHECK_THROWS_AS(step_interior(SchemeKind::Trm, state, std::vector<double>(4, 0.5), next),
                    CflViolation);
    CHECK_THROWS_AS(step_interior(SchemeKind::Trm, state, std::vector<double>(4, 0.0), next),
                    CflViolation);
    CHECK_THROWS_AS(step_interior(SchemeKind::Trm, state, std::vector<double>(4, -0.1), next),
                    CflViolation);
}

TEST_CASE("monotonicity of TRM and Godunov steps under CFL") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u01(0.0, 1.0), uc(0.01, 0.499);
    for (SchemeKind kind : {SchemeKind::Trm, SchemeKind::Godunov}) {
        for (int it = 0; it < 1000; ++it) {
            const int n = 5;
            std::vector<double> a(n), b(n);
            for (int j = 0; j < n; ++j) {
                a[j] = u01(rng);
                b[j] = a[j] + (1.0 - a[j]) * u01(rng);  // b >= a elementwise
            }
            const std::vector<double> coeffs(n + 1, uc(rng));
            std::vector<double> na = a, nb = b;
            step_interior(kind, a, coeffs, na);
            step_interior(kind, b, coeffs, nb);
            for (int j = 1; j < n - 1; ++j) CHECK(na[j] <= nb[j] + 1e-12);
        }
    }
}

TEST_CASE("TRM L-infinity stability under CFL") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u01(0.0, 1.0), uc(0.01, 0.499);
    for (int it = 0; it < 1000; ++it) {
        const double lo = u01(rng) * 0.5;
        const double hi = lo + (1.0 - lo) * u01(rng);
        const int n = 6;
        std::vector<double> state(n);
        for (double& s : state) s = lo + (hi - lo) * u01(rng);
        std::vector<double> next = state;
        step_interior(SchemeKind::Trm, state, std::vector<double>(n + 1, uc(rng)), next);
        for (int j = 1; j < n - 1; ++j) {
            CHECK(next[j] >= lo - 1e-12);
            CHECK(next[j] <= hi + 1e-12);
        }
    }
}

TEST_CASE("mass bookkeeping with copy-ghost boundaries") {
    // The interior fluxes telescope, so the mass change per step equals the
    // boundary flux imbalance exactly; with equal boundary values it is zero.
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u01(0.05, 0.95);
    for (SchemeKind kind : {SchemeKind::Trm, SchemeKind::Godunov, SchemeKind::LaxFriedrichs}) {
        const int n = 12;
        std::vector<double> cur(n);
        for (double& v : cur) v = u01(rng);
        const double c = 0.3;
        std::vector<double> nxt(n);
        for (int step = 0; step < 50; ++step) {
            double mass_before = 0.0, mass_after = 0.0;
            for (int j = 0; j < n; ++j) {
                const double ul = j == 0 ? cur[0] : cur[j - 1];
                const double ur = j == n - 1 ? cur[n - 1] : cur[j + 1];
                nxt[j] = (kind == SchemeKind::LaxFriedrichs ? (ul + ur) / 2.0 : cur[j]) +
                         c * (numerical_flux(kind, ul, cur[j]) - numerical_flux(kind, cur[j], ur));
            }
            for (int j = 0; j < n; ++j) {
                mass_before += cur[j];
                mass_after += nxt[j];
            }
            const double wall_in = c * numerical_flux(kind, cur[0], cur[0]);
            const double wall_out = c * numerical_flux(kind, cur[n - 1], cur[n - 1]);
            CHECK(std::abs(mass_after - mass_before - (wall_in - wall_out)) <= 1e-12);
            cur.swap(nxt);
        }
    }
}

TEST_CASE("reference_solve: constants are steady states") {
    const Grid g(20, 10, 0.01, 0.1);
    const auto sol = reference_solve(std::vector<double>(10, 0.4), 1.0, g);
    for (double v : sol.values.data()) CHECK(v == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("reference_solve conserves mass for a compactly supported bump") {
    // the bump never reaches the walls, so both wall fluxes stay zero and
    // sum(U) dx is constant to machine precision
    const int n = 200;
    const Grid g(150, n, 0.25 * 0.02, 0.02, 0.0, -1.99);
    std::vector<double> ic(n);
    for (int j = 0; j < n; ++j) {
        const double x = g.center(j);
        ic[j] = std::abs(x) < 0.5 ? 0.6 * std::exp(-x * x / (0.25 - x * x)) : 0.0;
    }
    const auto sol = reference_solve(ic, 1.0, g);
    double mass0 = 0.0;
    for (int j = 0; j < n; ++j) mass0 += ic[j] * g.dx;
    for (int i = 1; i < g.n_t; ++i) {
        double mass = 0.0;
        for (int j = 0; j < n; ++j) mass += sol.values(i, j) * g.dx;
        CHECK(std::abs(mass - mass0) <= 1e-12 * i);
    }
}

TEST_CASE("reference_solve mass balance matches the wall-flux ledger") {
    // the reference initial profile does not vanish at the walls: the exact
    // running sum of boundary fluxes accounts for every bit of mass drift
    const int n = 120;
    const Grid g(300, n, 0.25 * (3.0 / n), 3.0 / n, 0.0, -1.5 + 1.5 / n);
    std::vector<double> ic(n);
    for (int j = 0; j < n; ++j) {
        const double x = g.center(j);
        ic[j] = 0.5 * std::exp(-10.0 * x * x) +
                0.2 * (1.0 + std::cos(10.0 * M_PI * x) * std::exp(-(3.0 * x * x + x)));
    }
    const auto sol = reference_solve(ic, 1.0, g);
    const double c = g.dt / g.dx;
    double ledger = 0.0;
    for (int j = 0; j < n; ++j) ledger += sol.values(0, j);
    for (int i = 1; i < g.n_t; ++i) {
        const double u0 = sol.values(i - 1, 0);
        const double un = sol.values(i - 1, n - 1);
        ledger += c * (u0 * (1.0 - u0) - un * (1.0 - un));
        double mass = 0.0;
        for (int j = 0; j < n; ++j) mass += sol.values(i, j);
        CHECK(std::abs(mass - ledger) <= 1e-12 * i);
    }
}

TEST_CASE("reference_solve keeps a Riemann rarefaction monotone") {
    const int n = 50;
    const Grid g(60, n, 0.25 * 0.04, 0.04, 0.0, -1.0);
    std::vector<double> ic(n);
    for (int j = 0; j < n; ++j) ic[j] = g.center(j) < 0.0 ? 1.0 : 0.0;
    const auto sol = reference_solve(ic, 1.0, g);
    for (int i = 0; i < g.n_t; ++i)
        for (int j = 0; j + 1 < n; ++j) CHECK(sol.values(i, j) >= sol.values(i, j + 1) - 1e-12);
}

TEST_CASE("reference_solve rejects CFL-violating grids") {
    const Grid g(5, 10, 1.0, 1.0);
    CHECK_THROWS_AS(reference_solve(std::vector<double>(10, 0.1), 1.0, g), CflViolation);
}

TEST_CASE("first-order convergence of the reference solver") {
    // successive refinements against a 2x-finer reference: L1 error decreases
    auto solve_final = [](int n) {
        const double dx = 3.0 / n;
        const Grid g(static_cast<int>(std::lround(0.5 / (0.25 * dx))) + 1, n, 0.25 * dx, dx, 0.0,
                     -1.5 + dx / 2.0);
        std::vector<double> ic(n);
        for (int j = 0; j < n; ++j) {
            const double x = g.center(j);
            ic[j] = 0.5 * std::exp(-10.0 * x * x) +
                    0.2 * (1.0 + std::cos(10.0 * M_PI * x) * std::exp(-(3.0 * x * x + x)));
        }
        const auto sol = reference_solve(ic, 1.0, g);
        std::vector<double> final(sol.values.row(g.n_t - 1).begin(),
                                  sol.values.row(g.n_t - 1).end());
        return final;
    };
    auto l1_against_finer = [&](int n) {
        const auto coarse = solve_final(n);
        const auto finer = solve_final(2 * n);
        double err = 0.0;
        for (int j = 0; j < n; ++j)
            err += std::abs(coarse[j] - (finer[2 * j] + finer[2 * j + 1]) / 2.0) * (3.0 / n);
        return err;
    };
    const double e1 = l1_against_finer(150);
    const double e2 = l1_against_finer(300);
    const double e3 = l1_against_finer(600);
    CHECK(e2 / e1 < 1.0);
    CHECK(e3 / e2 < 1.0);
}

TEST_CASE("crop_space_cells extracts a centered window") {
    Mat values(2, 6, 0.0);
    for (int j = 0; j < 6; ++j) values(0, j) = values(1, j) = j * 0.1;
    const DensityMatrix m(Grid(2, 6, 1.0, 0.5, 0.0, 0.0), values);
    const auto cropped = crop_space_cells(m, 2, 3);
    CHECK(cropped.grid.n_x == 3);
    CHECK(cropped.grid.x0 == doctest::Approx(1.0));
    CHECK(cropped.values(0, 0) == doctest::Approx(0.2));
    CHECK_THROWS_AS(crop_space_cells(m, 4, 3), InvalidArgument);
}
