#include <doctest.h>

#include <cmath>

#include "ashjb/errors.hpp"
#include "ashjb/principal.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ashjb;
using doctest::Approx;

TEST_CASE("value_sc examples") {
    const ValueField& f = fixture::dominated().sol.field;
    const double e = discount_factor(f.spec, 0.0);
    for (double p : {0.0, 0.3, 1.0}) {
        CHECK(value_sc(f, 2.0, 1.5, 0.7, 0.7, p) == Approx(1.5 - 0.7));
        CHECK(value_sc(f, 0.0, 0.25, 0.0, 0.0, p) == Approx(0.25));
    }
    const double v = value_sc(f, 0.0, 0.0, 0.9, 0.2, 0.4);
    CHECK(value_sc(f, 0.0, 0.0, 0.9 + 0.5, 0.2 + 0.5, 0.4) == Approx(v - e * 0.5).epsilon(1e-12));
    CHECK(value_sc(f, 0.0, 3.0, 0.9, 0.2, 0.4) == Approx(v + 3.0));
    CHECK_THROWS_AS(value_sc(f, 0.0, 0.0, 0.0, 0.5, 0.4), DomainError);
    CHECK_THROWS_AS(value_sc(f, 0.0, 0.0, 0.5, 0.0, 1.2), DomainError);
}

TEST_CASE("participation reductions agree with lattice brute force") {
    for (const fixture::Solved* s : {&fixture::dominated(), &fixture::nondominated()}) {
        const ValueField& f = s->sol.field;
        const double e = discount_factor(s->spec, 0.0);
        const double lip = e + oracle::gap_slope_bound(f);
        for (double p0 : {0.1, 0.5, 0.9}) {
            for (bool conditional : {true, false}) {
                const int n = 301;
                const oracle::LatticeMax lat = oracle::participation_lattice(s->spec, f, p0, conditional, n);
                const GapOptimum opt = conditional ? v_conditional(s->spec, f, p0) : v_unconditional(s->spec, f, p0);
                const double lo = f.band.lower(0.0), hi = f.band.upper(0.0);
                const double span = conditional ? (hi - lo) : 3.0 * (hi - lo);
                const double h = span / (n - 1);
                CHECK(lat.value <= opt.value + 1e-12);
                CHECK(lat.value >= opt.value - lip * h);
                // reported argmax is feasible and reproduces the value
                CHECK(contains(s->spec, 0.0, opt.y0, opt.y1));
                CHECK(value_sc(f, 0.0, 0.0, opt.y0, opt.y1, p0) == Approx(opt.value).epsilon(1e-12));
                if (conditional) {
                    CHECK(opt.y0 >= s->spec.r_type[0] - 1e-12);
                    CHECK(opt.y1 >= s->spec.r_type[1] - 1e-12);
                    CHECK(std::min(opt.y0 - s->spec.r_type[0], opt.y1 - s->spec.r_type[1]) == Approx(0.0));
                } else {
                    CHECK(p0 * opt.y0 + (1 - p0) * opt.y1 == Approx(s->spec.r_pooled));
                }
                CHECK(opt.plateau_width >= 0.0);
            }
        }
    }
}

TEST_CASE("prior sweep") {
    const fixture::Solved& s = fixture::nondominated();
    const auto sweep = default_prior_sweep();
    REQUIRE(sweep.size() == 19);
    CHECK(sweep.front() == Approx(0.05));
    CHECK(sweep.back() == Approx(0.95));
    const auto reports = sweep_prior(s.spec, s.sol.field, sweep);
    REQUIRE(reports.size() == 19);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        CHECK(reports[i].prior_p0 == sweep[i]);
        CHECK(std::isfinite(reports[i].v_conditional));
        CHECK(reports[i].v_unconditional >= reports[i].v_conditional - 1e-12);
        CHECK(reports[i].x0_offset == 0.0);
        const PrincipalReport single = principal_report(s.spec, s.sol.field, sweep[i]);
        CHECK(single.v_conditional == reports[i].v_conditional);
    }
    CHECK_THROWS_AS(v_conditional(s.spec, s.sol.field, 1.0), DomainError);
    CHECK_THROWS_AS(v_unconditional(s.spec, s.sol.field, 0.0), DomainError);
}

TEST_CASE("unconditional dominates conditional at matched reservations") {
    ModelSpec spec = ModelSpec::nondominated();
    spec.r_type = {0.2, -0.1};
    const GridSpec g = fixture::small_grid();
    const InteriorSolution sol = solve_interior(spec, g, make_boundary_values(spec, g));
    for (double p0 : {0.2, 0.5, 0.8}) {
        ModelSpec m = spec;
        m.r_pooled = p0 * spec.r_type[0] + (1 - p0) * spec.r_type[1];
        const GapOptimum c = v_conditional(m, sol.field, p0), u = v_unconditional(m, sol.field, p0);
        CHECK(u.value >= c.value - 1e-12);
        CHECK(c.y0 >= 0.2 - 1e-12);
        CHECK(c.y1 >= -0.1 - 1e-12);
    }
}
