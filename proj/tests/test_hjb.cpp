#include <doctest.h>

#include <cmath>
#include <random>

#include "ashjb/errors.hpp"
#include "ashjb/hjb.hpp"
#include "detail/chain_step.hpp"
#include "fixtures.hpp"

using namespace ashjb;
using doctest::Approx;

TEST_CASE("generator examples") {
    const ModelSpec D = ModelSpec::dominated();
    for (double p : {0.0, 0.4, 1.0})
        CHECK(generator_eval(D, 0.3, 0.0, p, 1.7, {2.0, -1.0, 3.0}, 0.0, 0.0) == Approx(0.0));
    // matched controls with equal actions: no diffusion at all
    const ModelSpec ND = ModelSpec::nondominated();
    const double base = generator_eval(ND, 0.1, 0.2, 0.5, 0.0, {0.0, 0.0, 0.0}, 3.0, 3.0);
    CHECK(generator_eval(ND, 0.1, 0.2, 0.5, 0.0, {5.0, 2.0, 7.0}, 3.0, 3.0) == Approx(base));
    const double e = std::exp(0.2);
    CHECK(generator_eval(D, 0.0, 0.0, 1.0, 1.0, {0.0, 0.0, 0.0}, 1.0, 0.0) == Approx(0.5 + 1.0 - 0.25 * e));
    CHECK(generator_eval(D, 0.0, 0.0, 1.0, 1.0, {0.0, 0.0, 0.0}, 1.0, 0.0) == Approx(1.19465).epsilon(1e-5));
    // rank-one diffusion
    const ControlResponse c = control_response(ND, 0.4, -0.3);
    const double sy = 0.7, sp = 0.25 * (c.a0 - c.a1);
    const double g0 = generator_eval(ND, 0.5, 0.1, 0.5, 0.0, {0.0, 0.0, 0.0}, 0.4, -0.3);
    CHECK(generator_eval(ND, 0.5, 0.1, 0.5, 0.0, {1.0, 1.0, 1.0}, 0.4, -0.3) - g0 ==
          Approx(0.5 * (sy + sp) * (sy + sp)));
}

TEST_CASE("terminal layer, lateral slices and boundary policy") {
    for (const fixture::Solved* s : {&fixture::dominated(), &fixture::nondominated()}) {
        const ValueField& f = s->sol.field;
        const PolicyField& pol = s->sol.policy;
        const int last = f.n_time() - 1;
        CHECK(f.times[last] == Approx(s->spec.horizon_T - s->grid.terminal_layer_eps));
        for (int i = 1; i < f.n_gap() - 1; ++i)
            for (int j = 0; j < f.n_belief(); ++j)
                CHECK(f.at(last, i, j) == terminal_layer_value(s->spec, f.times[last], f.y(last, i), f.p(j)));
        for (int k = 0; k < f.n_time(); ++k)
            for (int j = 0; j < f.n_belief(); ++j) {
                CHECK(f.at(k, 0, j) == s->bvals.wunder(f.times[k], f.p(j)));
                CHECK(f.at(k, f.n_gap() - 1, j) == s->bvals.wbar(f.times[k], f.p(j)));
                for (int i : {0, f.n_gap() - 1}) {
                    const std::size_t o = pol.offset(k, i, j);
                    CHECK(pol.z0_star[o] == pol.z1_star[o]);
                    const auto [a_lo, a_hi] = extremal_gaps(s->spec);
                    CHECK(gap_function(s->spec, pol.z1_star[o]) == Approx(i == 0 ? a_lo : a_hi).epsilon(1e-8));
                }
            }
        CHECK(pol.boundary_flag.front() == NodeKind::lower);
        CHECK(pol.boundary_flag.back() == NodeKind::upper);
        CHECK(pol.extrapolated.back() == 1);
        for (double z : pol.z0_star) CHECK(std::abs(z) <= s->grid.control_trunc_K + 1e-12);
    }
}

TEST_CASE("terminal layer value is the expected promise payment") {
    const ModelSpec ND = ModelSpec::nondominated();
    const double e = discount_factor(ND, 1.99);
    // At p = 1 the principal pays y⁰: −(e/2)(y⁰+y¹) + w = −e·y⁰ with y = y⁰ − y¹.
    for (double y : {-0.01, 0.0, 0.004}) {
        CHECK(terminal_layer_value(ND, 1.99, y, 1.0) == Approx(-0.5 * e * y));
        CHECK(terminal_layer_value(ND, 1.99, y, 0.0) == Approx(0.5 * e * y));
        CHECK(terminal_layer_value(ND, 1.99, y, 0.5) == 0.0);
    }
}

TEST_CASE("a-priori sandwich and negative control") {
    for (const fixture::Solved* s : {&fixture::dominated(), &fixture::nondominated()}) {
        const AprioriReport r = check_apriori(s->spec, s->sol.field);
        CHECK(r.pass);
        CHECK(r.c_upper > 0.0);
        CHECK(r.c_lower < 0.0);
        ValueField bad = s->sol.field;
        bad.at(3, 5, 4) += 2.0 * r.tolerance + (r.c_upper - r.c_lower) * s->spec.horizon_T;
        CHECK_FALSE(check_apriori(s->spec, bad).pass);
    }
}

TEST_CASE("supersolution and subsolution probes") {
    for (const ModelSpec& spec : {ModelSpec::dominated(), ModelSpec::nondominated()}) {
        const ResidualReport phi = residual_probe(spec, fixture::small_grid(), TestFunction::phi, 100, 1);
        const ResidualReport psi = residual_probe(spec, fixture::small_grid(), TestFunction::psi, 100, 2);
        CHECK(phi.pass);
        CHECK(psi.pass);
        CHECK(psi.zero_control_max <= 0.0);
        CHECK(phi.n_nodes == 100);
    }
}

TEST_CASE("step-size errors") {
    const ModelSpec D = ModelSpec::dominated();
    GridSpec g = fixture::small_grid();
    g.n_time = 8;
    g.cfl_safety = 0.2;
    try {
        solve_interior(D, g, closed_form_boundary(D));
        FAIL("expected a CFL error");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("max admissible dt") != std::string::npos);
    }
    CHECK(max_admissible_dt(D, g) == Approx(0.02));
    g = fixture::small_grid();
    g.control_trunc_K = 1.0;
    CHECK_THROWS_AS(solve_interior(D, g, closed_form_boundary(D)), ConfigError);
}

TEST_CASE("chain step is monotone in the next slice") {
    const ModelSpec ND = ModelSpec::nondominated();
    const GridSpec g = fixture::small_grid();
    const CredibleBand band = make_band(ND, g.control_trunc_K);
    const BoundaryValues bv = closed_form_boundary(ND);
    const detail::ChainStep step(ND, band, 0.5, 0.58);
    auto edge = [&](Side side, double te, double pe) { return bv.value(side, te, pe); };
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1.0, 1.0), Z(-6.0, 6.0), S(0.05, 0.95), P(0.0, 1.0);
    std::vector<double> next(static_cast<std::size_t>(g.n_gap) * g.n_belief);
    for (int trial = 0; trial < 300; ++trial) {
        for (double& v : next) v = U(rng);
        const ControlResponse c = control_response(ND, Z(rng), Z(rng));
        const double y = band.gap_at(0.5, S(rng)), p = P(rng);
        const double v0 = step.evaluate(detail::Slice2D{next.data(), g.n_gap, g.n_belief}, edge, y, p, c);
        next[rng() % next.size()] += 0.3;
        const double v1 = step.evaluate(detail::Slice2D{next.data(), g.n_gap, g.n_belief}, edge, y, p, c);
        CHECK(v1 >= v0 - 1e-14);
    }
}

TEST_CASE("comparison: raising the Dirichlet data raises the field") {
    const ModelSpec ND = ModelSpec::nondominated();
    GridSpec g = fixture::small_grid();
    g.n_time = 16;
    g.n_gap = 11;
    g.n_belief = 8;
    GridSpec gb = g;
    gb.n_time = 200;
    gb.n_belief = 21;
    BoundaryValues lo = boundary_pde_solve(ND, gb);
    BoundaryValues hi = lo;
    for (double& v : hi.upper_table) v += 0.05;
    for (double& v : hi.lower_table) v += 0.05;
    const InteriorSolution a = solve_interior(ND, g, lo), b = solve_interior(ND, g, hi);
    double worst = 0.0;
    for (std::size_t n = 0; n < a.field.values.size(); ++n)
        worst = std::min(worst, b.field.values[n] - a.field.values[n]);
    CHECK(worst >= -1e-9);
}

TEST_CASE("convexity in the belief") {
    for (const fixture::Solved* s : {&fixture::dominated(), &fixture::nondominated()}) {
        const ValueField& f = s->sol.field;
        double worst = 0.0;
        for (int k = 0; k < f.n_time(); ++k)
            for (int i = 0; i < f.n_gap(); ++i)
                for (int j = 1; j + 1 < f.n_belief(); ++j)
                    worst = std::min(worst, f.at(k, i, j + 1) - 2.0 * f.at(k, i, j) + f.at(k, i, j - 1));
        CHECK(worst >= -1e-9);
    }
}

TEST_CASE("interpolation helpers") {
    const ValueField& f = fixture::nondominated().sol.field;
    CHECK(f.interpolate_slice(2, f.y(2, 3), f.p(4)) == Approx(f.at(2, 3, 4)));
    CHECK(f.interpolate(f.times[2], f.y(2, 3), f.p(4)) == Approx(f.at(2, 3, 4)));
    CHECK(f.interpolate(1.999, 0.0, 0.3) == terminal_layer_value(f.spec, 1.999, 0.0, 0.3));
    CHECK(f.resolution() == Approx(f.dt() + f.ds() * f.ds() + f.dp() * f.dp()));
}
