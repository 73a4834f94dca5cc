#include <doctest.h>

#include <cmath>

#include "ashjb/errors.hpp"
#include "ashjb/principal.hpp"
#include "ashjb/screening.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ashjb;
using doctest::Approx;

TEST_CASE("per-type fields: lateral slices and terminal layer") {
    for (const fixture::Solved* s : {&fixture::dominated(), &fixture::nondominated()}) {
        for (TypeId th : {TypeId::zero, TypeId::one}) {
            const TypeField& f = s->screening.field(th);
            CHECK(f.theta == th);
            const int nt = s->grid.n_time, ng = s->grid.n_gap;
            for (int k = 0; k < nt; ++k) {
                CHECK(f.at(k, 0) == s->bvals.screening_lower(th, f.times[k]));
                CHECK(f.at(k, ng - 1) == s->bvals.screening_upper(th, f.times[k]));
            }
            for (int i = 1; i < ng - 1; ++i) CHECK(f.at(nt - 1, i) == Approx(0.0).scale(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("screening program agrees with the 4-D lattice") {
    for (const fixture::Solved* s : {&fixture::dominated(), &fixture::nondominated()}) {
        const double e = discount_factor(s->spec, 0.0);
        double slope = 0.0;
        for (TypeId th : {TypeId::zero, TypeId::one}) {
            const TypeField& f = s->screening.field(th);
            for (int i = 0; i + 1 < s->grid.n_gap; ++i)
                slope = std::max(slope, std::abs(f.at(0, i + 1) - f.at(0, i)) / (f.y(0, i + 1) - f.y(0, i)));
        }
        for (double p0 : {0.2, 0.5, 0.8}) {
            const int n = 41;
            const oracle::QuadMax lat = oracle::screening_lattice(s->spec, s->screening, p0, n);
            const ScreeningReport r = v_screening(s->spec, s->screening, p0);
            const double lo = s->screening.v0_field.band.lower(0.0), hi = s->screening.v0_field.band.upper(0.0);
            const double h = 2.0 * (hi - lo) / (n - 1);
            CHECK(lat.value <= r.value + 1e-12);
            CHECK(lat.value >= r.value - 2.0 * (e + slope) * h);
            // feasibility of the reported quadruple
            const auto [y0, y1c, y0c, y1] = r.argmax_quad;
            CHECK(y0 >= y0c - 1e-12);
            CHECK(y1 >= y1c - 1e-12);
            CHECK(y0 >= s->spec.r_type[0] - 1e-12);
            CHECK(y1 >= s->spec.r_type[1] - 1e-12);
            CHECK(y0 - y1c >= lo - 1e-12);
            CHECK(y0 - y1c <= hi + 1e-12);
            CHECK(y0c - y1 >= lo - 1e-12);
            CHECK(y0c - y1 <= hi + 1e-12);
            CHECK(r.gap0 == Approx(y0 - y1c));
            CHECK(r.gap1 == Approx(y0c - y1));
            const double v = p0 * screening_contract_value(s->screening, TypeId::zero, y0, y1c) +
                             (1 - p0) * screening_contract_value(s->screening, TypeId::one, y0c, y1);
            CHECK(v == Approx(r.value).epsilon(1e-12));
        }
    }
}

TEST_CASE("screening dominates the single conditional contract") {
    for (const fixture::Solved* s : {&fixture::dominated(), &fixture::nondominated()}) {
        for (double p0 : default_prior_sweep()) {
            const double vs = v_screening(s->spec, s->screening, p0).value;
            const double vc = v_conditional(s->spec, s->sol.field, p0).value;
            CHECK(vs >= vc - 1e-4);
        }
    }
}

TEST_CASE("extraction linearity") {
    const fixture::Solved& s = fixture::nondominated();
    const double e = discount_factor(s.spec, 0.0);
    const double v = screening_contract_value(s.screening, TypeId::zero, 0.6, 0.1);
    CHECK(screening_contract_value(s.screening, TypeId::zero, 0.6 + 0.25, 0.1 + 0.25) ==
          Approx(v - e * 0.25).epsilon(1e-12));
    const double w = screening_contract_value(s.screening, TypeId::one, 0.6, 0.1);
    CHECK(screening_contract_value(s.screening, TypeId::one, 0.6 + 0.25, 0.1 + 0.25) ==
          Approx(w - e * 0.25).epsilon(1e-12));
    CHECK_THROWS_AS(screening_contract_value(s.screening, TypeId::zero, 5.0, 0.0), DomainError);
    CHECK_THROWS_AS(v_screening(s.spec, s.screening, 1.0), DomainError);
}

TEST_CASE("per-type field against a frozen-control rollout") {
    const ModelSpec ND = ModelSpec::nondominated();
    GridSpec g = fixture::small_grid();
    g.n_time = 60;
    g.n_gap = 41;
    const BoundaryValues bv = closed_form_boundary(ND);
    for (TypeId th : {TypeId::zero, TypeId::one}) {
        const TypeField f = solve_v_theta(ND, g, bv, th);
        for (double s : {0.3, 0.5, 0.7}) {
            const double g0 = f.band.gap_at(0.0, s);
            const auto mc = oracle::v_theta_rollout(ND, f, bv, g0, 4000, 1e-3, 42);
            const double scale = 1.0;
            const double tol = 3.0 * mc.se + 5.0 * (f.times[1] + 1.0 / ((g.n_gap - 1.0) * (g.n_gap - 1.0))) * scale;
            CHECK(std::abs(mc.mean - f.interpolate_slice(0, g0)) <= tol);
        }
    }
}
