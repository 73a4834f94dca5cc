#pragma once

/*
 * One backward step of the monotone Markov-chain approximation on the
 * rescaled band. Over a step of length τ the observation increment is
 * ±√τ, with probabilities ½(1 ± α√τ) under a type playing α. The gap moves
 * to y + (κy − H⁰ + H¹)τ ± (z⁰ − z¹)√τ and the belief to its Bayes update.
 * τ ≤ Δt is the largest step keeping both gap feet inside the band; reward
 * accrues over τ only.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ashjb/boundary_values.hpp"
#include "ashjb/credible_band.hpp"
#include "ashjb/generator.hpp"
#include "ashjb/model.hpp"

namespace ashjb::detail {

/// Values on the (s, p) grid of one time slice, row-major in s.
struct Slice2D {
    const double* data;
    int n_gap;
    int n_belief;

    double operator()(double s, double p) const {
        const double ss = s * (n_gap - 1), pp = p * (n_belief - 1);
        const int i = std::min(static_cast<int>(ss), n_gap - 2);
        const int j = std::min(static_cast<int>(pp), n_belief - 2);
        const double a = ss - i, b = pp - j;
        const double* r0 = data + static_cast<std::ptrdiff_t>(i) * n_belief + j;
        const double* r1 = r0 + n_belief;
        return (1 - a) * ((1 - b) * r0[0] + b * r0[1]) + a * ((1 - b) * r1[0] + b * r1[1]);
    }
};

/// Values on the s grid of one time slice.
struct Slice1D {
    const double* data;
    int n_gap;

    double operator()(double s, double /*p*/) const { return (*this)(s); }
    double operator()(double s) const {
        const double ss = s * (n_gap - 1);
        const int i = std::min(static_cast<int>(ss), n_gap - 2);
        const double a = ss - i;
        return (1 - a) * data[i] + a * data[i + 1];
    }
};

/// Sensitivity lattice with cached best responses.
// Outer lattice on [−K, K] plus a finer core lattice spanning the saturation kinks of both
// types. Outside the core range the responses saturate, so the core does not move with K.
struct ControlLattice {
    struct Axis {
        std::vector<double> z;
        std::vector<Response> r0, r1;
        double step = 0.0;
    };
    Axis outer, core;

    ControlLattice(const ModelSpec& spec, double K, int n) {
        fill(spec, outer, -K, K, n);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (TypeId th : {TypeId::zero, TypeId::one})
            for (double a : {spec.action_min, spec.action_max}) {
                const double d = cost_derivative(spec, th, a);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        const double pad = 0.25 * (hi - lo) + 0.1;
        lo = std::max(-K, lo - pad);
        hi = std::min(K, hi + pad);
        if (hi > lo) fill(spec, core, lo, hi, (n + 1) / 2 + 1);
    }
    int size() const { return static_cast<int>(outer.z.size()); }
    static ControlResponse at(const Axis& ax, int i0, int i1) {
        return {ax.z[i0], ax.z[i1], ax.r0[i0].action, ax.r1[i1].action, ax.r0[i0].hamiltonian, ax.r1[i1].hamiltonian};
    }
    ControlResponse at(int i0, int i1) const { return at(outer, i0, i1); }

private:
    static void fill(const ModelSpec& spec, Axis& ax, double lo, double hi, int n) {
        ax.z.resize(n);
        ax.r0.resize(n);
        ax.r1.resize(n);
        ax.step = n > 1 ? (hi - lo) / (n - 1) : hi - lo;
        for (int i = 0; i < n; ++i) {
            ax.z[i] = n > 1 ? lo + (hi - lo) * i / (n - 1) : lo;
            ax.r0[i] = respond(spec, TypeId::zero, ax.z[i]);
            ax.r1[i] = respond(spec, TypeId::one, ax.z[i]);
        }
    }
};

struct NodeOptimum {
    double value;
    double z0;
    double z1;
};

class ChainStep {
public:
    ChainStep(const ModelSpec& spec, const CredibleBand& band, double t, double t_next)
        : spec_(spec),
          kappa_(spec.kappa),
          t_(t),
          dt_(t_next - t),
          sqrt_dt_(std::sqrt(t_next - t)),
          discount_(discount_factor(spec, 0.5 * (t + t_next))),
          lower_(band.lower(t)),
          upper_(band.upper(t)),
          dlower_(band.lower_derivative(t)),
          dupper_(band.upper_derivative(t)),
          next_lower_(band.lower(t_next)),
          next_upper_(band.upper(t_next)) {}

    double discount() const { return discount_; }
    double dt() const { return dt_; }

    /// Largest u = √τ ≤ √Δt with both feet y + aτ ± σ√τ inside the linearised band.
    double step_root(double y, double a, double sigma) const {
        const double as = std::abs(sigma);
        const double u = sqrt_dt_;
        const double du = upper_ - y, dl = y - lower_;
        const double au = a - dupper_, al = a - dlower_;
        const double tau = u * u;
        if (au * tau + as * u <= du && al * tau - as * u >= -dl) return u;
        return std::min({u, first_root(au, as, du), first_root(-al, as, dl)});
    }

    /// Value of a foot at y_f after τ = u²: edge data at t + τ when a shortened step put the
    /// foot on an edge, otherwise the next slice at the foot's position.
    template <class Next, class Edge>
    double foot_value(const Next& next, const Edge& edge, double yf, double u, double b) const {
        if (u < sqrt_dt_) {
            const double tau = u * u;
            const double lo = lower_ + dlower_ * tau, hi = upper_ + dupper_ * tau;
            const double tol = 1e-9 * (1.0 + std::abs(hi - lo));
            if (yf >= hi - tol) return edge(Side::upper, t_ + tau, b);
            if (yf <= lo + tol) return edge(Side::lower, t_ + tau, b);
        }
        const double w = next_upper_ - next_lower_;
        const double s = w > 0.0 ? std::clamp((yf - next_lower_) / w, 0.0, 1.0) : 0.5;
        return next(s, b);
    }

    /// Expected continuation plus reward for one control at (y, p). At p ∈ {0, 1} the belief
    /// stays put, and Next may ignore its second argument.
    template <class Next, class Edge>
    double evaluate(const Next& next, const Edge& edge, double y, double p, const ControlResponse& c) const {
        const double sigma = c.z0 - c.z1;
        const double a = kappa_ * y - c.h0 + c.h1;
        const double u = step_root(y, a, sigma);
        const double lam = p * c.a0 + (1.0 - p) * c.a1;
        const double pp = 0.5 * (1.0 + lam * u), pm = 0.5 * (1.0 - lam * u);
        double bp = p, bm = p;
        if (p > 0.0 && p < 1.0) {
            bp = std::clamp(p * 0.5 * (1.0 + c.a0 * u) / pp, 0.0, 1.0);
            bm = std::clamp(p * 0.5 * (1.0 - c.a0 * u) / pm, 0.0, 1.0);
        }
        const double mid = y + a * u * u;
        const double reward = running_reward(c, p, discount_);
        return pp * foot_value(next, edge, mid + sigma * u, u, bp) + pm * foot_value(next, edge, mid - sigma * u, u, bm) +
               reward * u * u;
    }

    /// Lattice search, then pattern-search refinement (axis and diagonal moves)
    /// from the best few lattice points.
    template <class Eval>
    NodeOptimum optimize(const ControlLattice& lat, double K, int refine_iters, Eval&& eval) const {
        constexpr int kStarts = 3;
        struct Start {
            NodeOptimum opt;
            double h;
        };
        std::vector<Start> starts;
        for (const ControlLattice::Axis* ax : {&lat.outer, &lat.core}) {
            Start top[kStarts];
            for (auto& t : top) t = {{-std::numeric_limits<double>::infinity(), 0.0, 0.0}, ax->step};
            const int n = static_cast<int>(ax->z.size());
            for (int i0 = 0; i0 < n; ++i0)
                for (int i1 = 0; i1 < n; ++i1) {
                    const double v = eval(ControlLattice::at(*ax, i0, i1));
                    if (v > top[kStarts - 1].opt.value) {
                        int m = kStarts - 1;
                        while (m > 0 && v > top[m - 1].opt.value) {
                            top[m] = top[m - 1];
                            --m;
                        }
                        top[m] = {{v, ax->z[i0], ax->z[i1]}, ax->step};
                    }
                }
            for (const Start& s : top)
                if (s.opt.value > -std::numeric_limits<double>::infinity()) starts.push_back(s);
        }
        NodeOptimum best{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
        static constexpr double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
        for (const Start& start : starts) {
            NodeOptimum cur = start.opt;
            double h = start.h;
            for (int it = 0; it < refine_iters; ++it) {
                bool moved = false;
                for (const auto& d : dirs) {
                    const double z0 = std::clamp(cur.z0 + h * d[0], -K, K);
                    const double z1 = std::clamp(cur.z1 + h * d[1], -K, K);
                    const double v = eval(control_response(spec_, z0, z1));
                    if (v > cur.value) {
                        cur = {v, z0, z1};
                        moved = true;
                    }
                }
                if (!moved) h *= 0.5;
            }
            if (cur.value > best.value) best = cur;
        }
        return best;
    }

private:
    // Smallest positive root of c2·u² + c1·u − d = 0 with c1 ≥ 0, d ≥ 0; +∞ if none.
    static double first_root(double c2, double c1, double d) {
        if (d <= 0.0) return 0.0;
        const double disc = c1 * c1 + 4.0 * c2 * d;
        if (disc < 0.0) return std::numeric_limits<double>::infinity();
        const double den = c1 + std::sqrt(disc);
        if (den <= 0.0) return std::numeric_limits<double>::infinity();
        return 2.0 * d / den;
    }

    const ModelSpec& spec_;
    double kappa_;
    double t_;
    double dt_;
    double sqrt_dt_;
    double discount_;
    double lower_, upper_, dlower_, dupper_;
    double next_lower_, next_upper_;
};

}  // namespace ashjb::detail
