#include "ashjb/credible_band.hpp"

#include <algorithm>
#include <cmath>

#include "ashjb/errors.hpp"
#include "detail/gap_extremes.hpp"

namespace ashjb {

bool contains(const IntervalSet& set, double z) {
    return std::any_of(set.begin(), set.end(), [z](const Interval& i) { return i.contains(z); });
}

double CredibleBand::boundary(double a, double t) const {
    return -(a / kappa) * std::expm1(-kappa * (horizon_T - t));
}

std::pair<double, double> extremal_gaps(const ModelSpec& spec) {
    const auto [lo, hi] = detail::gap_extremes(spec);
    if (!(hi - lo > 1e-12 * (1.0 + std::abs(hi) + std::abs(lo))))
        throw DomainError("extremal_gaps: gap function is constant (degenerate costs)");
    return {lo, hi};
}

namespace {

void check_time(const ModelSpec& spec, double t) {
    if (!(t >= 0.0 && t <= spec.horizon_T))
        throw DomainError("time " + std::to_string(t) + " outside [0, T]");
}

// Largest x in [in, out] (in either order) still satisfying pred, given pred(in) && !pred(out).
template <class Pred>
double bisect_edge(double in, double out, Pred pred) {
    for (int it = 0; it < 200 && in != out; ++it) {
        const double mid = 0.5 * (in + out);
        if (mid == in || mid == out) break;
        (pred(mid) ? in : out) = mid;
    }
    return in;
}

IntervalSet scan_level(const ModelSpec& spec, double target, double tol, double window,
                       const std::vector<double>& candidates) {
    auto on = [&](double z) { return std::abs(gap_function(spec, z) - target) <= tol; };
    const int n = 20000;
    const double h = 2.0 * window / n;
    IntervalSet out;
    int i = 0;
    while (i <= n) {
        const double z = -window + h * i;
        if (!on(z)) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 <= n && on(-window + h * (j + 1))) ++j;
        double lo = z, hi = -window + h * j;
        if (i > 0) lo = bisect_edge(lo, lo - h, on);
        if (j < n) hi = bisect_edge(hi, hi + h, on);
        out.push_back({lo, hi});
        i = j + 1;
    }
    // Isolated extrema narrower than the scan step.
    for (double c : candidates) {
        if (c < -window || c > window || !on(c) || contains(out, c)) continue;
        const double lo = bisect_edge(c, std::max(-window, c - h), on);
        const double hi = bisect_edge(c, std::min(window, c + h), on);
        out.push_back({lo, hi});
    }
    std::sort(out.begin(), out.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    return out;
}

}  // namespace

std::pair<double, double> band(const ModelSpec& spec, double t) {
    check_time(spec, t);
    const auto [lo, hi] = extremal_gaps(spec);
    CredibleBand b;
    b.a_lower = lo;
    b.a_upper = hi;
    b.kappa = spec.kappa;
    b.horizon_T = spec.horizon_T;
    return {b.lower(t), b.upper(t)};
}

double band_width(const ModelSpec& spec, double t) {
    const auto [lo, hi] = band(spec, t);
    return hi - lo;
}

double level_window(const ModelSpec& spec, double control_trunc_K) {
    return std::max(2.0 * saturation_threshold(spec), control_trunc_K);
}

LevelSets level_sets(const ModelSpec& spec, double tol, double window) {
    if (!(tol > 0.0)) throw DomainError("level_sets: tolerance must be positive");
    const auto [lo, hi] = extremal_gaps(spec);
    const auto cands = detail::gap_candidates(spec);
    LevelSets ls{scan_level(spec, lo, tol, window, cands), scan_level(spec, hi, tol, window, cands)};
    if (ls.lower.empty() || ls.upper.empty()) throw Error("level_sets: empty level set inside the window");
    return ls;
}

CredibleBand make_band(const ModelSpec& spec, double control_trunc_K, double tol) {
    CredibleBand b;
    std::tie(b.a_lower, b.a_upper) = extremal_gaps(spec);
    b.kappa = spec.kappa;
    b.horizon_T = spec.horizon_T;
    b.level_tol = tol;
    b.level_window = level_window(spec, control_trunc_K);
    auto ls = level_sets(spec, tol, b.level_window);
    b.level_lower = std::move(ls.lower);
    b.level_upper = std::move(ls.upper);
    return b;
}

bool contains(const ModelSpec& spec, double t, double y0, double y1) {
    const auto [lo, hi] = band(spec, t);
    const double g = y0 - y1;
    const double tol = 1e-12 * (1.0 + std::abs(y0) + std::abs(y1));
    return g >= lo - tol && g <= hi + tol;
}

}  // namespace ashjb
