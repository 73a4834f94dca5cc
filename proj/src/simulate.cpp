#include "ashjb/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ashjb/errors.hpp"
#include "ashjb/generator.hpp"
#include "detail/chain_step.hpp"

namespace ashjb {

namespace {

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    return std::mt19937_64(seq);
}

int slice_index(const ValueField& field, double t) {
    const int nt = field.n_time();
    return std::clamp(static_cast<int>(std::floor(t / field.dt() + 1e-9)), 0, nt - 1);
}

double logistic(double l) { return 1.0 / (1.0 + std::exp(-l)); }

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    if (v.empty()) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / v.size();
    if (v.size() > 1) {
        double q = 0.0;
        for (double x : v) q += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(q / (v.size() - 1) / v.size());
    }
    return r;
}

struct PathOutcome {
    double payoff = 0.0;
    double terminal_gap = 0.0;
    double p_terminal = 0.0;
    double p_min = 1.0;
    double p_max = 0.0;
    double max_excursion = 0.0;
    int violations = 0;
    int large_violations = 0;
    bool hit = false;
};

struct Rollout {
    const ModelSpec& spec;
    const ValueField& field;
    const PolicyField& policy;
    const ControlLaw& law;
    bool switch_on_hit;
    const SimConfig& sim;
    int n_steps;
    double h;

    PathOutcome run(int path, std::vector<TrajectoryRow>* rows) const {
        auto rng = path_stream(sim.seed, static_cast<std::uint64_t>(path));
        std::normal_distribution<double> normal;
        const CredibleBand& band = field.band;
        const double lmax = std::log((1.0 - sim.clamp_eps) / sim.clamp_eps);
        const double sqrt_h = std::sqrt(h);

        PathOutcome out;
        double x = sim.x0, y0 = sim.y0, y1 = sim.y1;
        double l = std::clamp(std::log(sim.p0 / (1.0 - sim.p0)), -lmax, lmax);
        double p = logistic(l);
        bool on_edge = false;
        Side side = Side::lower;
        double z0 = 0.0, z1 = 0.0;
        auto emit = [&](double t) {
            if (!rows) return;
            rows->push_back({path, t, x, p, y0, y1, band.lower(t), band.upper(t), z0, z1,
                             on_edge ? (side == Side::lower ? NodeKind::lower : NodeKind::upper) : NodeKind::interior});
        };
        for (int k = 0; k < n_steps; ++k) {
            const double t = k * h;
            if (on_edge) {
                z0 = z1 = boundary_control(field, policy, side, t, p);
            } else {
                const auto z = law(t, y0 - y1, p);
                z0 = z[0];
                z1 = z[1];
            }
            emit(t);
            const ControlResponse c = control_response(spec, z0, z1);
            const double lam = mean_action(c, p);
            const double d = c.a0 - c.a1;
            const double dB = sqrt_h * normal(rng);
            x += lam * h + dB;
            double n0 = y0 + (-c.h0 + spec.kappa * y0 + lam * z0) * h + z0 * dB;
            double n1 = y1 + (-c.h1 + spec.kappa * y1 + lam * z1) * h + z1 * dB;
            l = std::clamp(l + d * dB - 0.5 * (1.0 - 2.0 * p) * d * d * h, -lmax, lmax);
            p = logistic(l);
            out.p_min = std::min(out.p_min, p);
            out.p_max = std::max(out.p_max, p);

            const double tn = (k + 1) * h;
            const double lo = band.lower(std::min(tn, spec.horizon_T)), hi = band.upper(std::min(tn, spec.horizon_T));
            if (on_edge) {
                // Matched controls move the gap along the edge; only the sum is stochastic.
                const double sum = n0 + n1, g = side == Side::lower ? lo : hi;
                n0 = 0.5 * (sum + g);
                n1 = 0.5 * (sum - g);
            } else {
                const double g = n0 - n1;
                const double exc = std::max({g - hi, lo - g, 0.0});
                if (exc > 0.0) {
                    ++out.violations;
                    if (exc > 5.0 * sqrt_h * std::abs(z0 - z1)) ++out.large_violations;
                    out.max_excursion = std::max(out.max_excursion, exc);
                    const double target = g > hi ? hi : lo;
                    const double shift = 0.5 * (g - target);
                    n0 -= shift;
                    n1 += shift;
                    // the collapse of the band at T is not a boundary hit
                    if (switch_on_hit && k + 1 < n_steps) {
                        on_edge = true;
                        side = g > hi ? Side::upper : Side::lower;
                        out.hit = true;
                    }
                } else if (switch_on_hit && k + 1 < n_steps && (g == lo || g == hi) && hi > lo) {
                    on_edge = true;
                    side = g == hi ? Side::upper : Side::lower;
                    out.hit = true;
                }
            }
            y0 = n0;
            y1 = n1;
        }
        emit(n_steps * h);
        out.payoff = x - y0;
        out.terminal_gap = std::abs(y0 - y1);
        out.p_terminal = p;
        return out;
    }
};

void check_field(const ModelSpec& spec, const ValueField& field, const PolicyField& policy) {
    const ModelSpec& f = field.spec;
    if (f.kappa != spec.kappa || f.horizon_T != spec.horizon_T || f.action_min != spec.action_min ||
        f.action_max != spec.action_max || f.cost_kind != spec.cost_kind)
        throw ConfigError("model", "solved field does not match the model");
    if (policy.n_gap != field.n_gap() || policy.n_belief != field.n_belief() ||
        policy.z0_star.size() != field.values.size())
        throw ConfigError("grid", "policy does not match the value field");
}

}  // namespace

void SimConfig::validate() const {
    if (n_paths < 100) throw ConfigError("sim.n_paths", "must be >= 100");
    if (!(dt > 0.0)) throw ConfigError("sim.dt", "must be positive");
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw ConfigError("sim.clamp_eps", "must lie in (0, 0.5)");
    if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("sim.p0", "prior must lie in (0,1)");
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(y1))
        throw ConfigError("sim.initial", "initial state must be finite");
}

std::array<double, 2> policy_control(const ValueField& field, const PolicyField& policy, double t, double gap,
                                     double p) {
    const int k = slice_index(field, t);
    const double tt = std::min(t, field.spec.horizon_T);
    const double w = field.band.width(tt);
    const double s = w > 0.0 ? std::clamp((gap - field.band.lower(tt)) / w, 0.0, 1.0) : 0.5;
    const double pc = std::clamp(p, 0.0, 1.0);
    const std::size_t o = policy.offset(k, 0, 0);
    return {detail::Slice2D{policy.z0_star.data() + o, policy.n_gap, policy.n_belief}(s, pc),
            detail::Slice2D{policy.z1_star.data() + o, policy.n_gap, policy.n_belief}(s, pc)};
}

double boundary_control(const ValueField& field, const PolicyField& policy, Side side, double t, double p) {
    const int k = slice_index(field, t);
    const int j = std::clamp(static_cast<int>(std::lround(p * (policy.n_belief - 1))), 0, policy.n_belief - 1);
    const int i = side == Side::lower ? 0 : policy.n_gap - 1;
    return policy.z0_star[policy.offset(k, i, j)];
}

PathBundle rollout_law(const ModelSpec& spec, const ValueField& field, const PolicyField& policy, const ControlLaw& law,
                       bool switch_on_hit, const SimConfig& sim) {
    sim.validate();
    check_field(spec, field, policy);
    if (sim.dt > field.dt() * (1.0 + 1e-9))
        throw ConfigError("sim.dt", "must not exceed the solved field's time step " + std::to_string(field.dt()));
    if (!contains(spec, 0.0, sim.y0, sim.y1)) throw DomainError("initial promises lie outside the credible band");
    const int n_steps = std::max(1, static_cast<int>(std::lround(spec.horizon_T / sim.dt)));
    const Rollout ro{spec, field, policy, law, switch_on_hit, sim, n_steps, spec.horizon_T / n_steps};

    std::vector<PathOutcome> outs(sim.n_paths);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < sim.n_paths; ++i) outs[i] = ro.run(i, nullptr);

    PathBundle b;
    b.n_paths = sim.n_paths;
    b.n_steps = n_steps;
    std::vector<double> pay(outs.size()), pt(outs.size());
    double viol = 0.0, large = 0.0, hits = 0.0, gap_sum = 0.0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const PathOutcome& o = outs[i];
        pay[i] = o.payoff;
        pt[i] = o.p_terminal;
        viol += o.violations;
        large += o.large_violations;
        hits += o.hit ? 1.0 : 0.0;
        gap_sum += o.terminal_gap;
        b.terminal_gap_max = std::max(b.terminal_gap_max, o.terminal_gap);
        b.max_excursion = std::max(b.max_excursion, o.max_excursion);
        b.belief_min = std::min(b.belief_min, o.p_min);
        b.belief_max = std::max(b.belief_max, o.p_max);
    }
    const double steps = static_cast<double>(n_steps) * sim.n_paths;
    const MeanSe ps = mean_se(pay), ts = mean_se(pt);
    b.payoff_mean = ps.mean;
    b.payoff_se = ps.se;
    b.terminal_belief_mean = ts.mean;
    b.terminal_belief_se = ts.se;
    b.violation_fraction = viol / steps;
    b.large_violation_fraction = large / steps;
    b.hit_fraction = hits / sim.n_paths;
    b.terminal_gap_mean = gap_sum / sim.n_paths;
    return b;
}

PathBundle rollout_policy(const ModelSpec& spec, const ValueField& field, const PolicyField& policy,
                          const SimConfig& sim) {
    const ControlLaw law = [&](double t, double g, double p) { return policy_control(field, policy, t, g, p); };
    return rollout_law(spec, field, policy, law, true, sim);
}

std::vector<TrajectoryRow> trajectory_export(const ModelSpec& spec, const ValueField& field, const PolicyField& policy,
                                             const SimConfig& sim, int n_export) {
    sim.validate();
    check_field(spec, field, policy);
    if (n_export < 0 || n_export > sim.n_paths) throw ConfigError("sim.n_export", "must lie in [0, n_paths]");
    if (!contains(spec, 0.0, sim.y0, sim.y1)) throw DomainError("initial promises lie outside the credible band");
    const ControlLaw law = [&](double t, double g, double p) { return policy_control(field, policy, t, g, p); };
    const int n_steps = std::max(1, static_cast<int>(std::lround(spec.horizon_T / sim.dt)));
    const Rollout ro{spec, field, policy, law, true, sim, n_steps, spec.horizon_T / n_steps};
    std::vector<TrajectoryRow> rows;
    rows.reserve(static_cast<std::size_t>(n_export) * (n_steps + 1));
    for (int i = 0; i < n_export; ++i) ro.run(i, &rows);
    return rows;
}

FilterReport filter_oracle_check(const ActionPath& actions, const FilterCheckConfig& cfg) {
    if (cfg.n_paths < 2) throw ConfigError("filter.n_paths", "need at least two paths");
    if (!(cfg.dt > 0.0)) throw ConfigError("filter.dt", "must be positive");
    if (!(cfg.p0 > 0.0 && cfg.p0 < 1.0)) throw ConfigError("filter.p0", "prior must lie in (0,1)");
    if (!(cfg.quantile > 0.0 && cfg.quantile < 1.0)) throw ConfigError("filter.quantile", "must lie in (0,1)");
    const int n = std::max(1, static_cast<int>(std::lround(cfg.horizon_T / cfg.dt)));
    const double h = cfg.horizon_T / n;

    struct Out {
        double dev = 0.0, dev_half = 0.0, dev_euler = 0.0, term_dev = 0.0, pb = 0.0, pk = 0.0;
    };
    std::vector<Out> outs(cfg.n_paths);

#pragma omp parallel for schedule(static)
    for (int path = 0; path < cfg.n_paths; ++path) {
        auto rng = path_stream(cfg.seed, static_cast<std::uint64_t>(path));
        std::uniform_real_distribution<double> unif;
        std::normal_distribution<double> normal;
        const bool type0 = unif(rng) < cfg.p0;
        std::vector<double> dw(2 * static_cast<std::size_t>(n));
        for (double& v : dw) v = std::sqrt(0.5 * h) * normal(rng);

        Out& o = outs[path];
        for (int level = 0; level < 2; ++level) {
            const int m = level == 0 ? n : 2 * n;
            const double hh = level == 0 ? h : 0.5 * h;
            double lb = std::log(cfg.p0 / (1.0 - cfg.p0));
            double pm = cfg.p0, pe = cfg.p0;
            double dev = 0.0, dev_e = 0.0;
            for (int k = 0; k < m; ++k) {
                const auto a = actions(k * hh);
                const double d = a[0] - a[1];
                const double db = level == 0 ? dw[2 * k] + dw[2 * k + 1] : dw[k];
                const double dx = (type0 ? a[0] : a[1]) * hh + db;
                lb += d * dx - 0.5 * (a[0] * a[0] - a[1] * a[1]) * hh;
                const double pb = logistic(lb);
                // Milstein step of dp = p(1−p)Δ dI.
                const double di = dx - (pm * a[0] + (1.0 - pm) * a[1]) * hh;
                const double b = pm * (1.0 - pm) * d, bp = (1.0 - 2.0 * pm) * d;
                pm = std::clamp(pm + b * di + 0.5 * b * bp * (di * di - hh), 0.0, 1.0);
                const double die = dx - (pe * a[0] + (1.0 - pe) * a[1]) * hh;
                pe = std::clamp(pe + pe * (1.0 - pe) * d * die, 0.0, 1.0);
                dev = std::max(dev, std::abs(pm - pb));
                dev_e = std::max(dev_e, std::abs(pe - pb));
                if (level == 0 && k == m - 1) {
                    o.term_dev = std::abs(pm - pb);
                    o.pb = pb;
                    o.pk = pm;
                }
            }
            if (level == 0) {
                o.dev = dev;
                o.dev_euler = dev_e;
            } else {
                o.dev_half = dev;
            }
        }
    }

    auto quantile = [&](auto member) {
        std::vector<double> v(outs.size());
        for (std::size_t i = 0; i < outs.size(); ++i) v[i] = outs[i].*member;
        const std::size_t idx = std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(cfg.quantile * v.size())) - 1);
        std::nth_element(v.begin(), v.begin() + idx, v.end());
        return v[idx];
    };
    FilterReport r;
    r.quantile_max_dev = quantile(&Out::dev);
    r.quantile_max_dev_half = quantile(&Out::dev_half);
    r.quantile_max_dev_euler = quantile(&Out::dev_euler);
    r.halving_ratio = r.quantile_max_dev_half > 0.0 ? r.quantile_max_dev / r.quantile_max_dev_half : 0.0;
    std::vector<double> pb(outs.size()), pk(outs.size());
    double td = 0.0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        pb[i] = outs[i].pb;
        pk[i] = outs[i].pk;
        td += outs[i].term_dev;
    }
    r.mean_terminal_dev = td / outs.size();
    const MeanSe b = mean_se(pb), k = mean_se(pk);
    r.terminal_mean_bayes = b.mean;
    r.terminal_se_bayes = b.se;
    r.terminal_mean_kushner = k.mean;
    r.terminal_se_kushner = k.se;
    return r;
}

}  // namespace ashjb
