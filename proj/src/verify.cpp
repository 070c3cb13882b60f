#include "heightlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "heightlab/csbp.hpp"
#include "heightlab/height.hpp"
#include "heightlab/loctime.hpp"

namespace hl {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HEIGHTLAB_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body,
                  int workers) {
    int w = std::min<std::int64_t>(resolve_workers(workers), n);
    if (w <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            for (std::int64_t i = t; i < n; i += w) body(i);
        });
    for (auto& th : pool) th.join();
}

namespace {

double ks_statistic_sorted(const std::vector<double>& a,
                           const std::vector<double>& b) {
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        // advance both sides through the full tie block so the CDFs are
        // compared only at distinct sample values (atoms at 0 are common)
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

// Estimate of L^t(S_x) from a binned field: average over the centred window
// [t - delta/2, t + delta/2), clipped at 0.
double window_value(const std::vector<double>& field, double delta, double t) {
    double lo = std::max(0.0, t - 0.5 * delta);
    double hi = lo + delta;
    double acc = 0.0;
    auto b0 = static_cast<std::size_t>(lo / delta);
    auto b1 = static_cast<std::size_t>(hi / delta) + 1;
    for (std::size_t b = b0; b < b1 && b < field.size(); ++b) {
        double blo = b * delta, bhi = blo + delta;
        double ov = std::min(bhi, hi) - std::max(blo, lo);
        if (ov > 0.0) acc += field[b] * ov;
    }
    return acc / delta;
}

// int_(a,b] (z ^ z^2) pi(dz)
double moment_min(const LevyMeasure& pi, double a, double b) {
    double acc = 0.0;
    if (a < 1.0) acc += pi.moment2(a, std::min(b, 1.0));
    if (b > 1.0) acc += pi.moment1(std::max(a, 1.0), b);
    return acc;
}

constexpr double kC = 1.0 / (1.0 - 0.36787944117144233);  // (1 - e^{-1})^{-1}

}  // namespace

KsResult ks_two_sample(const std::vector<double>& a,
                       const std::vector<double>& b, int n_permutations,
                       std::uint64_t seed) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    KsResult out;
    out.statistic = ks_statistic_sorted(sa, sb);
    if (n_permutations <= 0) return out;

    std::vector<double> pool = a;
    pool.insert(pool.end(), b.begin(), b.end());
    Rng rng(mix64(seed ^ 0x6b73746573740001ull));
    int ge = 0;
    std::vector<double> pa(a.size()), pb(b.size());
    for (int p = 0; p < n_permutations; ++p) {
        std::shuffle(pool.begin(), pool.end(), rng);
        pa.assign(pool.begin(), pool.begin() + a.size());
        pb.assign(pool.begin() + a.size(), pool.end());
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        if (ks_statistic_sorted(pa, pb) >= out.statistic) ++ge;
    }
    out.p_value = (1.0 + ge) / (1.0 + n_permutations);
    return out;
}

void EnsembleSummary::finalize() {
    mean.assign(coords.size(), 0.0);
    variance.assign(coords.size(), 0.0);
    stderr_.assign(coords.size(), 0.0);
    for (std::size_t c = 0; c < coords.size(); ++c) {
        const auto& s = samples[c];
        if (s.empty()) continue;
        double m = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
        double v = 0.0;
        for (double val : s) v += (val - m) * (val - m);
        v = s.size() > 1 ? v / (s.size() - 1.0) : 0.0;
        mean[c] = m;
        variance[c] = v;
        stderr_[c] = std::sqrt(v / s.size());
    }
    n = samples.empty() ? 0 : static_cast<std::int64_t>(samples[0].size());
}

void ComparisonReport::evaluate(int n_permutations, std::uint64_t seed) {
    a.finalize();
    b.finalize();
    coords.clear();
    pass = true;
    for (std::size_t c = 0; c < a.coords.size(); ++c) {
        CoordComparison cc;
        cc.coord = a.coords[c];
        cc.mean_a = a.mean[c];
        cc.mean_b = b.mean[c];
        cc.mean_gap = std::abs(cc.mean_a - cc.mean_b);
        double se = std::hypot(a.stderr_[c], b.stderr_[c]);
        cc.zscore = se > 0.0 ? cc.mean_gap / se : (cc.mean_gap > 0.0 ? kInf : 0.0);
        auto ks = ks_two_sample(a.samples[c], b.samples[c], n_permutations,
                                seed_split(seed, 7, static_cast<std::uint32_t>(c)));
        cc.ks = ks.statistic;
        cc.p_value = ks.p_value;
        cc.pass = cc.mean_gap <= tol.z_max * se + tol.bias && cc.ks <= tol.ks_max;
        pass = pass && cc.pass;
        coords.push_back(std::move(cc));
    }
}

std::string comparison_report_json(const ComparisonReport& rep) {
    nlohmann::json j;
    j["label"] = rep.label;
    j["pass"] = rep.pass;
    j["tolerances"] = {{"z_max", rep.tol.z_max},
                       {"bias", rep.tol.bias},
                       {"ks_max", rep.tol.ks_max}};
    j["ensemble_a"] = {{"seed", rep.a.seed},
                       {"n", rep.a.n},
                       {"dt", rep.a.dt},
                       {"delta_t", rep.a.delta_t},
                       {"reached_fraction", rep.a.reached_fraction}};
    j["ensemble_b"] = {{"seed", rep.b.seed},
                       {"n", rep.b.n},
                       {"dt", rep.b.dt},
                       {"delta_t", rep.b.delta_t},
                       {"reached_fraction", rep.b.reached_fraction}};
    j["coords"] = nlohmann::json::array();
    for (const auto& c : rep.coords)
        j["coords"].push_back({{"name", c.name},
                               {"coord", c.coord},
                               {"mean_a", c.mean_a},
                               {"mean_b", c.mean_b},
                               {"zscore", c.zscore},
                               {"ks", c.ks},
                               {"p_value", c.p_value},
                               {"pass", c.pass}});
    return j.dump(2);
}

std::string comparison_report_text(const ComparisonReport& rep) {
    std::string out = rep.label + "\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-18s %10s %10s %8s %8s %8s %s\n",
                  "coordinate", "mean_a", "mean_b", "z", "ks", "p", "pass");
    out += buf;
    for (const auto& c : rep.coords) {
        std::snprintf(buf, sizeof(buf),
                      "%-18s %10.5f %10.5f %8.3f %8.4f %8.4f %s\n",
                      c.name.c_str(), c.mean_a, c.mean_b, c.zscore, c.ks,
                      c.p_value, c.pass ? "ok" : "FAIL");
        out += buf;
    }
    out += rep.pass ? "PASS\n" : "FAIL\n";
    return out;
}

ComparisonReport ray_knight_linear(const Mechanism& mech, double x,
                                   std::vector<double> levels, std::int64_t N,
                                   double dt, double eps_sim, double delta_t,
                                   std::uint64_t seed, double cap,
                                   double dt_pop, Tolerances tol,
                                   int workers) {
    if (levels.empty()) throw std::invalid_argument("levels must be nonempty");
    const std::size_t L = levels.size();
    const double horizon = *std::max_element(levels.begin(), levels.end());

    std::vector<std::vector<double>> va(N), vb(N);
    std::vector<char> reached(N, 0);
    parallel_for(N, [&](std::int64_t i) {
        auto p = simulate_levy(mech, PathBudget::first_passage(x, cap), dt,
                               eps_sim, seed_split(seed, 1, i));
        auto rec = first_passage_Sx(p, x);
        if (!rec.reached) return;
        reached[i] = 1;
        auto h = height_from_path(p, mech.beta);
        va[i].resize(L);
        for (std::size_t c = 0; c < L; ++c)
            va[i][c] = occupation_at_level(h, levels[c], delta_t, rec.index);
    }, workers);

    Mechanism csbp_mech(0.0, mech.beta, mech.pi);
    auto f = linear_interaction(mech.alpha);
    parallel_for(N, [&](std::int64_t i) {
        auto p = simulate_csbp(f, csbp_mech, {x}, horizon, dt_pop, eps_sim,
                               seed_split(seed, 2, i));
        vb[i].resize(L);
        for (std::size_t c = 0; c < L; ++c) {
            auto k = std::min<std::size_t>(
                p.steps() - 1,
                static_cast<std::size_t>(std::llround(levels[c] / dt_pop)));
            vb[i][c] = p.increments[0][k];
        }
    }, workers);

    ComparisonReport rep;
    rep.label = "ray_knight_linear";
    rep.tol = tol;
    rep.a.coords = rep.b.coords = levels;
    rep.a.samples.assign(L, {});
    rep.b.samples.assign(L, {});
    std::int64_t got = 0;
    for (std::int64_t i = 0; i < N; ++i) {
        if (reached[i]) {
            ++got;
            for (std::size_t c = 0; c < L; ++c)
                rep.a.samples[c].push_back(va[i][c]);
        }
        for (std::size_t c = 0; c < L; ++c)
            rep.b.samples[c].push_back(vb[i][c]);
    }
    rep.a.reached_fraction = static_cast<double>(got) / N;
    if (rep.a.reached_fraction < 0.9)
        throw std::runtime_error(
            "ray_knight_linear: only " + std::to_string(got) + " of " +
            std::to_string(N) + " paths reached S_x; increase the cap");
    rep.a.seed = rep.b.seed = seed;
    rep.a.dt = dt;
    rep.b.dt = dt_pop;
    rep.a.delta_t = rep.b.delta_t = delta_t;
    rep.evaluate(200, seed);
    for (std::size_t c = 0; c < L; ++c) {
        char nm[48];
        std::snprintf(nm, sizeof(nm), "t=%g", levels[c]);
        rep.coords[c].name = nm;
    }
    return rep;
}

ComparisonReport ray_knight_interacting(const InteractConfig& cfg_in,
                                        std::vector<double> x_list,
                                        std::vector<double> levels,
                                        std::int64_t N, std::uint64_t seed,
                                        double dt_pop, Tolerances tol,
                                        int workers) {
    if (x_list.empty() || levels.empty())
        throw std::invalid_argument("x_list and levels must be nonempty");
    if (!std::is_sorted(x_list.begin(), x_list.end()))
        throw std::invalid_argument("x_list must be sorted");
    for (double t : levels)
        if (cfg_in.a != kInf && t > cfg_in.a)
            throw std::invalid_argument("levels must not exceed a");

    InteractConfig cfg = cfg_in;
    cfg.x_target = x_list.back();
    cfg.x_marks = x_list;
    const std::size_t M = x_list.size(), L = levels.size();
    const std::size_t ncoord = M * L + (M - 1) * L;  // marginals + increments
    const double horizon = *std::max_element(levels.begin(), levels.end());

    std::vector<std::vector<double>> va(N), vb(N);
    std::vector<char> reached(N, 0);
    parallel_for(N, [&](std::int64_t i) {
        auto r = simulate_interacting_height(cfg, seed_split(seed, 3, i));
        for (const auto& s : r.snapshots)
            if (!s.reached) return;
        reached[i] = 1;
        va[i].resize(ncoord);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t c = 0; c < L; ++c)
                va[i][m * L + c] =
                    window_value(r.snapshots[m].field, cfg.delta_t, levels[c]);
        for (std::size_t m = 0; m + 1 < M; ++m)
            for (std::size_t c = 0; c < L; ++c)
                va[i][M * L + m * L + c] =
                    va[i][(m + 1) * L + c] - va[i][m * L + c];
    }, workers);

    Mechanism csbp_mech(0.0, cfg.beta, cfg.pi);
    parallel_for(N, [&](std::int64_t i) {
        auto p = simulate_csbp(cfg.f, csbp_mech, x_list, horizon, dt_pop,
                               cfg.eps_sim, seed_split(seed, 4, i));
        vb[i].resize(ncoord);
        for (std::size_t c = 0; c < L; ++c) {
            auto k = std::min<std::size_t>(
                p.steps() - 1,
                static_cast<std::size_t>(std::llround(levels[c] / dt_pop)));
            double run = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                run += p.increments[m][k];
                vb[i][m * L + c] = run;
                // V^{(m+1)} = Z^{x_{m+1}} - Z^{x_m} is the increment marginal
                if (m + 1 < M)
                    vb[i][M * L + m * L + c] = p.increments[m + 1][k];
            }
        }
    }, workers);

    ComparisonReport rep;
    rep.label = "ray_knight_interacting";
    rep.tol = tol;
    rep.a.samples.assign(ncoord, {});
    rep.b.samples.assign(ncoord, {});
    rep.a.coords.assign(ncoord, 0.0);
    rep.b.coords.assign(ncoord, 0.0);
    std::int64_t got = 0;
    for (std::int64_t i = 0; i < N; ++i) {
        if (reached[i]) {
            ++got;
            for (std::size_t c = 0; c < ncoord; ++c)
                rep.a.samples[c].push_back(va[i][c]);
        }
        for (std::size_t c = 0; c < ncoord; ++c)
            rep.b.samples[c].push_back(vb[i][c]);
    }
    rep.a.reached_fraction = static_cast<double>(got) / N;
    if (rep.a.reached_fraction < 0.9)
        throw std::runtime_error(
            "ray_knight_interacting: only " + std::to_string(got) + " of " +
            std::to_string(N) + " replicates reached all S_x");
    rep.a.seed = rep.b.seed = seed;
    rep.a.dt = cfg.dt;
    rep.b.dt = dt_pop;
    rep.a.delta_t = rep.b.delta_t = cfg.delta_t;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t c = 0; c < L; ++c)
            rep.a.coords[m * L + c] = levels[c];
    for (std::size_t m = 0; m + 1 < M; ++m)
        for (std::size_t c = 0; c < L; ++c)
            rep.a.coords[M * L + m * L + c] = levels[c];
    rep.evaluate(200, seed);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t c = 0; c < L; ++c) {
            char nm[64];
            std::snprintf(nm, sizeof(nm), "x=%g t=%g", x_list[m], levels[c]);
            rep.coords[m * L + c].name = nm;
        }
    for (std::size_t m = 0; m + 1 < M; ++m)
        for (std::size_t c = 0; c < L; ++c) {
            char nm[64];
            std::snprintf(nm, sizeof(nm), "inc %g-%g t=%g", x_list[m],
                          x_list[m + 1], levels[c]);
            rep.coords[M * L + m * L + c].name = nm;
        }
    return rep;
}

BoundReport bound_suite(const Mechanism& mech, std::vector<double> s_grid,
                        std::vector<double> x_grid, std::vector<double> z_grid,
                        std::int64_t N, double dt, double eps_sim,
                        std::uint64_t seed, int workers) {
    if (s_grid.empty()) throw std::invalid_argument("s_grid must be nonempty");
    const double smax = *std::max_element(s_grid.begin(), s_grid.end());
    const std::size_t ns = s_grid.size(), nx = x_grid.size(),
                      nz = z_grid.size();
    const std::size_t npair = nz > 1 ? nz - 1 : 0;
    const bool has_pi = !mech.pi.is_zero();
    // per-replicate raw rows: [s][x indicators, z plus-parts, pair clamps]
    const std::size_t row = nx + nz + npair;
    std::vector<std::vector<double>> raw(N);
    parallel_for(N, [&](std::int64_t i) {
        auto p = simulate_levy(mech, PathBudget::horizon(smax), dt, eps_sim,
                               seed_split(seed, 5, i));
        raw[i].assign(ns * row, 0.0);
        for (std::size_t si = 0; si < ns; ++si) {
            auto idx = std::min<std::size_t>(
                p.values.size() - 1,
                static_cast<std::size_t>(std::llround(s_grid[si] / dt)));
            double inf = 0.0;
            for (std::size_t k = 0; k <= idx; ++k)
                inf = std::min(inf, p.values[k]);
            double* r = raw[i].data() + si * row;
            for (std::size_t xi = 0; xi < nx; ++xi)
                r[xi] = (-inf <= x_grid[xi]) ? 1.0 : 0.0;
            for (std::size_t zi = 0; zi < nz; ++zi)
                r[nx + zi] = std::max(0.0, z_grid[zi] + inf);
            if (has_pi)
                for (std::size_t pi_ = 0; pi_ + 1 < nz; ++pi_)
                    r[nx + nz + pi_] =
                        clamp_sum(p, static_cast<std::int64_t>(idx),
                                  z_grid[pi_], z_grid[pi_ + 1]);
        }
    }, workers);

    BoundReport out;
    out.pass = true;
    auto push = [&](BoundCheck c) {
        out.pass = out.pass && c.pass;
        out.checks.push_back(std::move(c));
    };
    for (std::size_t si = 0; si < ns; ++si) {
        const double s = s_grid[si];
        const double root = std::sqrt(mech.beta * s);
        for (std::size_t col = 0; col < row; ++col) {
            double m = 0.0, v = 0.0;
            for (std::int64_t i = 0; i < N; ++i) m += raw[i][si * row + col];
            m /= N;
            for (std::int64_t i = 0; i < N; ++i) {
                double d = raw[i][si * row + col] - m;
                v += d * d;
            }
            v /= (N - 1.0);
            double se = std::sqrt(v / N);
            BoundCheck c;
            c.s = s;
            c.empirical = m;
            c.stderr_ = se;
            if (col < nx) {
                c.kind = "passage";
                c.param = x_grid[col];
                c.bound = std::min(kC * c.param / root, 1.0);
            } else if (col < nx + nz) {
                c.kind = "clamp_one";
                c.param = z_grid[col - nx];
                c.bound = std::min(kC * c.param * c.param / (2.0 * root),
                                   c.param);
            } else {
                if (!has_pi) continue;
                c.kind = "clamp_mass";
                c.param = z_grid[col - nx - nz];
                c.param2 = z_grid[col - nx - nz + 1];
                double cs = std::max(kC * std::sqrt(s / mech.beta), s);
                c.bound = cs * moment_min(mech.pi, c.param, c.param2);
            }
            c.pass = c.empirical <= c.bound + 3.0 * c.stderr_;
            push(std::move(c));
        }
    }
    return out;
}

TruncationReport truncation_convergence(const Mechanism& mech,
                                        std::vector<double> eps_schedule,
                                        double s, std::int64_t N, double dt,
                                        double eps_ref, double x_probe,
                                        std::uint64_t seed, int workers) {
    if (eps_schedule.empty())
        throw std::invalid_argument("eps schedule must be nonempty");
    for (std::size_t k = 0; k + 1 < eps_schedule.size(); ++k)
        if (eps_schedule[k] <= eps_schedule[k + 1])
            throw std::invalid_argument("eps schedule must be decreasing");
    if (eps_ref >= eps_schedule.back())
        throw std::invalid_argument("eps_ref must sit below the schedule");

    const std::size_t K = eps_schedule.size();
    std::vector<std::vector<double>> sup(K, std::vector<double>(N, 0.0));
    std::vector<std::vector<double>> sxg(K, std::vector<double>(N, -1.0));
    parallel_for(N, [&](std::int64_t i) {
        auto p = simulate_levy(mech, PathBudget::horizon(s), dt, eps_ref,
                               seed_split(seed, 6, i), false);
        double sx_ref = -1.0;
        for (std::size_t q = 0; q < p.values.size(); ++q)
            if (p.values[q] <= -x_probe) {
                sx_ref = q * dt;
                break;
            }
        for (std::size_t k = 0; k < K; ++k) {
            const double eps = eps_schedule[k];
            const double m1 =
                mech.pi.is_zero() ? 0.0 : mech.pi.moment1(eps_ref, eps);
            double removed = 0.0, worst = 0.0, sx_k = -1.0;
            std::size_t j = 0;
            for (std::size_t q = 0; q < p.values.size(); ++q) {
                while (j < p.jumps.size() &&
                       p.jumps[j].index == static_cast<std::int64_t>(q)) {
                    if (p.jumps[j].z <= eps) removed += p.jumps[j].z;
                    ++j;
                }
                double diff = removed - q * dt * m1;
                worst = std::max(worst, std::abs(diff));
                if (sx_k < 0.0 && p.values[q] - diff <= -x_probe)
                    sx_k = q * dt;
            }
            sup[k][i] = worst;
            if (sx_ref >= 0.0 && sx_k >= 0.0)
                sxg[k][i] = std::abs(sx_k - sx_ref);
        }
    }, workers);

    TruncationReport out;
    out.pass = true;
    double prev_mean = kInf, prev_se = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        TruncationStep st;
        st.eps = eps_schedule[k];
        double m = 0.0, v = 0.0;
        for (std::int64_t i = 0; i < N; ++i) m += sup[k][i];
        m /= N;
        for (std::int64_t i = 0; i < N; ++i) {
            double d = sup[k][i] - m;
            v += d * d;
        }
        double se = N > 1 ? std::sqrt(v / (N - 1.0) / N) : 0.0;
        st.mean_sup_diff = m;
        st.stderr_ = se;
        st.envelope =
            mech.pi.is_zero()
                ? 0.0
                : 2.0 * std::sqrt(s * mech.pi.moment2(0.0, st.eps));
        double gm = 0.0, gv = 0.0;
        std::int64_t gn = 0;
        for (std::int64_t i = 0; i < N; ++i)
            if (sxg[k][i] >= 0.0) {
                gm += sxg[k][i];
                ++gn;
            }
        if (gn > 0) gm /= gn;
        for (std::int64_t i = 0; i < N; ++i)
            if (sxg[k][i] >= 0.0) {
                double d = sxg[k][i] - gm;
                gv += d * d;
            }
        st.mean_sx_gap = gm;
        st.sx_stderr = gn > 1 ? std::sqrt(gv / (gn - 1.0) / gn) : 0.0;
        st.pass = st.mean_sup_diff <= st.envelope + 3.0 * st.stderr_;
        // monotone decrease within noise across the schedule
        if (k > 0 && m > prev_mean + 3.0 * (se + prev_se)) st.pass = false;
        prev_mean = m;
        prev_se = se;
        out.pass = out.pass && st.pass;
        out.steps.push_back(st);
    }
    return out;
}

}  // namespace hl
