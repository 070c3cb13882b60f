#include "heightlab/csbp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hl {

PopulationPath simulate_csbp(const InteractionFn& f, const Mechanism& mech,
                             std::vector<double> x_list, double horizon,
                             double dt_pop, double eps_sim,
                             std::uint64_t seed) {
    if (!(dt_pop > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("dt_pop and horizon must be > 0");
    if (x_list.empty() || !std::is_sorted(x_list.begin(), x_list.end()) ||
        x_list.front() <= 0.0)
        throw std::invalid_argument("x_list must be sorted positive");
    const double rate = mech.pi.is_zero() ? 0.0 : mech.pi.tail_mass(eps_sim);
    if (dt_pop * (f.theta + rate) >= 0.1)
        throw std::invalid_argument(
            "dt_pop too large for theta + jump rate");

    const double comp = mech.pi.is_zero() ? 0.0
                                          : mech.pi.moment1(eps_sim, kInf);
    const double small_var =
        mech.pi.is_zero() ? 0.0 : mech.pi.moment2(0.0, eps_sim);
    auto sampler = mech.pi.sampler(eps_sim);

    const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / dt_pop));
    const std::size_t m = x_list.size();

    PopulationPath out;
    out.dt_pop = dt_pop;
    out.x_list = x_list;
    out.increments.resize(m);
    out.absorbed.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        out.increments[i].reserve(n_steps + 1);
        out.increments[i].push_back(i == 0 ? x_list[0]
                                           : x_list[i] - x_list[i - 1]);
    }

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> prev(m);
    for (std::size_t k = 0; k < n_steps; ++k) {
        for (std::size_t i = 0; i < m; ++i) prev[i] = out.increments[i].back();
        double z_below = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double v = prev[i];
            double next = 0.0;
            if (v > 0.0) {
                next = v + (f.f(z_below + v) - f.f(z_below)) * dt_pop -
                       comp * v * dt_pop;
                next += std::sqrt(2.0 * mech.beta * v * dt_pop) * gauss(rng);
                if (rate > 0.0) {
                    std::poisson_distribution<int> pois(rate * v * dt_pop);
                    int nj = pois(rng);
                    for (int q = 0; q < nj; ++q) next += sampler.draw(rng);
                }
                if (small_var > 0.0)
                    next += std::sqrt(small_var * v * dt_pop) * gauss(rng);
                if (next < 0.0) next = 0.0;
            }
            if (next == 0.0 && v > 0.0) out.absorbed[i] = 1;
            out.increments[i].push_back(next);
            z_below += v;
        }
    }
    return out;
}

IncrementReport increment_law_check(const InteractionFn& f,
                                    const Mechanism& mech, double x, double y,
                                    double t, std::int64_t n_paths,
                                    double dt_pop, double eps_sim,
                                    std::uint64_t seed) {
    if (!(x > 0.0) || !(y >= 0.0))
        throw std::invalid_argument("need x > 0, y >= 0");
    std::vector<double> zs, vs;
    zs.reserve(n_paths);
    vs.reserve(n_paths);
    for (std::int64_t r = 0; r < n_paths; ++r) {
        std::vector<double> xl = {x};
        if (y > 0.0) xl.push_back(x + y);
        auto p = simulate_csbp(f, mech, xl, t, dt_pop, eps_sim,
                               seed_split(seed, 0, static_cast<std::uint32_t>(r)));
        std::size_t last = p.steps() - 1;
        zs.push_back(p.increments[0][last]);
        vs.push_back(y > 0.0 ? p.increments[1][last] : 0.0);
    }
    IncrementReport rep;
    rep.n = n_paths;
    const double n = static_cast<double>(n_paths);
    double mz = 0.0, mv = 0.0;
    for (std::int64_t i = 0; i < n_paths; ++i) {
        mz += zs[i];
        mv += vs[i];
    }
    mz /= n;
    mv /= n;
    double szz = 0.0, szv = 0.0, svv = 0.0;
    for (std::int64_t i = 0; i < n_paths; ++i) {
        szz += (zs[i] - mz) * (zs[i] - mz);
        szv += (zs[i] - mz) * (vs[i] - mv);
        svv += (vs[i] - mv) * (vs[i] - mv);
    }
    rep.mean_z = mz;
    rep.mean_v = mv;
    rep.var_v = svv / (n - 1.0);
    rep.mean_v_stderr = std::sqrt(rep.var_v / n);
    if (szz > 0.0) {
        rep.slope = szv / szz;
        // residual variance of the OLS fit
        double rss = 0.0;
        for (std::int64_t i = 0; i < n_paths; ++i) {
            double e = vs[i] - mv - rep.slope * (zs[i] - mz);
            rss += e * e;
        }
        rep.slope_stderr = std::sqrt(rss / (n - 2.0) / szz);
    }
    return rep;
}

double laplace_ode(const Mechanism& mech, double lambda, double t,
                   int n_steps) {
    if (!(lambda >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("need lambda, t >= 0");
    double u = lambda;
    const double h = t / n_steps;
    auto rhs = [&](double v) { return v > 0.0 ? -psi(mech, v) : 0.0; };
    for (int k = 0; k < n_steps; ++k) {
        double k1 = rhs(u);
        double k2 = rhs(u + 0.5 * h * k1);
        double k3 = rhs(u + 0.5 * h * k2);
        double k4 = rhs(u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (u < 0.0) u = 0.0;
    }
    return u;
}

}  // namespace hl
