#include "heightlab/levypath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hl {

PathBudget PathBudget::horizon(double s_max) {
    if (!(s_max > 0.0)) throw std::invalid_argument("horizon must be > 0");
    PathBudget b;
    b.s_max = s_max;
    return b;
}

PathBudget PathBudget::first_passage(double x, double cap) {
    if (!(x > 0.0)) throw std::invalid_argument("x_target must be > 0");
    if (!(cap > 0.0)) throw std::invalid_argument("hard cap must be > 0");
    PathBudget b;
    b.is_first_passage = true;
    b.x_target = x;
    b.s_max = cap;
    return b;
}

LevyPath simulate_levy(const Mechanism& mech, const PathBudget& budget,
                       double dt, double eps_sim, std::uint64_t seed,
                       bool small_jump_gaussian) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(eps_sim > 0.0)) throw std::invalid_argument("eps_sim must be > 0");

    const bool has_jumps = !mech.pi.is_zero();
    LevyMeasure::Sampler sampler;
    double rate = 0.0, comp = 0.0, small_sd = 0.0;
    if (has_jumps) {
        sampler = mech.pi.sampler(eps_sim);
        rate = sampler.rate();
        if (dt * rate > 10.0)
            throw std::invalid_argument(
                "jump rate overflow: dt * pi(eps,inf) > 10; decrease dt or "
                "increase eps_sim");
        comp = mech.pi.moment1(eps_sim);
        if (small_jump_gaussian)
            small_sd = std::sqrt(mech.pi.moment2(0.0, eps_sim));
    }

    LevyPath path;
    path.dt = dt;
    path.eps_sim = eps_sim;
    path.alpha = mech.alpha;
    path.beta = mech.beta;
    path.compensator = comp;

    const auto max_steps =
        static_cast<std::size_t>(std::ceil(budget.s_max / dt));
    path.values.reserve(std::min<std::size_t>(max_steps + 1, 1u << 22));
    path.values.push_back(0.0);

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::poisson_distribution<long> poisson(std::max(dt * rate, 1e-300));

    const double sigma = std::sqrt(2.0 * mech.beta * dt);
    const double small_scale = small_sd * std::sqrt(dt);
    const double drift = -(mech.alpha + comp) * dt;
    double v = 0.0;
    for (std::size_t i = 0; i < max_steps; ++i) {
        double xi = gauss(rng);
        double inc = drift + sigma * xi;
        double sn = 0.0;
        if (small_scale > 0.0) sn = small_scale * gauss(rng);
        if (rate > 0.0) {
            long nj = poisson(rng);
            for (long k = 0; k < nj; ++k) {
                double z = sampler.draw(rng);
                path.jumps.push_back(
                    {static_cast<std::int64_t>(i) + 1, z});
                inc += z;
            }
        }
        v += inc + sn;
        path.values.push_back(v);
        path.xi.push_back(xi);
        path.small_noise.push_back(sn);
        if (budget.is_first_passage && v <= -budget.x_target) break;
    }
    return path;
}

std::vector<double> reconstruct_values(const LevyPath& path) {
    std::vector<double> out;
    out.reserve(path.values.size());
    out.push_back(path.values.empty() ? 0.0 : path.values.front());
    const double sigma = std::sqrt(2.0 * path.beta * path.dt);
    const double drift = -(path.alpha + path.compensator) * path.dt;
    std::size_t j = 0;
    double v = out.front();
    for (std::size_t i = 0; i < path.steps(); ++i) {
        double inc = drift + sigma * path.xi[i] + path.small_noise[i];
        while (j < path.jumps.size() &&
               path.jumps[j].index == static_cast<std::int64_t>(i) + 1) {
            inc += path.jumps[j].z;
            ++j;
        }
        v += inc;
        out.push_back(v);
    }
    return out;
}

LaplaceCheck laplace_check(const Mechanism& mech, double s, double lambda,
                           int n_paths, double dt, double eps_sim,
                           std::uint64_t seed) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    LaplaceCheck out;
    out.target = std::exp(s * psi(mech, lambda));
    double acc = 0.0, acc2 = 0.0;
    auto budget = PathBudget::horizon(s);
    for (int i = 0; i < n_paths; ++i) {
        auto p = simulate_levy(mech, budget, dt, eps_sim,
                               seed_split(seed, 0, i));
        double w = std::exp(-lambda * p.values.back());
        acc += w;
        acc2 += w * w;
    }
    out.empirical = acc / n_paths;
    double var = std::max(0.0, acc2 / n_paths - out.empirical * out.empirical);
    out.stderror = std::sqrt(var / n_paths);
    return out;
}

std::optional<double> first_passage_time(const LevyPath& path, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("x must be > 0");
    std::size_t j = 0;
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        if (path.values[i] <= -x) {
            bool jump_here = false;
            while (j < path.jumps.size() &&
                   path.jumps[j].index < static_cast<std::int64_t>(i))
                ++j;
            if (j < path.jumps.size() &&
                path.jumps[j].index == static_cast<std::int64_t>(i))
                jump_here = true;
            if (i == 0) return 0.0;
            if (jump_here) return i * path.dt;
            double a = path.values[i - 1], b = path.values[i];
            double w = (a - (-x)) / (a - b);
            return (i - 1 + w) * path.dt;
        }
    }
    return std::nullopt;
}

namespace {

struct Piece {
    std::vector<double> xi;
    std::vector<double> values;  // value after each step; start point excluded
    std::vector<Jump> jumps;     // index k means values[k-1] includes the jump
};

struct InjectCtx {
    double dt;
    double drift;  // -(alpha + int z pi) per step, premultiplied by dt
    double sigma;  // sqrt(2 beta dt)
    double mass;   // total mass of pi
    const LevyMeasure::Sampler* sampler;
    std::size_t budget_steps;
    std::size_t used_steps = 0;
    int max_depth;
    Rng rng;
    std::normal_distribution<double> gauss{0.0, 1.0};
};

// Drifted-BM segment from `start` run until it reaches `stop`, with
// recursively injected excursions for each Poisson atom along the way.
Piece make_piece(InjectCtx& ctx, double start, double stop, int depth) {
    if (depth > ctx.max_depth)
        throw std::runtime_error("inject_construct: recursion depth cap");
    Piece base;
    double v = start;
    while (v > stop) {
        if (++ctx.used_steps > ctx.budget_steps)
            throw std::runtime_error("inject_construct: step budget exceeded");
        double xi = ctx.gauss(ctx.rng);
        v += ctx.drift + ctx.sigma * xi;
        base.xi.push_back(xi);
        base.values.push_back(v);
    }
    if (ctx.mass <= 0.0 || base.values.empty()) return base;

    double duration = base.values.size() * ctx.dt;
    std::poisson_distribution<long> pois(duration * ctx.mass);
    long n_atoms = pois(ctx.rng);
    if (n_atoms == 0) return base;

    std::vector<std::pair<std::size_t, double>> atoms(n_atoms);
    std::uniform_int_distribution<std::size_t> uidx(0, base.values.size() - 1);
    for (auto& a : atoms) a = {uidx(ctx.rng), ctx.sampler->draw(ctx.rng)};
    std::sort(atoms.begin(), atoms.end());

    // Splice excursions left to right.  Each excursion returns slightly below
    // its splice level (grid overshoot); the continuation is shifted down by
    // that overshoot so every stored increment stays intact.
    Piece out;
    std::size_t pos = 0;  // next base index to copy
    double delta = 0.0;
    auto copy_base = [&](std::size_t upto) {
        for (; pos < upto; ++pos) {
            out.xi.push_back(base.xi[pos]);
            out.values.push_back(base.values[pos] + delta);
        }
    };
    for (const auto& [idx, z] : atoms) {
        copy_base(idx + 1);
        double level = base.values[idx] + delta;
        Piece exc = make_piece(ctx, level + z, level, depth + 1);
        out.jumps.push_back(
            {static_cast<std::int64_t>(out.values.size()) + 1, z});
        for (const auto& j : exc.jumps)
            out.jumps.push_back(
                {j.index + static_cast<std::int64_t>(out.values.size()), j.z});
        out.xi.insert(out.xi.end(), exc.xi.begin(), exc.xi.end());
        out.values.insert(out.values.end(), exc.values.begin(),
                          exc.values.end());
        double end = exc.values.empty() ? level + z : exc.values.back();
        delta = end - base.values[idx];
    }
    copy_base(base.values.size());
    return out;
}

}  // namespace

LevyPath inject_construct(const Mechanism& mech, double x, double dt,
                          std::uint64_t seed, double cap, int max_depth) {
    if (!(x > 0.0)) throw std::invalid_argument("x must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    double mass = mech.pi.tail_mass(0.0);
    if (!std::isfinite(mass))
        throw std::invalid_argument(
            "inject_construct requires a finite Levy measure");

    InjectCtx ctx{dt,
                  0.0,
                  std::sqrt(2.0 * mech.beta * dt),
                  mass,
                  nullptr,
                  static_cast<std::size_t>(cap / dt),
                  0,
                  max_depth,
                  Rng(seed)};
    double m1 = mass > 0.0 ? mech.pi.moment1(0.0) : 0.0;
    ctx.drift = -(mech.alpha + m1) * dt;
    LevyMeasure::Sampler sampler;
    if (mass > 0.0) {
        sampler = mech.pi.sampler(0.0);
        ctx.sampler = &sampler;
    }

    Piece piece = make_piece(ctx, 0.0, -x, 0);

    LevyPath path;
    path.dt = dt;
    path.eps_sim = 0.0;
    path.alpha = mech.alpha;
    path.beta = mech.beta;
    path.compensator = m1;
    path.values.reserve(piece.values.size() + 1);
    path.values.push_back(0.0);
    path.values.insert(path.values.end(), piece.values.begin(),
                       piece.values.end());
    path.xi = std::move(piece.xi);
    path.jumps = std::move(piece.jumps);
    path.small_noise.assign(path.xi.size(), 0.0);
    return path;
}

}  // namespace hl
