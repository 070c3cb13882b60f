#include "heightlab/interact.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hl {

double GirsanovWeight::weight() const { return std::exp(logweight); }

InteractResult simulate_interacting_height(const InteractConfig& cfg,
                                           std::uint64_t seed) {
    if (!(cfg.dt > 0.0) || !(cfg.eps_sim > 0.0) || !(cfg.delta_t > 0.0) ||
        !(cfg.beta > 0.0) || !(cfg.cap > 0.0))
        throw std::invalid_argument("invalid interact config");
    if (!(cfg.x_target > 0.0))
        throw std::invalid_argument("x_target must be > 0");
    if (!(cfg.a > 0.0)) throw std::invalid_argument("a must be > 0");
    if (!cfg.f.f || !cfg.f.fprime)
        throw std::invalid_argument("interaction f and f' required");
    if (!std::is_sorted(cfg.x_marks.begin(), cfg.x_marks.end()))
        throw std::invalid_argument("x_marks must be sorted");

    const bool has_jumps = !cfg.pi.is_zero();
    LevyMeasure::Sampler sampler;
    double rate = 0.0, comp = 0.0, small_sd = 0.0;
    if (has_jumps) {
        sampler = cfg.pi.sampler(cfg.eps_sim);
        rate = sampler.rate();
        if (cfg.dt * rate > 10.0)
            throw std::invalid_argument("jump rate overflow");
        comp = cfg.pi.moment1(cfg.eps_sim);
        if (cfg.small_jump_gaussian)
            small_sd = std::sqrt(cfg.pi.moment2(0.0, cfg.eps_sim));
    }

    InteractResult out;
    LevyPath& p = out.path;
    p.dt = cfg.dt;
    p.eps_sim = cfg.eps_sim;
    p.alpha = 0.0;  // the varying feedback drift is not representable here
    p.beta = cfg.beta;
    p.compensator = comp;
    p.values.push_back(0.0);

    HeightPath& h = out.height;
    h.dt = cfg.dt;
    h.beta = cfg.beta;
    h.boundary_shift = 0.5826 * std::sqrt(2.0 * cfg.beta * cfg.dt) / cfg.beta;

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::poisson_distribution<long> poisson(std::max(cfg.dt * rate, 1e-300));

    const double sigma = std::sqrt(2.0 * cfg.beta * cfg.dt);
    const double small_scale = small_sd * std::sqrt(cfg.dt);
    const auto max_steps =
        static_cast<std::size_t>(std::ceil(cfg.cap / cfg.dt));

    LocalTimeGrid feedback(cfg.delta_t);  // point-mass bins, feedback lookup
    LocalTimeGrid occu(cfg.delta_t);      // chord bins, reported field
    ExplorationStack stack;
    std::vector<double> zbuf;
    stack.advance(0.0);
    h.values.push_back(0.0);

    std::size_t mark = 0;
    double v = 0.0, hprev = 0.0;
    for (std::size_t i = 0; i < max_steps; ++i) {
        double hr = h.values.back();
        double c = cfg.f.fprime(feedback.level_estimate(hr + h.boundary_shift)) +
                   reflection_drift(hr, cfg.a);
        feedback.add(hr + h.boundary_shift, cfg.dt);

        double xi = gauss(rng);
        double inc = (c - comp) * cfg.dt + sigma * xi;
        double sn = small_scale > 0.0 ? small_scale * gauss(rng) : 0.0;
        zbuf.clear();
        if (rate > 0.0) {
            long nj = poisson(rng);
            for (long k = 0; k < nj; ++k) {
                double z = sampler.draw(rng);
                p.jumps.push_back({static_cast<std::int64_t>(i) + 1, z});
                zbuf.push_back(z);
                inc += z;
            }
        }
        v += inc + sn;
        p.values.push_back(v);
        p.xi.push_back(xi);
        p.small_noise.push_back(sn);

        stack.advance(v, zbuf.begin(), zbuf.end());
        hprev = h.values.back();
        h.values.push_back(stack.beta_height() / cfg.beta);
        occu.add_segment(hprev + h.boundary_shift,
                         h.values.back() + h.boundary_shift, cfg.dt);

        while (mark < cfg.x_marks.size() && v <= -cfg.x_marks[mark]) {
            LevelSnapshot snap;
            snap.x = cfg.x_marks[mark];
            snap.reached = true;
            snap.time = (i + 1) * cfg.dt;
            snap.field = occu.estimates();
            out.snapshots.push_back(std::move(snap));
            ++mark;
        }
        if (v <= -cfg.x_target) break;
    }
    for (; mark < cfg.x_marks.size(); ++mark)
        out.snapshots.push_back({cfg.x_marks[mark], false, 0.0, {}});

    out.field = occu.estimates();
    out.passage = first_passage_Sx(p, cfg.x_target);
    return out;
}

GirsanovWeight girsanov_weight(const LevyPath& path, const HeightPath& h,
                               const InteractionFn& f, double a, double x,
                               double delta_t, double n_guard) {
    if (path.xi.size() + 1 != path.values.size())
        throw std::invalid_argument("reference path lacks noise increments");
    if (h.values.size() != path.values.size())
        throw std::invalid_argument("height/path grid mismatch");
    if (!(x > 0.0)) throw std::invalid_argument("x must be > 0");

    GirsanovWeight w;
    LocalTimeGrid feedback(delta_t);
    const double sqdt = std::sqrt(path.dt);
    for (std::size_t i = 0; i + 1 < path.values.size(); ++i) {
        if (path.values[i] <= -x) {
            w.frozen = true;
            w.s_index = static_cast<std::int64_t>(i);
            break;
        }
        double hr = h.values[i] + h.boundary_shift;
        double c = f.fprime(feedback.level_estimate(hr)) +
                   reflection_drift(h.values[i], a);
        feedback.add(hr, path.dt);
        w.term_db += c * sqdt * path.xi[i];
        w.term_qv += c * c * path.dt;
        if (n_guard != kInf && feedback.level_estimate(hr) > n_guard) {
            w.frozen = true;
            w.s_index = static_cast<std::int64_t>(i);
            break;
        }
    }
    if (!w.frozen && !path.values.empty() && path.values.back() <= -x) {
        w.frozen = true;
        w.s_index = static_cast<std::int64_t>(path.values.size()) - 1;
    }
    w.logweight = w.term_db / std::sqrt(2.0 * path.beta) -
                  w.term_qv / (4.0 * path.beta);
    return w;
}

double sn_guard(const HeightPath& h, double delta_t, double n) {
    if (!(n >= 0.0)) throw std::invalid_argument("n must be >= 0");
    LocalTimeGrid grid(delta_t);
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        double hr = h.values[i] + h.boundary_shift;
        grid.add(hr, h.dt);
        if (grid.level_estimate(hr) > n) return i * h.dt;
    }
    return h.values.empty() ? 0.0 : (h.values.size() - 1) * h.dt;
}

}  // namespace hl
