#include "heightlab/loctime.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hl {

LocalTimeGrid::LocalTimeGrid(double delta_t) : delta_t_(delta_t) {
    if (!(delta_t > 0.0)) throw std::invalid_argument("delta_t must be > 0");
}

void LocalTimeGrid::add(double h, double dt) {
    if (h < 0.0) h = 0.0;
    auto bin = static_cast<std::size_t>(h / delta_t_);
    if (bin >= occupancy_.size()) occupancy_.resize(bin + 1, 0.0);
    occupancy_[bin] += dt;
    occupied_ += dt;
}

void LocalTimeGrid::add_segment(double h0, double h1, double dt) {
    if (h0 < 0.0) h0 = 0.0;
    if (h1 < 0.0) h1 = 0.0;
    double lo = std::min(h0, h1), hi = std::max(h0, h1);
    auto b0 = static_cast<std::size_t>(lo / delta_t_);
    auto b1 = static_cast<std::size_t>(hi / delta_t_);
    if (b1 >= occupancy_.size()) occupancy_.resize(b1 + 1, 0.0);
    if (b0 == b1 || !(hi > lo)) {
        occupancy_[b0] += dt;
        occupied_ += dt;
        return;
    }
    double inv_w = 1.0 / (hi - lo);
    double assigned = 0.0;
    for (std::size_t b = b0; b < b1; ++b) {
        double edge_lo = std::max(lo, b * delta_t_);
        double part = dt * ((b + 1) * delta_t_ - edge_lo) * inv_w;
        occupancy_[b] += part;
        assigned += part;
    }
    occupancy_[b1] += dt - assigned;
    occupied_ += dt;
}

double LocalTimeGrid::level_estimate(double h) const {
    if (h < 0.0) h = 0.0;
    auto bin = static_cast<std::size_t>(h / delta_t_);
    if (bin >= occupancy_.size()) return 0.0;
    return occupancy_[bin] / delta_t_;
}

std::vector<double> LocalTimeGrid::estimates() const {
    std::vector<double> out(occupancy_.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = occupancy_[i] / delta_t_;
    return out;
}

LocalTimeField local_time_occupation(const HeightPath& h, double delta_t,
                                     std::vector<double> checkpoints) {
    if (!(delta_t > 0.0)) throw std::invalid_argument("delta_t must be > 0");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw std::invalid_argument("checkpoints must be sorted");
    LocalTimeField out;
    out.delta_t = delta_t;
    out.checkpoints = checkpoints;
    LocalTimeGrid grid(delta_t);
    std::size_t step = 0;
    const std::size_t n_steps = h.values.empty() ? 0 : h.values.size() - 1;
    for (double c : checkpoints) {
        auto upto = std::min<std::size_t>(
            n_steps, static_cast<std::size_t>(std::floor(c / h.dt + 0.5)));
        for (; step < upto; ++step)
            grid.add_segment(h.values[step] + h.boundary_shift,
                             h.values[step + 1] + h.boundary_shift, h.dt);
        out.estimates.push_back(grid.estimates());
    }
    return out;
}

double local_time_tanaka(const LevyPath& path, const HeightPath& h, double t,
                         std::int64_t s_index) {
    if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
    if (s_index < 0 ||
        s_index >= static_cast<std::int64_t>(path.values.size()))
        throw std::invalid_argument("s_index out of range");
    double acc = path.beta * std::max(0.0, h.values[s_index] - t);
    for (std::int64_t i = 0; i < s_index; ++i)
        if (h.values[i] >= t) acc -= path.values[i + 1] - path.values[i];
    if (!path.jumps.empty()) {
        std::vector<double> suffix(s_index + 1);
        double m = path.values[s_index];
        for (std::int64_t r = s_index; r >= 0; --r) {
            m = std::min(m, path.values[r]);
            suffix[r] = m;
        }
        for (const auto& jp : path.jumps) {
            if (jp.index > s_index) break;
            if (h.values[jp.index] < t) continue;
            double c = jp.z + suffix[jp.index] - path.values[jp.index];
            if (c > 0.0) acc += c;
        }
    }
    return acc;
}

FirstPassageRecord first_passage_Sx(const LevyPath& path, double x) {
    FirstPassageRecord rec;
    rec.x = x;
    if (!(x > 0.0)) throw std::invalid_argument("x must be > 0");
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        if (path.values[i] <= -x) {
            rec.index = static_cast<std::int64_t>(i);
            rec.reached = true;
            rec.time = first_passage_time(path, x).value_or(i * path.dt);
            return rec;
        }
    }
    return rec;
}

std::vector<double> ltfield_at_Sx(const LevyPath& path, const HeightPath& h,
                                  double x, double delta_t) {
    auto rec = first_passage_Sx(path, x);
    if (!rec.reached)
        throw std::runtime_error("ltfield_at_Sx: first passage not reached");
    LocalTimeGrid grid(delta_t);
    for (std::int64_t i = 0; i < rec.index; ++i)
        grid.add_segment(h.values[i] + h.boundary_shift,
                         h.values[i + 1] + h.boundary_shift, h.dt);
    return grid.estimates();
}

double occupation_at_level(const HeightPath& h, double t, double delta_t,
                           std::int64_t s_index) {
    if (s_index < 0 || s_index >= static_cast<std::int64_t>(h.values.size()))
        throw std::invalid_argument("s_index out of range");
    double lo = std::max(0.0, t - 0.5 * delta_t);
    double hi = lo + delta_t;
    double acc = 0.0;
    for (std::int64_t i = 0; i < s_index; ++i) {
        double a = h.values[i] + h.boundary_shift;
        double b = h.values[i + 1] + h.boundary_shift;
        double sl = std::min(a, b), sh = std::max(a, b);
        if (sh < lo || sl >= hi) continue;
        if (sh > sl) {
            double ov = std::min(sh, hi) - std::max(sl, lo);
            if (ov > 0.0) acc += h.dt * ov / (sh - sl);
        } else {
            acc += h.dt;
        }
    }
    return acc / delta_t;
}

}  // namespace hl
