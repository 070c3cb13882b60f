#include "heightlab/height.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hl {

HeightPath height_from_path(const LevyPath& path, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    HeightPath h;
    h.dt = path.dt;
    h.beta = beta;
    h.boundary_shift = 0.5826 * std::sqrt(2.0 * beta * path.dt) / beta;
    h.values.reserve(path.values.size());
    ExplorationStack stack;
    std::size_t j = 0;
    std::vector<double> zbuf;
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        zbuf.clear();
        while (j < path.jumps.size() &&
               path.jumps[j].index == static_cast<std::int64_t>(i)) {
            zbuf.push_back(path.jumps[j].z);
            ++j;
        }
        stack.advance(path.values[i], zbuf.begin(), zbuf.end());
        h.values.push_back(stack.beta_height() / beta);
    }
    return h;
}

HeightPath height_brute_force(const LevyPath& path, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    const std::size_t n = path.values.size();
    if (n > 100000)
        throw std::invalid_argument("height_brute_force: path too long");
    HeightPath h;
    h.dt = path.dt;
    h.beta = beta;
    h.boundary_shift = 0.5826 * std::sqrt(2.0 * beta * path.dt) / beta;
    h.values.resize(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        // walk r backwards keeping the running min of [r, s]; jumps are
        // sorted by index, so track them with a reverse cursor
        double m = path.values[s];
        double clamps = 0.0;
        std::int64_t jc = static_cast<std::int64_t>(path.jumps.size()) - 1;
        while (jc >= 0 &&
               path.jumps[jc].index > static_cast<std::int64_t>(s))
            --jc;
        for (std::size_t r = s + 1; r-- > 0;) {
            m = std::min(m, path.values[r]);
            while (jc >= 0 &&
                   path.jumps[jc].index == static_cast<std::int64_t>(r)) {
                double c = path.jumps[jc].z + m - path.values[r];
                if (c > 0.0) clamps += c;
                --jc;
            }
        }
        double bh = path.values[s] - m - clamps;  // m = inf over [0, s]
        h.values[s] = bh > 0.0 ? bh / beta : 0.0;
    }
    return h;
}

double clamp_sum(const LevyPath& path, std::int64_t s_index, double z_low,
                 double z_high) {
    if (!(z_low >= 0.0 && z_low < z_high))
        throw std::invalid_argument("need 0 <= z_low < z_high");
    if (s_index < 0 || s_index >= static_cast<std::int64_t>(path.values.size()))
        throw std::invalid_argument("s_index out of range");
    // suffix minima of values over [r, s_index]
    std::vector<double> suffix(s_index + 1);
    double m = path.values[s_index];
    for (std::int64_t r = s_index; r >= 0; --r) {
        m = std::min(m, path.values[r]);
        suffix[r] = m;
    }
    double acc = 0.0;
    for (const auto& jp : path.jumps) {
        if (jp.index > s_index) break;
        if (jp.z <= z_low || jp.z > z_high) continue;
        double c = jp.z + suffix[jp.index] - path.values[jp.index];
        if (c > 0.0) acc += c;
    }
    return acc;
}

}  // namespace hl
