#pragma once

#include <cstdint>
#include <vector>

#include "heightlab/levypath.hpp"

namespace hl {

// Incremental state for the one-pass height computation: one entry per jump
// whose clamp (z + running min - X_r)+ is still positive somewhere.  Entries
// are ordered by jump index and their running minima are weakly increasing
// bottom-to-top, so a new low only touches a suffix.
class ExplorationStack {
  public:
    struct Entry {
        double barrier;  // X_r - z; the clamp dies when the min reaches it
        double min;      // running min of X over [r, now]
        double clamp;    // (min - barrier)+, cached
    };

    // Advances to the next grid value.  `jumps` are the sizes binned to this
    // grid index (applied before the within-step diffusion move).
    template <class It>
    void advance(double value, It jumps_begin, It jumps_end) {
        if (!started_) {
            started_ = true;
            global_min_ = value;
        }
        // new low: update the suffix of entries whose min exceeds it
        std::size_t i = entries_.size();
        while (i > 0 && entries_[i - 1].min > value) {
            Entry& e = entries_[--i];
            double nc = value > e.barrier ? value - e.barrier : 0.0;
            clamp_sum_ += nc - e.clamp;
            e.clamp = nc;
            e.min = value;
        }
        while (!entries_.empty() && entries_.back().clamp <= 0.0) {
            clamp_sum_ -= entries_.back().clamp;
            entries_.pop_back();
        }
        if (value < global_min_) global_min_ = value;
        for (It it = jumps_begin; it != jumps_end; ++it) {
            double z = *it;
            entries_.push_back({value - z, value, z});
            clamp_sum_ += z;
        }
        value_ = value;
    }

    void advance(double value) {
        const double* none = nullptr;
        advance(value, none, none);
    }

    double clamp_total() const { return clamp_sum_ < 0.0 ? 0.0 : clamp_sum_; }
    double global_min() const { return global_min_; }
    // beta * H at the current grid point
    double beta_height() const {
        double h = value_ - global_min_ - clamp_total();
        return h > 0.0 ? h : 0.0;
    }
    std::size_t depth() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

  private:
    std::vector<Entry> entries_;
    double clamp_sum_ = 0.0;
    double global_min_ = 0.0;
    double value_ = 0.0;
    bool started_ = false;
};

// Height trajectory on the same grid as its source path.  boundary_shift is
// the discrete-monitoring continuity correction 0.5826 sqrt(2 beta dt)/beta:
// the grid running minimum misses sub-step dips of that expected size, so
// occupation estimators read H + boundary_shift when binning levels.
struct HeightPath {
    double dt = 0.0;
    double beta = 1.0;
    double boundary_shift = 0.0;
    std::vector<double> values;
};

// One-pass construction of beta H_s = X_s - inf X - sum of jump clamps.
HeightPath height_from_path(const LevyPath& path, double beta);

// O(n^2) oracle evaluating the defining formula directly.
HeightPath height_brute_force(const LevyPath& path, double beta);

// Sum over jumps with index <= s_index and size in (z_low, z_high] of
// (z + inf_{[r,s]} X - X_r)+, by direct backward-minimum evaluation.
double clamp_sum(const LevyPath& path, std::int64_t s_index, double z_low,
                 double z_high);

}  // namespace hl
