#pragma once

#include <cstdint>
#include <vector>

#include "heightlab/height.hpp"
#include "heightlab/levypath.hpp"

namespace hl {

// Accumulating level-binned occupation of H: bin j covers
// [j*delta_t, (j+1)*delta_t).  estimate(bin) = occupied time / delta_t.
class LocalTimeGrid {
  public:
    explicit LocalTimeGrid(double delta_t);

    void add(double h, double dt);
    // distributes dt along the chord from h0 to h1 proportionally to the
    // overlap with each level bin; keeps occupation conservation exact while
    // avoiding the boundary-bin inflation of point-mass binning
    void add_segment(double h0, double h1, double dt);
    // occupation-density estimate of the bin containing level h (floor bin);
    // the feedback drift reads this
    double level_estimate(double h) const;
    double occupied_time() const { return occupied_; }
    std::vector<double> estimates() const;
    double delta_t() const { return delta_t_; }

  private:
    double delta_t_;
    double occupied_ = 0.0;
    std::vector<double> occupancy_;  // raw time per bin
};

// Snapshots of the binned field at requested time checkpoints.
struct LocalTimeField {
    double delta_t = 0.0;
    std::vector<double> checkpoints;
    std::vector<std::vector<double>> estimates;  // [checkpoint][bin]
};

LocalTimeField local_time_occupation(const HeightPath& h, double delta_t,
                                     std::vector<double> checkpoints);

// Ito-Tanaka estimate of L^t(s):
//   beta (H_s - t)+ - sum_{steps, H_left >= t} dX
//   + sum_{jumps r <= s, H_r >= t} (z + inf_{[r,s]} X - X_r)+.
// The weak inequality in the indicators makes the t = 0 value equal to
// -inf X as a grid-level algebraic identity; for t > 0 it is an a.s. null
// modification.
double local_time_tanaka(const LevyPath& path, const HeightPath& h, double t,
                         std::int64_t s_index);

struct FirstPassageRecord {
    double x = 0.0;
    std::int64_t index = -1;  // grid index of the first value <= -x
    double time = 0.0;        // interpolated passage time
    bool reached = false;
};

FirstPassageRecord first_passage_Sx(const LevyPath& path, double x);

// Occupation-estimated level field {L^t(S_x)}_t over floor bins.
std::vector<double> ltfield_at_Sx(const LevyPath& path, const HeightPath& h,
                                  double x, double delta_t);

// Occupation estimate of L^t(s) with a window [t - delta/2, t + delta/2)
// centred at the level; used by the statistical comparisons so that levels
// sitting on bin edges are not biased to one side.
double occupation_at_level(const HeightPath& h, double t, double delta_t,
                           std::int64_t s_index);

}  // namespace hl
