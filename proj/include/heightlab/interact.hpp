#pragma once

#include <cstdint>
#include <vector>

#include "heightlab/height.hpp"
#include "heightlab/levypath.hpp"
#include "heightlab/loctime.hpp"
#include "heightlab/mechanism.hpp"

namespace hl {

// Reflection drift g_a(h) = -(h - a)+; a = inf disables it.
inline double reflection_drift(double h, double a) {
    return (a == kInf || h <= a) ? 0.0 : -(h - a);
}

struct InteractConfig {
    InteractionFn f;  // pass a localized f when f' is unbounded below
    double a = kInf;  // reflection-drift level
    double beta = 1.0;
    LevyMeasure pi = LevyMeasure::zero();
    double x_target = 1.0;  // simulation stops at S_{x_target}
    double dt = 1e-3;
    double eps_sim = 0.01;
    double delta_t = 0.02;  // feedback field bin width
    double cap = 1e3;       // time budget
    std::vector<double> x_marks;  // intermediate levels to snapshot, sorted
    bool small_jump_gaussian = true;
};

// Field snapshot taken the first time X <= -x.
struct LevelSnapshot {
    double x = 0.0;
    bool reached = false;
    double time = 0.0;
    std::vector<double> field;
};

struct InteractResult {
    LevyPath path;      // drifted X; xi and jumps retained
    HeightPath height;  // same grid
    std::vector<double> field;  // occupation field estimates at the stop time
    FirstPassageRecord passage;
    std::vector<LevelSnapshot> snapshots;  // one per x_mark
};

// Euler loop for the height process with local-time feedback drift
// c_r = f'(Lhat^{H_r}(r)) + g_a(H_r), evaluated from the left-limit field
// (occupation accumulated strictly before the current step).  X advances by
// c_r dt - compensator dt + sqrt(2 beta dt) xi + jumps; H is maintained by
// the exploration stack on the drifted path; stops at S_{x_target} or cap.
InteractResult simulate_interacting_height(const InteractConfig& cfg,
                                           std::uint64_t seed);

struct GirsanovWeight {
    double logweight = 0.0;
    double term_db = 0.0;  // sum c_r sqrt(dt) xi_r
    double term_qv = 0.0;  // sum c_r^2 dt
    bool frozen = false;   // hit S_x (or the local-time guard)
    std::int64_t s_index = -1;
    double weight() const;
};

// Reweighting route: replays a zero-drift reference bundle, rebuilding the
// same feedback field and drift sequence c_r, and accumulates
//   logweight = term_db / sqrt(2 beta) - term_qv / (4 beta)
// up to S_x of the reference path.  n_guard truncates accumulation at the
// first time the local-time estimate at the current height exceeds it.
GirsanovWeight girsanov_weight(const LevyPath& path, const HeightPath& h,
                               const InteractionFn& f, double a, double x,
                               double delta_t, double n_guard = kInf);

// First grid time at which the local-time estimate at the current height
// exceeds n (checked after the current step's accumulation).
double sn_guard(const HeightPath& h, double delta_t, double n);

}  // namespace hl
