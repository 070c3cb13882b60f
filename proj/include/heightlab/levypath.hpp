#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "heightlab/mechanism.hpp"
#include "heightlab/rng.hpp"

namespace hl {

struct Jump {
    std::int64_t index;  // grid index whose value includes this jump
    double z;            // size, > eps_sim
};

// Discretized cadlag trajectory of the spectrally positive Levy process X on
// a uniform grid.  values[i] is X at time i*dt and includes any jump binned
// to index i.  Per step i -> i+1:
//   values[i+1] - values[i] = -alpha*dt - compensator*dt
//                             + sqrt(2*beta*dt) * xi[i]
//                             + small_noise[i] + (sum of jumps at index i+1)
// which reconstructs the array bit-exactly from the stored components.
struct LevyPath {
    double dt = 0.0;
    double eps_sim = 0.0;
    double alpha = 0.0;
    double beta = 1.0;
    double compensator = 0.0;  // int_{eps_sim}^inf z pi(dz) per unit time
    std::vector<double> values;
    std::vector<Jump> jumps;            // ordered by index
    std::vector<double> xi;             // N(0,1) draws of the diffusion part
    std::vector<double> small_noise;    // realized small-jump correction
    std::size_t steps() const { return xi.size(); }
};

// Either a fixed time horizon or first-passage below -x with a hard cap.
struct PathBudget {
    static PathBudget horizon(double s_max);
    static PathBudget first_passage(double x, double cap);

    bool is_first_passage = false;
    double s_max = 0.0;   // fixed horizon, or hard cap in passage mode
    double x_target = 0.0;
};

// Euler grid simulation of X: Gaussian diffusion with variance 2*beta*dt per
// step, Poisson(dt * pi(eps,inf)) retained jumps with compensating drift, an
// optional Gaussian substitute for jumps below eps_sim (variance
// dt * int_0^eps z^2 pi), and deterministic drift -alpha per unit time.
LevyPath simulate_levy(const Mechanism& mech, const PathBudget& budget,
                       double dt, double eps_sim, std::uint64_t seed,
                       bool small_jump_gaussian = true);

// Rebuilds values from the stored components; used by the reconstruction
// invariant tests and manifest digests.
std::vector<double> reconstruct_values(const LevyPath& path);

struct LaplaceCheck {
    double empirical = 0.0;
    double target = 0.0;
    double stderror = 0.0;
};

// Compares the empirical mean of e^{-lambda X_s} with e^{s psi(lambda)}.
LaplaceCheck laplace_check(const Mechanism& mech, double s, double lambda,
                           int n_paths, double dt, double eps_sim,
                           std::uint64_t seed);

// Smallest grid time with X <= -x, linearly interpolated inside the crossing
// step when no jump is binned to it.  nullopt when never reached.
std::optional<double> first_passage_time(const LevyPath& path, double x);

// Recursive excursion-injection construction of X stopped at S_x, for finite
// pi: a drifted-BM first-passage path plus Poisson-spawned spliced
// excursions, each started one jump size above its splice point and stopped
// on return.  Drifted pieces use drift -(alpha + int z pi(dz)).
LevyPath inject_construct(const Mechanism& mech, double x, double dt,
                          std::uint64_t seed, double cap = 1e4,
                          int max_depth = 200);

}  // namespace hl
