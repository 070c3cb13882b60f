#pragma once

#include <cstdint>
#include <vector>

#include "heightlab/mechanism.hpp"
#include "heightlab/rng.hpp"

namespace hl {

// Coupled population field across initial masses 0 < x_1 < ... < x_n.
// increments[i] holds V^{(i)} on the time grid; Z^{x_i} = sum_{j <= i} V^{(j)}.
struct PopulationPath {
    double dt_pop = 0.0;
    std::vector<double> x_list;
    std::vector<std::vector<double>> increments;  // [i][step]
    std::vector<char> absorbed;                   // V^{(i)} hit 0

    std::size_t steps() const {
        return increments.empty() ? 0 : increments[0].size();
    }
    // Z^{x_i} at grid step k.
    double z(std::size_t i, std::size_t k) const {
        double tot = 0.0;
        for (std::size_t j = 0; j <= i; ++j) tot += increments[j][k];
        return tot;
    }
};

// Euler scheme for the coupled increment SDEs.  Each step, for each increment
// V with Z_below the total of the lower increments at the previous step:
//   drift   [f(Z_below + V) - f(Z_below)] dt - dt V int_{eps}^inf z pi(dz)
//   noise   sqrt(2 beta V dt) xi, independent across increments
//   jumps   Poisson(dt V pi(eps, inf)) sizes from the truncated measure
//   small   Gaussian with variance dt V int_0^eps z^2 pi(dz)
// Negative values are clipped to 0, which is absorbing since f(0) = 0 and the
// diffusion and jump rates vanish with V.
PopulationPath simulate_csbp(const InteractionFn& f, const Mechanism& mech,
                             std::vector<double> x_list, double horizon,
                             double dt_pop, double eps_sim,
                             std::uint64_t seed);

struct IncrementReport {
    double mean_v = 0.0;      // mean of V = Z^{x+y} - Z^x at time t
    double var_v = 0.0;
    double mean_z = 0.0;      // mean of Z^x at time t
    double slope = 0.0;       // OLS regression of V on Z^x
    double slope_stderr = 0.0;
    double mean_v_stderr = 0.0;
    std::int64_t n = 0;
};

// Joint simulation of (Z^x, Z^{x+y} - Z^x) over n_paths replicates, with the
// increment's conditional-mean regression on Z^x (zero slope in the linear
// case, nonzero admissible otherwise).
IncrementReport increment_law_check(const InteractionFn& f,
                                    const Mechanism& mech, double x, double y,
                                    double t, std::int64_t n_paths,
                                    double dt_pop, double eps_sim,
                                    std::uint64_t seed);

// u_t solving u' = -psi(u), u_0 = lambda, by classic RK4; oracle for the
// Laplace transform E e^{-lambda Z^x_t} = e^{-x u_t} in the linear case.
double laplace_ode(const Mechanism& mech, double lambda, double t,
                   int n_steps = 2000);

}  // namespace hl
