#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "heightlab/interact.hpp"
#include "heightlab/mechanism.hpp"

namespace hl {

// Worker count: explicit argument, else HEIGHTLAB_WORKERS, else hardware.
int resolve_workers(int requested = 0);

// Deterministic replicate-parallel loop: body(i) may only touch slot i of any
// preallocated output, so the merge order never depends on scheduling.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body,
                  int workers = 0);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

KsResult ks_two_sample(const std::vector<double>& a,
                       const std::vector<double>& b, int n_permutations,
                       std::uint64_t seed);

// Per-coordinate sample set of one ensemble plus its provenance.
struct EnsembleSummary {
    std::vector<double> coords;  // checkpoint levels / times
    std::vector<std::vector<double>> samples;  // [coord][replicate]
    std::vector<double> mean, variance, stderr_;
    std::int64_t n = 0;
    double reached_fraction = 1.0;
    std::uint64_t seed = 0;
    double dt = 0.0, delta_t = 0.0;

    void finalize();  // fills mean/variance/stderr from samples
};

struct Tolerances {
    double z_max = 3.0;    // mean-difference z-score clause
    double bias = 0.05;    // additive allowance on the mean clause
    double ks_max = 0.05;  // KS-statistic clause
};

struct CoordComparison {
    std::string name;
    double coord = 0.0;
    double mean_a = 0.0, mean_b = 0.0;
    double zscore = 0.0;  // |mean_a - mean_b| relative to combined stderr
    double mean_gap = 0.0;
    double ks = 0.0, p_value = 1.0;
    bool pass = false;
};

struct ComparisonReport {
    std::vector<CoordComparison> coords;
    EnsembleSummary a, b;  // samples retained for serialization / re-tests
    Tolerances tol;
    bool pass = false;
    std::string label;

    void evaluate(int n_permutations, std::uint64_t seed);
};

std::string comparison_report_json(const ComparisonReport& rep);
std::string comparison_report_text(const ComparisonReport& rep);

// Linear Ray-Knight pipeline: level field of H at S_x vs the CSBP of the
// same mechanism.  Aborts when fewer than 90% of either ensemble's
// replicates reach their stopping rule.
ComparisonReport ray_knight_linear(const Mechanism& mech, double x,
                                   std::vector<double> levels, std::int64_t N,
                                   double dt, double eps_sim, double delta_t,
                                   std::uint64_t seed, double cap,
                                   double dt_pop, Tolerances tol = {},
                                   int workers = 0);

// Interacting Ray-Knight pipeline: coupled height runs stopped at successive
// S_x for x in x_list vs the coupled population field with the same f_b.
// Compares the marginals at each (x, level) and the increment marginals
// between consecutive x.
ComparisonReport ray_knight_interacting(const InteractConfig& cfg,
                                        std::vector<double> x_list,
                                        std::vector<double> levels,
                                        std::int64_t N, std::uint64_t seed,
                                        double dt_pop, Tolerances tol = {},
                                        int workers = 0);

struct BoundCheck {
    std::string kind;  // "passage", "clamp_one", "clamp_mass"
    double s = 0.0, param = 0.0, param2 = 0.0;
    double empirical = 0.0, stderr_ = 0.0, bound = 0.0;
    bool pass = false;
};

struct BoundReport {
    std::vector<BoundCheck> checks;
    bool pass = false;
};

// One-sided concentration checks against the closed-form envelopes with
// c = (1 - e^{-1})^{-1}:
//   P(-inf X_s <= x)       <= min(c x / sqrt(beta s), 1)
//   E (z + inf X_s)+       <= min(c z^2 / (2 sqrt(beta s)), z)
//   E clamp mass over (a,b] <= ((c sqrt(s/beta)) v s) int_(a,b] z^z^2 pi
BoundReport bound_suite(const Mechanism& mech, std::vector<double> s_grid,
                        std::vector<double> x_grid, std::vector<double> z_grid,
                        std::int64_t N, double dt, double eps_sim,
                        std::uint64_t seed, int workers = 0);

struct TruncationStep {
    double eps = 0.0;
    double mean_sup_diff = 0.0, stderr_ = 0.0;
    double envelope = 0.0;  // 2 sqrt(s int_0^eps z^2 pi)
    double mean_sx_gap = 0.0, sx_stderr = 0.0;  // E |S_x^eps - S_x^ref|
    bool pass = false;
};

struct TruncationReport {
    std::vector<TruncationStep> steps;
    bool pass = false;
};

// Common-randomness coupling across the truncation schedule: one reference
// path per replicate at eps_ref below the whole schedule (small-jump
// Gaussian off), each coarser path obtained by deleting its jumps below eps
// and undoing their compensator.
TruncationReport truncation_convergence(const Mechanism& mech,
                                        std::vector<double> eps_schedule,
                                        double s, std::int64_t N, double dt,
                                        double eps_ref, double x_probe,
                                        std::uint64_t seed, int workers = 0);

}  // namespace hl
