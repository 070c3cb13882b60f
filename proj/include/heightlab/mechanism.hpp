#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "heightlab/rng.hpp"

namespace hl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Atom {
    double z;     // jump size, > 0
    double mass;  // > 0
};

// A Levy measure pi on (0, inf) with int (z^2 ^ z) pi(dz) < inf.  Four
// families: the zero measure, finitely many atoms, a power-law density
// c z^{-1-a} with a in (1,2) (optionally cut off above), and a gamma-type
// density c z^p e^{-eta z}.
class LevyMeasure {
  public:
    enum class Kind { Zero, FiniteAtoms, TruncatedStable, ExponentialDensity };

    static LevyMeasure zero();
    static LevyMeasure atoms(std::vector<Atom> atoms);
    static LevyMeasure truncated_stable(double index, double scale,
                                        double cutoff = kInf);
    static LevyMeasure exponential_density(double rate, double scale,
                                           double power);

    Kind kind() const { return kind_; }
    bool is_zero() const;
    bool is_finite() const;  // total mass pi(0, inf) < inf

    // pi(eps, inf); eps = 0 allowed for finite measures.
    double tail_mass(double eps) const;
    // int_{(lo, hi]} z pi(dz) and int_{(lo, hi]} z^2 pi(dz).
    double moment1(double lo, double hi = kInf) const;
    double moment2(double lo, double hi = kInf) const;
    // int_{(lo, inf)} (e^{-lambda z} - 1 + lambda z) pi(dz).
    double psi_integral(double lambda, double lo = 0.0) const;

    // Draws from pi restricted to (eps, inf), normalized.  rate() is the
    // corresponding total mass pi(eps, inf).
    class Sampler {
      public:
        double rate() const { return rate_; }
        double draw(Rng& rng) const;

      private:
        friend class LevyMeasure;
        double rate_ = 0.0;
        double eps_ = 0.0;
        Kind kind_ = Kind::Zero;
        // FiniteAtoms: retained atoms with cumulative masses.
        std::vector<double> sizes_, cum_;
        // TruncatedStable: closed-form inversion parameters.
        double a_ = 0.0, lo_pow_ = 0.0, hi_pow_ = 0.0;
        // ExponentialDensity: tabulated CDF on a log-spaced size grid.
        std::vector<double> zs_, cdf_;
    };
    Sampler sampler(double eps) const;

    const std::vector<Atom>& atom_list() const { return atoms_; }

  private:
    LevyMeasure() = default;
    void validate_integrability() const;
    double density(double z) const;  // for the density variants
    double comp_density(double z, double lambda) const;

    Kind kind_ = Kind::Zero;
    std::vector<Atom> atoms_;
    double stable_index_ = 0.0, stable_scale_ = 0.0, stable_cutoff_ = kInf;
    double exp_rate_ = 0.0, exp_scale_ = 0.0, exp_power_ = 0.0;
};

// Branching-mechanism triple (alpha, beta, pi).
struct Mechanism {
    double alpha = 0.0;  // linear drift coefficient
    double beta = 1.0;   // diffusion coefficient, > 0
    LevyMeasure pi = LevyMeasure::zero();
    bool subcritical = true;  // asserts alpha >= 0 (no drift to +inf)

    Mechanism(double alpha_, double beta_, LevyMeasure pi_,
              bool subcritical_ = true);
};

// psi(lambda) = alpha lambda + beta lambda^2 + int (e^{-lz} - 1 + lz) pi(dz).
double psi(const Mechanism& mech, double lambda);
// As above with pi restricted to (eps, inf).
double psi_truncated(const Mechanism& mech, double lambda, double eps);
// Phi = psi^{-1}, by bisection on [0, sqrt(u/beta)].
double phi(const Mechanism& mech, double u);

// Interaction drift f with derivative f'.  f(0) = 0 and f' <= theta.
struct InteractionFn {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
    double theta = 0.0;
    double b = kInf;  // localization threshold; inf if f' already bounded
};

InteractionFn linear_interaction(double alpha);            // f(z) = -alpha z
InteractionFn logistic_interaction(double c1, double c2);  // c1 z - c2 z^2
InteractionFn polynomial_interaction(std::vector<double> coeffs);  // sum c_k z^{k+1}

// f_b: equal to f on [0, b]; on [b, b+1] the derivative blends to the
// constant f'(b) through a C^1 cosine taper, and stays constant beyond b+1.
InteractionFn localize(const InteractionFn& f, double b);

enum class Extinction { ExtinctAS, NotExtinctAS, Inconclusive };
const char* to_string(Extinction e);

// Decides whether int_1^inf exp(-(1/beta) int_1^u f(r)/r dr) du diverges.
Extinction extinction_criterion(const InteractionFn& f, double beta);

}  // namespace hl
