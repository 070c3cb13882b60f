#include "heightlab/mechanism.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace hl {

namespace {

// tanh-sinh handles the z -> 0 endpoint singularity of the density variants
template <class F>
double integrate(F&& f, double lo, double hi) {
    if (hi <= lo) return 0.0;
    boost::math::quadrature::tanh_sinh<double> quad;
    double err = 0.0, l1 = 0.0;
    double v = quad.integrate(std::forward<F>(f), lo, hi, 1e-10, &err, &l1);
    if (!(err <= 1e-6))
        throw std::runtime_error(
            "quadrature did not converge, relative residual estimate " +
            std::to_string(err));
    return v;
}

// e^{-x} - 1 + x, stable for small x.
double expm1_compensated(double x) {
    if (std::abs(x) < 1e-4) return 0.5 * x * x * (1.0 - x / 3.0);
    return std::expm1(-x) + x;
}

}  // namespace

LevyMeasure LevyMeasure::zero() { return LevyMeasure(); }

LevyMeasure LevyMeasure::atoms(std::vector<Atom> atoms) {
    LevyMeasure m;
    m.kind_ = Kind::FiniteAtoms;
    for (const auto& a : atoms)
        if (!(a.z > 0.0) || !(a.mass > 0.0))
            throw std::invalid_argument("atoms need z > 0 and mass > 0");
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.z < b.z; });
    m.atoms_ = std::move(atoms);
    return m;
}

LevyMeasure LevyMeasure::truncated_stable(double index, double scale,
                                          double cutoff) {
    if (!(index > 1.0 && index < 2.0))
        throw std::invalid_argument("stable index must lie in (1,2)");
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be > 0");
    if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be > 0");
    LevyMeasure m;
    m.kind_ = Kind::TruncatedStable;
    m.stable_index_ = index;
    m.stable_scale_ = scale;
    m.stable_cutoff_ = cutoff;
    m.validate_integrability();
    return m;
}

LevyMeasure LevyMeasure::exponential_density(double rate, double scale,
                                             double power) {
    if (!(rate > 0.0)) throw std::invalid_argument("rate must be > 0");
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be > 0");
    if (!(power > -3.0))
        throw std::invalid_argument(
            "power must be > -3 so that z^2 is integrable at 0");
    LevyMeasure m;
    m.kind_ = Kind::ExponentialDensity;
    m.exp_rate_ = rate;
    m.exp_scale_ = scale;
    m.exp_power_ = power;
    m.validate_integrability();
    return m;
}

bool LevyMeasure::is_zero() const {
    return kind_ == Kind::Zero || (kind_ == Kind::FiniteAtoms && atoms_.empty());
}

bool LevyMeasure::is_finite() const {
    switch (kind_) {
        case Kind::Zero:
        case Kind::FiniteAtoms:
            return true;
        case Kind::TruncatedStable:
            return false;  // density blows up at 0
        case Kind::ExponentialDensity:
            return exp_power_ > -1.0;
    }
    return false;
}

// (e^{-lambda z} - 1 + lambda z) * density(z), stable near z = 0 where the
// naive product is 0 * inf.
double LevyMeasure::comp_density(double z, double lambda) const {
    double lz = lambda * z;
    if (lz < 1e-4) {
        double pref = 0.5 * lambda * lambda * (1.0 - lz / 3.0);
        switch (kind_) {
            case Kind::TruncatedStable:
                return z <= stable_cutoff_
                           ? pref * stable_scale_ *
                                 std::pow(z, 1.0 - stable_index_)
                           : 0.0;
            case Kind::ExponentialDensity:
                return pref * exp_scale_ * std::pow(z, 2.0 + exp_power_) *
                       std::exp(-exp_rate_ * z);
            default:
                break;
        }
    }
    return expm1_compensated(lz) * density(z);
}

double LevyMeasure::density(double z) const {
    switch (kind_) {
        case Kind::TruncatedStable:
            return z <= stable_cutoff_
                       ? stable_scale_ * std::pow(z, -1.0 - stable_index_)
                       : 0.0;
        case Kind::ExponentialDensity:
            return exp_scale_ * std::pow(z, exp_power_) *
                   std::exp(-exp_rate_ * z);
        default:
            return 0.0;
    }
}

void LevyMeasure::validate_integrability() const {
    // int (z^2 ^ z) pi(dz) split at 1.
    double v = moment2(0.0, 1.0) + moment1(1.0, kInf);
    if (!std::isfinite(v))
        throw std::invalid_argument("int (z^2 ^ z) pi(dz) is not finite");
}

double LevyMeasure::tail_mass(double eps) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::FiniteAtoms: {
            double s = 0.0;
            for (const auto& a : atoms_)
                if (a.z > eps) s += a.mass;
            return s;
        }
        case Kind::TruncatedStable: {
            if (eps <= 0.0) return kInf;
            double a = stable_index_;
            double lo = std::min(eps, stable_cutoff_);
            double hi_term = std::isinf(stable_cutoff_)
                                 ? 0.0
                                 : std::pow(stable_cutoff_, -a);
            return stable_scale_ / a * (std::pow(lo, -a) - hi_term);
        }
        case Kind::ExponentialDensity: {
            if (eps <= 0.0 && exp_power_ <= -1.0) return kInf;
            double hi = (35.0 + std::max(0.0, exp_power_) * 20.0) / exp_rate_;
            if (eps >= hi) hi = eps * 2.0 + 35.0 / exp_rate_;
            return integrate([this](double z) { return density(z); },
                             std::max(eps, 0.0), hi);
        }
    }
    return 0.0;
}

double LevyMeasure::moment1(double lo, double hi) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::FiniteAtoms: {
            double s = 0.0;
            for (const auto& a : atoms_)
                if (a.z > lo && a.z <= hi) s += a.z * a.mass;
            return s;
        }
        case Kind::TruncatedStable: {
            double a = stable_index_;
            double u = std::min(hi, stable_cutoff_);
            if (u <= lo) return 0.0;
            if (lo <= 0.0) return kInf;
            // int z * c z^{-1-a} = c (lo^{1-a} - u^{1-a}) / (a-1)
            double ut = std::isinf(u) ? 0.0 : std::pow(u, 1.0 - a);
            return stable_scale_ * (std::pow(lo, 1.0 - a) - ut) / (a - 1.0);
        }
        case Kind::ExponentialDensity: {
            if (lo <= 0.0 && exp_power_ <= -2.0) return kInf;
            double cap = (40.0 + std::max(0.0, exp_power_ + 1.0) * 20.0) /
                         exp_rate_;
            double u = std::min(hi, std::max(cap, lo * 2.0));
            return integrate([this](double z) { return z * density(z); },
                             std::max(lo, 0.0), u);
        }
    }
    return 0.0;
}

double LevyMeasure::moment2(double lo, double hi) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::FiniteAtoms: {
            double s = 0.0;
            for (const auto& a : atoms_)
                if (a.z > lo && a.z <= hi) s += a.z * a.z * a.mass;
            return s;
        }
        case Kind::TruncatedStable: {
            double a = stable_index_;
            double u = std::min(hi, stable_cutoff_);
            if (u <= lo) return 0.0;
            double l = std::max(lo, 0.0);
            // int z^2 c z^{-1-a} = c (u^{2-a} - lo^{2-a}) / (2-a)
            if (std::isinf(u)) return kInf;
            return stable_scale_ *
                   (std::pow(u, 2.0 - a) - std::pow(l, 2.0 - a)) / (2.0 - a);
        }
        case Kind::ExponentialDensity: {
            double cap = (45.0 + std::max(0.0, exp_power_ + 2.0) * 20.0) /
                         exp_rate_;
            double u = std::min(hi, std::max(cap, lo * 2.0));
            return integrate([this](double z) { return z * z * density(z); },
                             std::max(lo, 0.0), u);
        }
    }
    return 0.0;
}

double LevyMeasure::psi_integral(double lambda, double lo) const {
    if (lambda == 0.0) return 0.0;
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::FiniteAtoms: {
            double s = 0.0;
            for (const auto& a : atoms_)
                if (a.z > lo) s += a.mass * expm1_compensated(lambda * a.z);
            return s;
        }
        case Kind::TruncatedStable: {
            auto f = [this, lambda](double z) {
                return comp_density(z, lambda);
            };
            double cut = stable_cutoff_;
            // near part: full integrand on (lo, m0)
            double m0 = std::clamp(std::max(1.0, 2.0 / lambda), lo, cut);
            double v = integrate(f, lo, m0);
            if (m0 < cut) {
                // far part: (e^{-lz} - 1 + lz) = (lz - 1) + e^{-lz};
                // the polynomial piece integrates in closed form.
                double a = stable_index_, c = stable_scale_;
                double cut_p1 = std::isinf(cut) ? 0.0 : std::pow(cut, 1.0 - a);
                double cut_p0 = std::isinf(cut) ? 0.0 : std::pow(cut, -a);
                v += lambda * c * (std::pow(m0, 1.0 - a) - cut_p1) / (a - 1.0);
                v -= c * (std::pow(m0, -a) - cut_p0) / a;
                double damp_hi = std::min(cut, m0 + 80.0 / lambda);
                v += integrate(
                    [this, lambda](double z) {
                        return std::exp(-lambda * z) * density(z);
                    },
                    m0, damp_hi);
            }
            return v;
        }
        case Kind::ExponentialDensity: {
            double hi = (45.0 + std::max(0.0, exp_power_ + 2.0) * 20.0) /
                        exp_rate_;
            auto f = [this, lambda](double z) {
                return comp_density(z, lambda);
            };
            double mid = std::clamp(1.0, lo, hi);
            return integrate(f, lo, mid) + integrate(f, mid, hi);
        }
    }
    return 0.0;
}

LevyMeasure::Sampler LevyMeasure::sampler(double eps) const {
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
    Sampler s;
    s.kind_ = kind_;
    s.eps_ = eps;
    s.rate_ = tail_mass(eps);
    if (!std::isfinite(s.rate_))
        throw std::invalid_argument("pi(eps, inf) must be finite to sample");
    if (s.rate_ <= 0.0) {
        s.rate_ = 0.0;
        return s;
    }
    switch (kind_) {
        case Kind::Zero:
            break;
        case Kind::FiniteAtoms: {
            double c = 0.0;
            for (const auto& a : atoms_) {
                if (a.z <= eps) continue;
                c += a.mass;
                s.sizes_.push_back(a.z);
                s.cum_.push_back(c);
            }
            break;
        }
        case Kind::TruncatedStable: {
            s.a_ = stable_index_;
            s.lo_pow_ = std::pow(eps, -s.a_);
            s.hi_pow_ = std::isinf(stable_cutoff_)
                            ? 0.0
                            : std::pow(stable_cutoff_, -s.a_);
            break;
        }
        case Kind::ExponentialDensity: {
            // CDF tabulated on a fine log-spaced grid; draws bisect it.
            double hi = (50.0 + std::max(0.0, exp_power_) * 20.0) / exp_rate_ +
                        eps;
            const int kGrid = 8192;
            s.zs_.resize(kGrid + 1);
            s.cdf_.resize(kGrid + 1);
            double lz0 = std::log(std::max(eps, 1e-300)), lz1 = std::log(hi);
            if (eps <= 0.0) lz0 = std::log(hi) - 30.0;
            for (int i = 0; i <= kGrid; ++i)
                s.zs_[i] = std::exp(lz0 + (lz1 - lz0) * i / kGrid);
            s.cdf_[0] = 0.0;
            for (int i = 1; i <= kGrid; ++i) {
                double a = s.zs_[i - 1], b = s.zs_[i];
                s.cdf_[i] = s.cdf_[i - 1] +
                            0.5 * (density(a) + density(b)) * (b - a);
            }
            break;
        }
    }
    return s;
}

double LevyMeasure::Sampler::draw(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    switch (kind_) {
        case Kind::Zero:
            throw std::logic_error("cannot draw from the zero measure");
        case Kind::FiniteAtoms: {
            double u = unif(rng) * rate_;
            auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
            std::size_t i = std::min<std::size_t>(it - cum_.begin(),
                                                  sizes_.size() - 1);
            return sizes_[i];
        }
        case Kind::TruncatedStable: {
            double u = unif(rng);
            return std::pow(lo_pow_ - u * (lo_pow_ - hi_pow_), -1.0 / a_);
        }
        case Kind::ExponentialDensity: {
            double target = unif(rng) * cdf_.back();
            auto it = std::lower_bound(cdf_.begin(), cdf_.end(), target);
            std::size_t i = it == cdf_.begin() ? 1 : it - cdf_.begin();
            i = std::min(i, cdf_.size() - 1);
            double c0 = cdf_[i - 1], c1 = cdf_[i];
            double w = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
            return zs_[i - 1] + w * (zs_[i] - zs_[i - 1]);
        }
    }
    return 0.0;
}

Mechanism::Mechanism(double alpha_, double beta_, LevyMeasure pi_,
                     bool subcritical_)
    : alpha(alpha_), beta(beta_), pi(std::move(pi_)), subcritical(subcritical_) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (subcritical && alpha < 0.0)
        throw std::invalid_argument(
            "alpha must be >= 0 unless the subcriticality flag is cleared");
}

double psi(const Mechanism& mech, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    return mech.alpha * lambda + mech.beta * lambda * lambda +
           mech.pi.psi_integral(lambda);
}

double psi_truncated(const Mechanism& mech, double lambda, double eps) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    return mech.alpha * lambda + mech.beta * lambda * lambda +
           mech.pi.psi_integral(lambda, eps);
}

double phi(const Mechanism& mech, double u) {
    if (!(u >= 0.0)) throw std::invalid_argument("u must be >= 0");
    if (!mech.subcritical && mech.alpha < 0.0)
        throw std::invalid_argument("phi requires monotone psi (alpha >= 0)");
    if (u == 0.0) return 0.0;
    // psi(sqrt(u/beta)) >= beta * (u/beta) = u, so the root is bracketed.
    double lo = 0.0, hi = std::sqrt(u / mech.beta);
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        (psi(mech, mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

InteractionFn linear_interaction(double alpha) {
    InteractionFn fn;
    fn.f = [alpha](double z) { return -alpha * z; };
    fn.fprime = [alpha](double) { return -alpha; };
    fn.theta = -alpha;
    fn.b = kInf;
    return fn;
}

InteractionFn logistic_interaction(double c1, double c2) {
    InteractionFn fn;
    fn.f = [c1, c2](double z) { return c1 * z - c2 * z * z; };
    fn.fprime = [c1, c2](double z) { return c1 - 2.0 * c2 * z; };
    fn.theta = c2 >= 0.0 ? c1 : kInf;
    fn.b = kInf;
    return fn;
}

InteractionFn polynomial_interaction(std::vector<double> coeffs) {
    InteractionFn fn;
    auto f = [coeffs](double z) {
        double v = 0.0, p = z;
        for (double c : coeffs) {
            v += c * p;
            p *= z;
        }
        return v;
    };
    auto fp = [coeffs](double z) {
        double v = 0.0, p = 1.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            v += coeffs[k] * (double)(k + 1) * p;
            p *= z;
        }
        return v;
    };
    fn.f = f;
    fn.fprime = fp;
    // crude bound over a scan grid; callers with a known bound can overwrite
    double th = -kInf;
    for (int i = 0; i <= 4000; ++i) th = std::max(th, fp(i * 0.01));
    fn.theta = th;
    fn.b = kInf;
    return fn;
}

InteractionFn localize(const InteractionFn& fn, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("b must be > 0");
    if (std::isinf(b)) return fn;
    auto f = fn.f;
    auto fp = fn.fprime;
    double dpb = fp(b);
    // Derivative: f' on [0,b]; on [b,b+1] the convex blend
    // w(z) f'(z) + (1-w(z)) f'(b) with w = (1+cos(pi (z-b)))/2; f'(b) beyond.
    auto gprime = [fp, b, dpb](double z) {
        if (z <= b) return fp(z);
        if (z >= b + 1.0) return dpb;
        double w = 0.5 * (1.0 + std::cos(M_PI * (z - b)));
        return w * fp(z) + (1.0 - w) * dpb;
    };
    // Value by fixed-order Gauss-Legendre on the blend window.
    auto blend_int = [gprime, b](double z) {
        static const double xs[] = {-0.9061798459386640, -0.5384693101056831,
                                    0.0, 0.5384693101056831,
                                    0.9061798459386640};
        static const double ws[] = {0.2369268850561891, 0.4786286704993665,
                                    0.5688888888888889, 0.4786286704993665,
                                    0.2369268850561891};
        double acc = 0.0;
        const int pieces = 8;
        double step = (z - b) / pieces;
        for (int p = 0; p < pieces; ++p) {
            double a0 = b + p * step, a1 = a0 + step;
            double hh = 0.5 * (a1 - a0), cc = 0.5 * (a0 + a1);
            for (int i = 0; i < 5; ++i)
                acc += ws[i] * gprime(cc + hh * xs[i]) * hh;
        }
        return acc;
    };
    double fb = f(b);
    double fb1 = fb + blend_int(b + 1.0);
    InteractionFn out;
    out.f = [f, b, fb, fb1, blend_int, dpb](double z) {
        if (z <= b) return f(z);
        if (z <= b + 1.0) return fb + blend_int(z);
        return fb1 + dpb * (z - b - 1.0);
    };
    out.fprime = gprime;
    out.theta = fn.theta;
    out.b = b;
    return out;
}

const char* to_string(Extinction e) {
    switch (e) {
        case Extinction::ExtinctAS:
            return "ExtinctAS";
        case Extinction::NotExtinctAS:
            return "NotExtinctAS";
        default:
            return "Inconclusive";
    }
}

Extinction extinction_criterion(const InteractionFn& fn, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    // Walk u along a geometric grid, accumulating
    //   A(u) = int_1^u f(r)/r dr   and   I(U) = int_1^U exp(-A(u)/beta) du
    // by the trapezoid rule.  Divergence is declared when the partial
    // integral passes 1e6; convergence when the integrand decays below
    // u^{-2} over the whole last decade of the grid.
    const double kDiverged = 1e6;
    const double kUmax = 1e7;
    const double ratio = 1.005;
    double u = 1.0;
    double inner = 0.0;  // A(u)
    double partial = 0.0;
    double g_prev = 1.0;  // integrand at u
    bool decayed = true;
    double decade_start = kUmax / 10.0;
    while (u < kUmax) {
        double u_next = u * ratio;
        double slope_mid =
            0.5 * (fn.f(u) / u + fn.f(u_next) / u_next);
        inner += slope_mid * (u_next - u);
        double expo = -inner / beta;
        double g = expo > 700.0 ? kInf : std::exp(expo);
        partial += 0.5 * (g_prev + g) * (u_next - u);
        if (partial > kDiverged) return Extinction::ExtinctAS;
        if (u_next >= decade_start && !(g < 1.0 / (u_next * u_next)))
            decayed = false;
        g_prev = g;
        u = u_next;
    }
    if (decayed) return Extinction::NotExtinctAS;
    return Extinction::Inconclusive;
}

}  // namespace hl
