#pragma once

#include <functional>
#include <span>
#include <vector>

#include "msle/hausdorff.hpp"
#include "msle/loewner.hpp"

namespace msle {

// C(delta, T) = sqrt(1 + 4T/delta^2): Lipschitz constant of the backward
// chains in the driving forces, valid on {Im z >= delta}.
double backward_stability_constant(double delta, double T);

struct PointwiseBound {
    std::size_t n_checked = 0;
    std::size_t n_violations = 0;
    double worst_margin = 0.0; // min over checks of (bound - observed)
};

// |h1(T,z) - h2(T,z)| <= C(delta,T) * sum_j sup |V1_j - V2_j| for Im z >= delta.
PointwiseBound check_backward_stability(const DrivingForces& f1, const DrivingForces& f2,
                                        std::span<const Complex> zs, double delta,
                                        double slack = 0.0, EvolveOptions opts = {});

struct KoebeResult {
    double value = 0.0;       // |f(z) - f(w)|
    double lower = 0.0;       // |f'(z)| |z-w| / (1+r)^2
    double upper = 0.0;       // |f'(z)| |z-w| / (1-r)^2
    double derivative = 0.0;  // |f'(z)| by central difference
    bool lower_ok = false;
    bool upper_ok = false;
    bool pass() const { return lower_ok && upper_ok; }
};

// Distortion bounds for a conformal map with dist(z, boundary) = d and
// |z - w| <= r d. Derivative by central finite difference with step 1e-6 d;
// rel_tol absorbs the finite-difference error.
KoebeResult koebe_check(const std::function<Complex(Complex)>& f, Complex z, Complex w, double r,
                        double dist_to_boundary, double rel_tol = 1e-4);

struct DerivativeProbe {
    double theta_hat = 0.0;
    double max_ratio = 0.0; // max over probes of log|f'| / log(1/delta)
    bool hypothesis_ok = false; // theta_hat in (0,1)
    struct Sample {
        double zeta, delta, derivative, ratio;
    };
    std::vector<Sample> samples;
};

// |f'(zeta + i delta)| for f = h_T (the inverse map), probed over the given
// real anchors and heights. theta_hat is the smallest exponent with
// |f'| <= delta^{-theta} at every probe.
DerivativeProbe derivative_probe(const DrivingForces& forces, std::span<const double> zetas,
                                 std::span<const double> deltas, EvolveOptions opts = {});

struct HausdorffReport {
    double d_h = 0.0;
    double rhs = 0.0; // 8 (T eps)^{(1-theta)/2} + 3 sqrt(eps (1+eps))
    double theta_hat = 0.0;
    double epsilon = 0.0;
    bool hypothesis_verified = false;
    bool pass = false;
};

double hull_bound_rhs(double T, double epsilon, double theta);

HausdorffReport check_hull_stability(const HullPolyline& a, const HullPolyline& b, double epsilon,
                                     const DerivativeProbe& probe, double T);

} // namespace msle
