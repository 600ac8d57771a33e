#include "msle/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msle/errors.hpp"

namespace msle {

double backward_stability_constant(double delta, double T) {
    return std::sqrt(1.0 + 4.0 * T / (delta * delta));
}

PointwiseBound check_backward_stability(const DrivingForces& f1, const DrivingForces& f2,
                                        std::span<const Complex> zs, double delta, double slack,
                                        EvolveOptions opts) {
    for (const Complex& z : zs)
        if (z.imag() < delta) throw DomainViolation("probe point below Im z >= delta");
    const double bound = backward_stability_constant(delta, f1.grid.horizon) *
                         DrivingForces::force_distance(f1, f2);
    const auto h1 = backward_batch(zs, f1, f1.grid.n_steps, opts);
    const auto h2 = backward_batch(zs, f2, f2.grid.n_steps, opts);
    PointwiseBound r;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const double margin = bound - std::abs(h1[i] - h2[i]);
        r.worst_margin = std::min(r.worst_margin, margin);
        ++r.n_checked;
        if (margin < -slack) ++r.n_violations;
    }
    return r;
}

KoebeResult koebe_check(const std::function<Complex(Complex)>& f, Complex z, Complex w, double r,
                        double dist_to_boundary, double rel_tol) {
    if (!(r > 0.0) || !(r < 1.0)) throw DomainViolation("koebe radius must satisfy 0 < r < 1");
    if (std::abs(z - w) > r * dist_to_boundary)
        throw DomainViolation("koebe check needs |z - w| <= r * dist(z, boundary)");
    const double h = 1e-6 * dist_to_boundary;
    KoebeResult out;
    out.derivative = std::abs(f(z + h) - f(z - h)) / (2.0 * h);
    const double sep = std::abs(z - w);
    out.value = std::abs(f(z) - f(w));
    out.lower = out.derivative * sep / ((1.0 + r) * (1.0 + r));
    out.upper = out.derivative * sep / ((1.0 - r) * (1.0 - r));
    out.lower_ok = out.value >= out.lower * (1.0 - rel_tol);
    out.upper_ok = out.value <= out.upper * (1.0 + rel_tol);
    return out;
}

DerivativeProbe derivative_probe(const DrivingForces& forces, std::span<const double> zetas,
                                 std::span<const double> deltas, EvolveOptions opts) {
    DerivativeProbe probe;
    probe.max_ratio = -std::numeric_limits<double>::infinity();
    for (double delta : deltas) {
        if (!(delta > 0.0) || delta >= 1.0)
            throw ConfigError("probe heights must lie in (0, 1) for the exponent estimate");
        const double h = 1e-6 * delta;
        for (double zeta : zetas) {
            const Complex z(zeta, delta);
            const Complex fp = backward_evolve(z + h, forces, forces.grid.n_steps, opts);
            const Complex fm = backward_evolve(z - h, forces, forces.grid.n_steps, opts);
            const double deriv = std::abs(fp - fm) / (2.0 * h);
            const double ratio = std::log(deriv) / std::log(1.0 / delta);
            probe.samples.push_back({zeta, delta, deriv, ratio});
            probe.max_ratio = std::max(probe.max_ratio, ratio);
        }
    }
    // smallest valid exponent, floored away from 0 so theta stays in (0,1)
    probe.theta_hat = std::max(probe.max_ratio, 0.01);
    probe.hypothesis_ok = probe.theta_hat < 1.0;
    return probe;
}

double hull_bound_rhs(double T, double epsilon, double theta) {
    return 8.0 * std::pow(T * epsilon, 0.5 * (1.0 - theta)) +
           3.0 * std::sqrt(epsilon * (1.0 + epsilon));
}

HausdorffReport check_hull_stability(const HullPolyline& a, const HullPolyline& b, double epsilon,
                                     const DerivativeProbe& probe, double T) {
    HausdorffReport rep;
    rep.epsilon = epsilon;
    rep.theta_hat = probe.theta_hat;
    rep.hypothesis_verified = probe.hypothesis_ok;
    rep.d_h = hausdorff_distance(a, b);
    rep.rhs = hull_bound_rhs(T, epsilon, probe.theta_hat);
    rep.pass = rep.hypothesis_verified && rep.d_h <= rep.rhs;
    return rep;
}

} // namespace msle
