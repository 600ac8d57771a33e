#include "msle/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msle/errors.hpp"
#include "msle/kernels.hpp"

namespace msle {

DrivingForces DrivingForces::from_dyson(const DysonPaths& paths) {
    DrivingForces f;
    f.grid = paths.grid;
    f.n_forces = paths.n_particles;
    f.values = paths.values;
    return f;
}

DrivingForces DrivingForces::constant(const TimeGrid& grid, const std::vector<double>& levels) {
    DrivingForces f;
    f.grid = grid;
    f.n_forces = levels.size();
    f.values.resize(grid.n_nodes() * levels.size());
    for (std::size_t i = 0; i < grid.n_nodes(); ++i)
        for (std::size_t j = 0; j < levels.size(); ++j) f.at(i, j) = levels[j];
    return f;
}

DrivingForces DrivingForces::shifted(double c) const {
    DrivingForces f = *this;
    for (double& v : f.values) v += c;
    return f;
}

DrivingForces DrivingForces::truncated(std::size_t node) const {
    DrivingForces f;
    f.grid = TimeGrid(grid.time(node), node);
    f.n_forces = n_forces;
    f.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>((node + 1) * n_forces));
    return f;
}

double DrivingForces::sup_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double DrivingForces::force_distance(const DrivingForces& a, const DrivingForces& b) {
    if (!a.grid.same_as(b.grid) || a.n_forces != b.n_forces)
        throw InvalidGrid("force distance requires matching grids and force counts");
    double total = 0.0;
    for (std::size_t j = 0; j < a.n_forces; ++j) {
        double sup = 0.0;
        for (std::size_t i = 0; i < a.grid.n_nodes(); ++i)
            sup = std::max(sup, std::abs(a.at(i, j) - b.at(i, j)));
        total += sup;
    }
    return total;
}

double default_trace_offset(double T) { return 1e-3 * std::sqrt(T); }

namespace {

// Force values at the three RK4 nodes of substep s within grid step i:
// linear interpolation between the nodes i and i+1.
void substep_forces(const DrivingForces& f, std::size_t i, int s, int n_sub, bool reversed,
                    std::size_t horizon_node, std::vector<double>& lam0, std::vector<double>& lamm,
                    std::vector<double>& lam1) {
    const std::size_t nf = f.n_forces;
    const double inv = 1.0 / static_cast<double>(n_sub);
    const double f0 = static_cast<double>(s) * inv;
    const double f1 = static_cast<double>(s + 1) * inv;
    const double fm = 0.5 * (f0 + f1);
    for (std::size_t j = 0; j < nf; ++j) {
        double va, vb;
        if (!reversed) {
            va = f.at(i, j);
            vb = f.at(i + 1, j);
        } else {
            // backward time s over step i means forward nodes k-i down to k-i-1
            va = f.at(horizon_node - i, j);
            vb = f.at(horizon_node - i - 1, j);
        }
        lam0[j] = va + (vb - va) * f0;
        lamm[j] = va + (vb - va) * fm;
        lam1[j] = va + (vb - va) * f1;
    }
}

} // namespace

// --- forward batch -------------------------------------------------------

ForwardBatch::ForwardBatch(std::span<const Complex> zs, const DrivingForces& forces,
                           EvolveOptions opts)
    : forces_(forces), opts_(opts) {
    const std::size_t n = zs.size();
    re_.resize(n);
    im_.resize(n);
    prev_im_.resize(n);
    min_dist_sq_.resize(n);
    swallowed_at_.assign(n, std::numeric_limits<double>::quiet_NaN());
    alive_.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(zs[i].imag() > 0.0)) throw DomainViolation("forward evolution needs Im z > 0");
        re_[i] = zs[i].real();
        im_[i] = zs[i].imag();
    }
    const double tol = opts.resolved_tol(forces.grid.dt);
    tol_sq_ = tol * tol;
    lam0_.resize(forces.n_forces);
    lamm_.resize(forces.n_forces);
    lam1_.resize(forces.n_forces);
}

bool ForwardBatch::all_alive() const {
    for (auto a : alive_)
        if (!a) return false;
    return true;
}

bool ForwardBatch::step() {
    if (node_ >= forces_.grid.n_steps) return false;
    const auto& K = kernels::active();
    const std::size_t n = re_.size();
    const double coeff = 2.0 / static_cast<double>(forces_.n_forces);
    const double h = forces_.grid.dt / static_cast<double>(opts_.n_sub);
    prev_im_ = im_;
    for (int s = 0; s < opts_.n_sub; ++s) {
        substep_forces(forces_, node_, s, opts_.n_sub, false, 0, lam0_, lamm_, lam1_);
        K.loewner_rk4_substep(re_.data(), im_.data(), alive_.data(), n, lam0_.data(), lamm_.data(),
                              lam1_.data(), forces_.n_forces, coeff, h, min_dist_sq_.data());
        const double t_sub = forces_.grid.time(node_) + static_cast<double>(s + 1) * h;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive_[i]) continue;
            if (min_dist_sq_[i] < tol_sq_ || !(im_[i] > 0.0) || !std::isfinite(re_[i])) {
                alive_[i] = 0;
                swallowed_at_[i] = t_sub;
            }
        }
    }
    // Im g must keep decreasing; a rise means the solver crossed a pole, which
    // only happens at the brink of absorption.
    for (std::size_t i = 0; i < n; ++i) {
        if (alive_[i] && im_[i] > prev_im_[i]) {
            alive_[i] = 0;
            swallowed_at_[i] = forces_.grid.time(node_ + 1);
        }
    }
    ++node_;
    return true;
}

MapTrajectory forward_evolve(Complex z, const DrivingForces& forces, EvolveOptions opts) {
    ForwardBatch batch(std::span<const Complex>(&z, 1), forces, opts);
    MapTrajectory traj;
    traj.start = z;
    traj.samples.push_back(z);
    while (batch.step()) {
        traj.samples.push_back(batch.value(0));
        if (!batch.alive()[0]) {
            traj.swallowed_at = batch.swallowed_at()[0];
            break;
        }
    }
    return traj;
}

// --- backward flow -------------------------------------------------------

namespace {

// Principal square root folded into the upper half plane.
inline Complex sqrt_upper(Complex w2) {
    Complex r = std::sqrt(w2);
    return r.imag() < 0.0 ? -r : r;
}

struct BackwardStepper {
    const DrivingForces& f;
    std::size_t horizon;
    int n_sub;
    double h;
    double coeff; // -2/N
    std::vector<double> lam0, lamm, lam1;

    BackwardStepper(const DrivingForces& forces, std::size_t horizon_node, EvolveOptions opts)
        : f(forces), horizon(horizon_node), n_sub(opts.n_sub),
          h(forces.grid.dt / static_cast<double>(opts.n_sub)),
          coeff(-2.0 / static_cast<double>(forces.n_forces)), lam0(forces.n_forces),
          lamm(forces.n_forces), lam1(forces.n_forces) {
        if (horizon_node > forces.grid.n_steps)
            throw InvalidGrid("backward horizon exceeds the grid");
    }

    // advance one grid step (n_sub substeps) for a single point
    Complex advance_scalar(Complex z, std::size_t i) {
        // split mode while the point sits within a few substep growth lengths
        // of a force: |w|^2 grows like (4|S|/N) s under the local slit flow
        const double near_sq = 64.0 * (4.0 / static_cast<double>(f.n_forces)) * h;
        for (int s = 0; s < n_sub; ++s) {
            substep_forces(f, i, s, n_sub, true, horizon, lam0, lamm, lam1);
            double dmin_sq = std::numeric_limits<double>::infinity();
            std::size_t nearest = 0;
            for (std::size_t j = 0; j < f.n_forces; ++j) {
                const double dre = z.real() - lam0[j];
                const double d2 = dre * dre + z.imag() * z.imag();
                if (d2 < dmin_sq) {
                    dmin_sq = d2;
                    nearest = j;
                }
            }
            if (dmin_sq < near_sq) {
                z = split_substep(z, nearest);
            } else {
                double zr = z.real(), zi = z.imag();
                kernels::scalar_table().loewner_rk4_substep(&zr, &zi, nullptr, 1, lam0.data(),
                                                            lamm.data(), lam1.data(), f.n_forces,
                                                            coeff, h, nullptr);
                z = {zr, zi};
            }
        }
        return z;
    }

private:
    // Strang-split substep: the cluster of forces around `nearest` is advanced
    // with the exact slit map w -> sqrt(w^2 - (4|S|/N) h) in the frame moving
    // with the cluster centroid; the remaining forces contribute explicit
    // half-steps. Exact when all forces coincide, O(h^2) otherwise.
    Complex split_substep(Complex z, std::size_t nearest) {
        const std::size_t nf = f.n_forces;
        const double dnr = z.real() - lam0[nearest];
        const double dist_near = std::sqrt(dnr * dnr + z.imag() * z.imag());
        const double cluster_radius = 10.0 * std::max(dist_near, 1e-300);
        std::vector<char> in_cluster(nf, 0);
        std::size_t cluster_size = 0;
        double centroid0 = 0.0, centroid1 = 0.0;
        for (std::size_t j = 0; j < nf; ++j) {
            const double dre = z.real() - lam0[j];
            if (std::sqrt(dre * dre + z.imag() * z.imag()) <= cluster_radius) {
                in_cluster[j] = 1;
                ++cluster_size;
                centroid0 += lam0[j];
                centroid1 += lam1[j];
            }
        }
        centroid0 /= static_cast<double>(cluster_size);
        centroid1 /= static_cast<double>(cluster_size);
        const double drift = (centroid1 - centroid0) / h; // centroid velocity
        const double strength =
            4.0 * static_cast<double>(cluster_size) / static_cast<double>(nf);

        auto rest = [&](Complex w, const std::vector<double>& lam, double centroid) {
            Complex r = 0.0;
            for (std::size_t j = 0; j < nf; ++j)
                if (!in_cluster[j]) r += 1.0 / (centroid + w - lam[j]);
            return coeff * r - drift;
        };

        Complex w = z - centroid0;
        w += 0.5 * h * rest(w, lam0, centroid0);
        w = sqrt_upper(w * w - strength * h);
        w += 0.5 * h * rest(w, lam1, centroid1);
        return centroid1 + w;
    }
};

} // namespace

Complex backward_evolve(Complex z, const DrivingForces& forces, std::size_t horizon_node,
                        EvolveOptions opts) {
    if (!(z.imag() > 0.0)) throw DomainViolation("backward evolution needs Im z > 0");
    BackwardStepper stepper(forces, horizon_node, opts);
    for (std::size_t i = 0; i < horizon_node; ++i) z = stepper.advance_scalar(z, i);
    return z;
}

std::vector<Complex> backward_batch(std::span<const Complex> zs, const DrivingForces& forces,
                                    std::size_t horizon_node, EvolveOptions opts) {
    BackwardStepper stepper(forces, horizon_node, opts);
    const std::size_t n = zs.size();
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(zs[i].imag() > 0.0)) throw DomainViolation("backward evolution needs Im z > 0");
        re[i] = zs[i].real();
        im[i] = zs[i].imag();
    }
    const auto& K = kernels::active();
    for (std::size_t i = 0; i < horizon_node; ++i) {
        for (int s = 0; s < opts.n_sub; ++s) {
            substep_forces(forces, i, s, opts.n_sub, true, horizon_node, stepper.lam0,
                           stepper.lamm, stepper.lam1);
            K.loewner_rk4_substep(re.data(), im.data(), nullptr, n, stepper.lam0.data(),
                                  stepper.lamm.data(), stepper.lam1.data(), forces.n_forces,
                                  stepper.coeff, stepper.h, nullptr);
        }
    }
    std::vector<Complex> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {re[i], im[i]};
    return out;
}

double roundtrip_check(Complex z, const DrivingForces& forces, EvolveOptions opts) {
    MapTrajectory fwd = forward_evolve(z, forces, opts);
    if (!fwd.alive())
        throw SwallowedPoint("point absorbed before the horizon", *fwd.swallowed_at);
    const Complex back = backward_evolve(fwd.final_value(), forces, forces.grid.n_steps, opts);
    return std::abs(back - z);
}

// --- traces and hulls ----------------------------------------------------

namespace {

double point_pair_min_separation(const std::vector<std::vector<Complex>>& curves) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < curves.size(); ++a)
        for (std::size_t b = a + 1; b < curves.size(); ++b)
            for (const Complex& p : curves[a])
                for (const Complex& q : curves[b]) best = std::min(best, std::abs(p - q));
    return best;
}

} // namespace

Trace trace_extract(const DrivingForces& forces, const std::vector<std::size_t>& sample_nodes,
                    double delta_trace, EvolveOptions opts) {
    if (!(delta_trace > 0.0)) throw ConfigError("trace offset must be positive");
    Trace tr;
    tr.nodes = sample_nodes;
    tr.offset = delta_trace;
    tr.curves.assign(forces.n_forces, {});
    for (std::size_t node : sample_nodes) {
        if (node > forces.grid.n_steps) throw InvalidGrid("sample node beyond the grid");
        tr.times.push_back(forces.grid.time(node));
        for (std::size_t j = 0; j < forces.n_forces; ++j) {
            const Complex z(forces.at(node, j), delta_trace);
            tr.curves[j].push_back(node == 0 ? z : backward_evolve(z, forces, node, opts));
        }
    }
    tr.min_pair_separation = point_pair_min_separation(tr.curves);
    return tr;
}

HullPolyline hull_from_trace(const Trace& trace, const DrivingForces& forces) {
    HullPolyline hull;
    const double T = forces.grid.horizon;
    hull.clip_halfwidth = forces.sup_abs() + 4.0 * std::sqrt(T);
    hull.polylines = trace.curves;
    hull.polylines.push_back(
        {Complex(-hull.clip_halfwidth, 0.0), Complex(hull.clip_halfwidth, 0.0)});
    return hull;
}

} // namespace msle
