#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msle/dyson.hpp"
#include "msle/time_grid.hpp"

namespace msle {

using Complex = std::complex<double>;

// N continuous driving forces sampled on the grid nodes, interpolated
// linearly in time by the evolutions.
struct DrivingForces {
    TimeGrid grid;
    std::size_t n_forces = 0;
    std::vector<double> values; // node-major, n_nodes * n_forces

    double at(std::size_t node, std::size_t j) const { return values[node * n_forces + j]; }
    double& at(std::size_t node, std::size_t j) { return values[node * n_forces + j]; }

    static DrivingForces from_dyson(const DysonPaths& paths);
    static DrivingForces constant(const TimeGrid& grid, const std::vector<double>& levels);

    // V_j + c for every force: translates the whole hull by c.
    DrivingForces shifted(double c) const;
    // forces restricted to [0, t_node], grid truncated accordingly
    DrivingForces truncated(std::size_t node) const;
    double sup_abs() const;
    // sum over j of sup_t |V1_j - V2_j|
    static double force_distance(const DrivingForces& a, const DrivingForces& b);
};

struct EvolveOptions {
    int n_sub = 4;            // RK4 substeps per force-grid step
    double swallow_tol = 0.0; // <= 0 selects the default 10 * dt
    double resolved_tol(double dt) const { return swallow_tol > 0.0 ? swallow_tol : 10.0 * dt; }
};

// Forward trajectory of one point: g(t_i, z) at the grid nodes up to the
// horizon or up to absorption. Im g decreases strictly while alive.
struct MapTrajectory {
    Complex start;
    std::vector<Complex> samples; // node 0 .. last alive node
    std::optional<double> swallowed_at;

    Complex final_value() const { return samples.back(); }
    bool alive() const { return !swallowed_at.has_value(); }
};

// dg/dt = (2/N) sum_j 1/(g - lambda_j(t)), g(0) = z, Im z > 0.
MapTrajectory forward_evolve(Complex z, const DrivingForces& forces, EvolveOptions opts = {});

// Backward chain for the given horizon node k: dh/ds = -(2/N) sum_j
// 1/(h - lambda_j(t_k - s)) over s in [0, t_k]. Im h is nondecreasing, so the
// flow never meets the forces; points started close to a force are advanced
// with an exact local slit map until they gain height.
Complex backward_evolve(Complex z, const DrivingForces& forces, std::size_t horizon_node,
                        EvolveOptions opts = {});

// |h_T(g_T(z)) - z|; throws SwallowedPoint if z is absorbed before T.
double roundtrip_check(Complex z, const DrivingForces& forces, EvolveOptions opts = {});

// Batch of forward trajectories advanced in lockstep (SIMD across points).
class ForwardBatch {
public:
    ForwardBatch(std::span<const Complex> zs, const DrivingForces& forces, EvolveOptions opts = {});

    // Advance to the next grid node; returns false once the horizon is reached.
    bool step();

    std::size_t node() const { return node_; }
    std::size_t n_points() const { return re_.size(); }
    const std::vector<double>& re() const { return re_; }
    const std::vector<double>& im() const { return im_; }
    const std::vector<std::uint8_t>& alive() const { return alive_; }
    const std::vector<double>& swallowed_at() const { return swallowed_at_; }
    bool all_alive() const;
    Complex value(std::size_t i) const { return {re_[i], im_[i]}; }

private:
    const DrivingForces& forces_;
    EvolveOptions opts_;
    double tol_sq_;
    std::size_t node_ = 0;
    std::vector<double> re_, im_, prev_im_, min_dist_sq_, swallowed_at_;
    std::vector<std::uint8_t> alive_;
    std::vector<double> lam0_, lamm_, lam1_;
};

// Backward flow for a batch sharing one horizon. Points must start at
// positive height (they only gain height along the flow).
std::vector<Complex> backward_batch(std::span<const Complex> zs, const DrivingForces& forces,
                                    std::size_t horizon_node, EvolveOptions opts = {});

// Curves recovered through the backward chain: gamma_j(t_k) ~
// h^(t_k)_{t_k}(lambda_j(t_k) + i delta).
struct Trace {
    std::vector<std::size_t> nodes;
    std::vector<double> times;
    double offset = 0.0;
    std::vector<std::vector<Complex>> curves; // per force, one point per node
    // smallest distance between points of distinct curves (inf for N = 1);
    // grazing below resolution is reported, never thrown
    double min_pair_separation = 0.0;
};

Trace trace_extract(const DrivingForces& forces, const std::vector<std::size_t>& sample_nodes,
                    double delta_trace, EvolveOptions opts = {});

// Trace polylines plus the clipped real segment [-L, L]: the discrete stand-in
// for K_T united with the real line.
struct HullPolyline {
    std::vector<std::vector<Complex>> polylines;
    double clip_halfwidth = 0.0;
};

HullPolyline hull_from_trace(const Trace& trace, const DrivingForces& forces);

double default_trace_offset(double T); // 1e-3 * sqrt(T)

} // namespace msle
