#pragma once

#include <span>
#include <vector>

#include "msle/loewner.hpp"

namespace msle {

// Rectangular compact G = [x_min,x_max] x [y_min,y_max] in the open upper
// half plane; delta2 = dist(G, R) = y_min.
struct CompactGridSpec {
    double x_min = -1.0, x_max = 1.0;
    double y_min = 1.0, y_max = 2.0;
    std::size_t nx = 5, ny = 3;

    void validate() const;
    std::vector<Complex> points() const;
    double delta2() const { return y_min; }
    CompactGridSpec refined() const; // doubled resolution, same rectangle
};

// C(T,G)^{1/N} = delta2 / max{delta1, sqrt((delta2^2 - 4T)^+)}, evaluated at
// t = T (the weakest point of the estimate over [0,T]).
struct CaratheodoryConstant {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double horizon = 0.0;
    std::size_t n_forces = 0;
    double value = 0.0;
};

CaratheodoryConstant constant_CTG(double delta1, double delta2, double T, std::size_t n_forces);

// Lockstep evolution of two chains over the grid points.
struct PairEvolution {
    double distance = 0.0;          // sup over nodes x grid of |g1 - g2|
    double delta1 = 0.0;            // min over both chains of Im g(T, z)
    bool grid_valid = false;        // false if any point was absorbed
    double first_swallow_time = 0.0;
};

PairEvolution evolve_pair_on_grid(const DrivingForces& f1, const DrivingForces& f2,
                                  const CompactGridSpec& grid, EvolveOptions opts = {});

// sup_{[0,T] x G} |g1 - g2| on the discretized grid; throws GridIntersectsHull
// when a grid point is swallowed by either chain.
double caratheodory_distance(const DrivingForces& f1, const DrivingForces& f2,
                             const CompactGridSpec& grid, EvolveOptions opts = {});

// min over chains and grid points of Im g(T, z); throws GridIntersectsHull.
double delta1_estimate(std::span<const DrivingForces* const> chains, const CompactGridSpec& grid,
                       EvolveOptions opts = {});

} // namespace msle
