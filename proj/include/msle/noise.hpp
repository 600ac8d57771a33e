#pragma once

#include <cstdint>
#include <vector>

#include "msle/rng.hpp"
#include "msle/time_grid.hpp"

namespace msle {

// Gaussian increments on a time grid: increments[i] ~ N(0, dt) independent.
// Fully determined by (seed, channel); the sole source of randomness for all
// simulations.
struct NoisePath {
    TimeGrid grid;
    std::vector<double> increments;
    std::uint64_t seed = 0;
    std::uint32_t channel = 0;

    // W at the grid nodes (prefix sums, W_0 = 0).
    std::vector<double> partial_sums() const;
};

NoisePath sample_noise(const TimeGrid& grid, std::uint64_t seed, std::uint32_t channel = 0);

// (a - b)/sqrt(2) and (a + b)/sqrt(2); both are standard-Brownian increments
// again, and they are independent of each other.
NoisePath diff_combination(const NoisePath& a, const NoisePath& b);
NoisePath sum_combination(const NoisePath& a, const NoisePath& b);

// Sum consecutive blocks of `factor` increments, producing the same Brownian
// path on a grid coarsened by that factor. Used by strong-convergence tests.
NoisePath coarsen(const NoisePath& fine, std::size_t factor);

NoisePath zero_noise(const TimeGrid& grid);

} // namespace msle
