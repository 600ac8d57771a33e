#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "msle/bessel.hpp"
#include "msle/noise.hpp"
#include "msle/time_grid.hpp"

namespace msle {

// N ordered particle trajectories, strictly decreasing at every node:
// positions(i, 0) > positions(i, 1) > ... > positions(i, N-1).
struct DysonPaths {
    TimeGrid grid;
    std::size_t n_particles = 0;
    double kappa = 0.0;
    std::vector<double> values; // node-major, n_nodes * n_particles

    double at(std::size_t node, std::size_t j) const { return values[node * n_particles + j]; }
    double& at(std::size_t node, std::size_t j) { return values[node * n_particles + j]; }

    std::vector<double> node(std::size_t i) const;
    // throws OrderingViolation if any node is not strictly decreasing
    void validate_ordering() const;
};

// init must be strictly decreasing (conversion from an ascending Weyl-chamber
// vector happens at the configuration boundary, not here). Each particle owns
// one noise channel of the per-path seed.
DysonPaths simulate_dyson(const TimeGrid& grid, std::uint64_t seed, std::size_t n_particles,
                          double kappa, const std::vector<double>& init);

// Same dynamics driven by the identical per-particle increments, started from
// init_a and init_b. Setting init_b == init_a reproduces bit-identical pairs.
std::pair<DysonPaths, DysonPaths> simulate_dyson_coupled(const TimeGrid& grid, std::uint64_t seed,
                                                         std::size_t n_particles, double kappa,
                                                         const std::vector<double>& init_a,
                                                         const std::vector<double>& init_b);

// N=2 assembly from the gap process X and an independent sum noise:
// lambda_1 = (S + X)/2, lambda_2 = (S - X)/2 with S = a1 + a2 + W'. The gap
// lambda_1 - lambda_2 reproduces X exactly.
DysonPaths dyson_pair_from_bessel(const BesselPath& gap, const NoisePath& noise_sum, double a1,
                                  double a2);

} // namespace msle
