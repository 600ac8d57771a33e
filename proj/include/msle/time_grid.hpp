#pragma once

#include <cmath>
#include <cstddef>

#include "msle/errors.hpp"

namespace msle {

// Uniform discretization of [0, T]. Node i sits at i*dt, except the last one
// which is pinned to T exactly.
struct TimeGrid {
    double horizon = 0.0;
    std::size_t n_steps = 0;
    double dt = 0.0;

    TimeGrid() = default;

    TimeGrid(double T, std::size_t n) : horizon(T), n_steps(n) {
        if (!(T > 0.0) || n == 0 || !std::isfinite(T))
            throw InvalidGrid("time grid requires T > 0 and n_steps > 0");
        dt = T / static_cast<double>(n);
    }

    double time(std::size_t i) const {
        return i == n_steps ? horizon : static_cast<double>(i) * dt;
    }

    // Number of nodes, including t = 0.
    std::size_t n_nodes() const { return n_steps + 1; }

    bool same_as(const TimeGrid& o) const {
        return n_steps == o.n_steps && horizon == o.horizon;
    }
};

// Grid with step as close to dt_target as possible without exceeding it.
inline TimeGrid grid_with_step(double T, double dt_target) {
    if (!(dt_target > 0.0)) throw InvalidGrid("dt must be positive");
    auto n = static_cast<std::size_t>(std::ceil(T / dt_target - 1e-12));
    return TimeGrid(T, n == 0 ? 1 : n);
}

} // namespace msle
