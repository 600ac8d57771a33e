#include "msle/noise.hpp"

#include <cmath>

#include "msle/errors.hpp"

namespace msle {

std::vector<double> NoisePath::partial_sums() const {
    std::vector<double> w(grid.n_nodes());
    w[0] = 0.0;
    for (std::size_t i = 0; i < increments.size(); ++i) w[i + 1] = w[i] + increments[i];
    return w;
}

NoisePath sample_noise(const TimeGrid& grid, std::uint64_t seed, std::uint32_t channel) {
    if (grid.n_steps == 0) throw InvalidGrid("noise path needs at least one step");
    NoisePath p;
    p.grid = grid;
    p.seed = seed;
    p.channel = channel;
    p.increments.resize(grid.n_steps);
    const double s = std::sqrt(grid.dt);
    for (std::size_t i = 0; i < grid.n_steps; ++i)
        p.increments[i] = s * rng::normal(seed, rng::Stream::particle, channel, i);
    return p;
}

namespace {
NoisePath combine(const NoisePath& a, const NoisePath& b, double sb) {
    if (!a.grid.same_as(b.grid)) throw InvalidGrid("noise combination requires a common grid");
    NoisePath out;
    out.grid = a.grid;
    out.seed = a.seed;
    out.channel = a.channel;
    out.increments.resize(a.increments.size());
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (std::size_t i = 0; i < a.increments.size(); ++i)
        out.increments[i] = (a.increments[i] + sb * b.increments[i]) * inv_sqrt2;
    return out;
}
} // namespace

NoisePath diff_combination(const NoisePath& a, const NoisePath& b) { return combine(a, b, -1.0); }

NoisePath sum_combination(const NoisePath& a, const NoisePath& b) { return combine(a, b, 1.0); }

NoisePath coarsen(const NoisePath& fine, std::size_t factor) {
    if (factor == 0 || fine.grid.n_steps % factor != 0)
        throw InvalidGrid("coarsening factor must divide n_steps");
    NoisePath out;
    out.grid = TimeGrid(fine.grid.horizon, fine.grid.n_steps / factor);
    out.seed = fine.seed;
    out.channel = fine.channel;
    out.increments.resize(out.grid.n_steps);
    for (std::size_t i = 0; i < out.grid.n_steps; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < factor; ++k) s += fine.increments[i * factor + k];
        out.increments[i] = s;
    }
    return out;
}

NoisePath zero_noise(const TimeGrid& grid) {
    NoisePath p;
    p.grid = grid;
    p.increments.assign(grid.n_steps, 0.0);
    return p;
}

} // namespace msle
