#include "msle/dyson.hpp"

#include <cmath>

#include "msle/errors.hpp"

namespace msle {

std::vector<double> DysonPaths::node(std::size_t i) const {
    return {values.begin() + static_cast<std::ptrdiff_t>(i * n_particles),
            values.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_particles)};
}

void DysonPaths::validate_ordering() const {
    for (std::size_t i = 0; i < grid.n_nodes(); ++i)
        for (std::size_t j = 0; j + 1 < n_particles; ++j)
            if (!(at(i, j) > at(i, j + 1)))
                throw OrderingViolation("particle ordering lost at node " + std::to_string(i));
}

namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;

void check_init(const std::vector<double>& init, std::size_t n) {
    if (init.size() != n) throw ConfigError("init size does not match particle count");
    for (std::size_t j = 0; j + 1 < n; ++j)
        if (!(init[j] > init[j + 1]))
            throw InitOrder("initial values must be strictly decreasing");
}

// One step of the gap-space scheme. The singular drift of each adjacent pair
// is treated semi-implicitly in that pair's gap (positive quadratic root, so
// adjacent gaps stay positive unconditionally); every other interaction term
// enters explicitly. Positions are rebuilt from the exact sum process and the
// updated gaps, so ordering can only fail through non-finite arithmetic, in
// which case the step is retried on halved sub-steps (Brownian increments are
// split by bridging) before giving up.
struct DysonStepper {
    std::size_t n;
    double kappa;
    std::uint64_t seed;
    std::uint64_t step_index = 0;

    // db[j] ~ N(0, dt) raw per-particle increments (unscaled by 1/sqrt(2))
    void advance(std::vector<double>& lam, const std::vector<double>& db, double dt,
                 int depth) const {
        if (n == 1) { // free particle: lambda += dB/sqrt(2)
            lam[0] += db[0] * inv_sqrt2;
            return;
        }
        std::vector<double> next(n);
        if (try_step(lam, db, dt, next)) {
            lam = next;
            return;
        }
        if (depth >= 20)
            throw OrderingViolation("dyson step failed after 20 local halvings (dt too large)");
        // split each increment at the midpoint: dB = dB/2 + eta, dB/2 - eta
        std::vector<double> first(n), second(n);
        const double s = 0.5 * std::sqrt(dt);
        for (std::size_t j = 0; j < n; ++j) {
            const double eta =
                s * rng::normal(seed, rng::Stream::scatter, static_cast<std::uint32_t>(j),
                                (step_index << 5) | static_cast<std::uint64_t>(depth));
            first[j] = 0.5 * db[j] + eta;
            second[j] = 0.5 * db[j] - eta;
        }
        advance(lam, first, 0.5 * dt, depth + 1);
        advance(lam, second, 0.5 * dt, depth + 1);
    }

private:
    bool try_step(const std::vector<double>& lam, const std::vector<double>& db, double dt,
                  std::vector<double>& next) const {
        const double four_c_dt = 16.0 / kappa * dt; // discriminant shift for gap drift 4/kappa
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += lam[j];
        double dsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) dsum += db[j];
        sum += dsum * inv_sqrt2; // interaction drifts cancel in the sum

        std::vector<double> gap(n - 1);
        bool ok = true;
        for (std::size_t m = 0; m + 1 < n; ++m) {
            // explicit cross terms of gap m: (2/kappa) sum_{k != m, m+1}
            //   [1/(lam_m - lam_k) - 1/(lam_{m+1} - lam_k)]
            double cross = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == m || k == m + 1) continue;
                cross += 1.0 / (lam[m] - lam[k]) - 1.0 / (lam[m + 1] - lam[k]);
            }
            const double dwm = (db[m] - db[m + 1]) * inv_sqrt2;
            const double u = (lam[m] - lam[m + 1]) + dt * (2.0 / kappa) * cross + dwm;
            const double g = 0.5 * (u + std::sqrt(u * u + four_c_dt));
            if (!(g > 0.0) || !std::isfinite(g)) ok = false;
            gap[m] = g;
        }
        if (!ok || !std::isfinite(sum)) return false;

        // lam_j = lam_{n-1} + sum_{m >= j} gap_m ; recover lam_{n-1} from the sum
        double weighted = 0.0;
        for (std::size_t m = 0; m + 1 < n; ++m)
            weighted += static_cast<double>(m + 1) * gap[m];
        next[n - 1] = (sum - weighted) / static_cast<double>(n);
        for (std::size_t j = n - 1; j-- > 0;) next[j] = next[j + 1] + gap[j];
        return true;
    }
};

DysonPaths init_paths(const TimeGrid& grid, std::size_t n, double kappa,
                      const std::vector<double>& init) {
    DysonPaths p;
    p.grid = grid;
    p.n_particles = n;
    p.kappa = kappa;
    p.values.resize(grid.n_nodes() * n);
    for (std::size_t j = 0; j < n; ++j) p.values[j] = init[j];
    return p;
}

} // namespace

DysonPaths simulate_dyson(const TimeGrid& grid, std::uint64_t seed, std::size_t n_particles,
                          double kappa, const std::vector<double>& init) {
    bessel_dimension(kappa); // validates kappa in (0,4]
    check_init(init, n_particles);
    DysonPaths p = init_paths(grid, n_particles, kappa, init);
    DysonStepper stepper{n_particles, kappa, seed};
    std::vector<double> lam = init;
    std::vector<double> db(n_particles);
    const double sdt = std::sqrt(grid.dt);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        for (std::size_t j = 0; j < n_particles; ++j)
            db[j] = sdt * rng::normal(seed, rng::Stream::particle, static_cast<std::uint32_t>(j), i);
        stepper.step_index = i;
        stepper.advance(lam, db, grid.dt, 0);
        for (std::size_t j = 0; j < n_particles; ++j) p.at(i + 1, j) = lam[j];
    }
    return p;
}

std::pair<DysonPaths, DysonPaths> simulate_dyson_coupled(const TimeGrid& grid, std::uint64_t seed,
                                                         std::size_t n_particles, double kappa,
                                                         const std::vector<double>& init_a,
                                                         const std::vector<double>& init_b) {
    bessel_dimension(kappa);
    check_init(init_a, n_particles);
    check_init(init_b, n_particles);
    DysonPaths pa = init_paths(grid, n_particles, kappa, init_a);
    DysonPaths pb = init_paths(grid, n_particles, kappa, init_b);
    DysonStepper stepper{n_particles, kappa, seed};
    std::vector<double> la = init_a, lb = init_b;
    std::vector<double> db(n_particles);
    const double sdt = std::sqrt(grid.dt);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        for (std::size_t j = 0; j < n_particles; ++j)
            db[j] = sdt * rng::normal(seed, rng::Stream::particle, static_cast<std::uint32_t>(j), i);
        stepper.step_index = i;
        stepper.advance(la, db, grid.dt, 0);
        stepper.advance(lb, db, grid.dt, 0);
        for (std::size_t j = 0; j < n_particles; ++j) {
            pa.at(i + 1, j) = la[j];
            pb.at(i + 1, j) = lb[j];
        }
    }
    return {std::move(pa), std::move(pb)};
}

DysonPaths dyson_pair_from_bessel(const BesselPath& gap, const NoisePath& noise_sum, double a1,
                                  double a2) {
    if (!(a1 > a2)) throw InitOrder("a1 must exceed a2");
    if (!gap.grid.same_as(noise_sum.grid)) throw InvalidGrid("gap and sum noise grids differ");
    if (std::abs(gap.values[0] - (a1 - a2)) > 1e-12 * std::max(1.0, std::abs(a1 - a2)))
        throw ConfigError("gap process must start at a1 - a2");
    DysonPaths p;
    p.grid = gap.grid;
    p.n_particles = 2;
    p.kappa = gap.dimension > 1.0 ? 8.0 / (gap.dimension - 1.0) : 0.0;
    p.values.resize(p.grid.n_nodes() * 2);
    double s = a1 + a2;
    p.at(0, 0) = 0.5 * (s + gap.values[0]);
    p.at(0, 1) = 0.5 * (s - gap.values[0]);
    for (std::size_t i = 0; i < p.grid.n_steps; ++i) {
        s += noise_sum.increments[i];
        p.at(i + 1, 0) = 0.5 * (s + gap.values[i + 1]);
        p.at(i + 1, 1) = 0.5 * (s - gap.values[i + 1]);
    }
    return p;
}

} // namespace msle
