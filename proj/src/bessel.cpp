#include "msle/bessel.hpp"

#include <algorithm>
#include <cmath>

#include "msle/errors.hpp"
#include "msle/kernels.hpp"
#include "msle/parallel.hpp"

namespace msle {

double bessel_dimension(double kappa) {
    if (!(kappa > 0.0) || kappa > 4.0)
        throw ConfigError("kappa must lie in (0,4]");
    return 1.0 + 8.0 / kappa;
}

double bessel_index(double kappa) { return 4.0 / kappa - 0.5; }

double bessel_step(double x, double dw, double dt, double d) {
    if (!(x > 0.0)) throw NonpositiveState("bessel state must be positive");
    const double u = x + dw;
    const double r = std::sqrt(u * u + 2.0 * (d - 1.0) * dt);
    return 0.5 * (u + r);
}

double BesselPath::min_value() const {
    return *std::min_element(values.begin(), values.end());
}

namespace {

void check_sim_inputs(const TimeGrid& grid, const NoisePath& noise, double a, double d) {
    if (!grid.same_as(noise.grid)) throw InvalidGrid("noise grid does not match simulation grid");
    if (!(a > 0.0)) throw NonpositiveState("bessel start must be positive");
    if (!(d >= 3.0)) throw ConfigError("bessel dimension must be >= 3 (kappa <= 4)");
}

BesselPath make_path(const TimeGrid& grid, double a, double d) {
    BesselPath p;
    p.grid = grid;
    p.dimension = d;
    p.index_nu = (d - 2.0) / 2.0;
    p.start = a;
    p.values.resize(grid.n_nodes());
    p.values[0] = a;
    return p;
}

} // namespace

BesselPath simulate_bessel(const TimeGrid& grid, const NoisePath& noise, double a, double d) {
    check_sim_inputs(grid, noise, a, d);
    BesselPath p = make_path(grid, a, d);
    double x = a;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        x = bessel_step(x, noise.increments[i], grid.dt, d);
        p.values[i + 1] = x;
    }
    return p;
}

std::pair<BesselPath, BesselPath> simulate_coupled_bessel_starts(const TimeGrid& grid,
                                                                 const NoisePath& noise,
                                                                 double a, double b, double d) {
    check_sim_inputs(grid, noise, a, d);
    if (!(b > 0.0)) throw NonpositiveState("bessel start must be positive");
    BesselPath pa = make_path(grid, a, d);
    BesselPath pb = make_path(grid, b, d);
    double x = a, y = b;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double dw = noise.increments[i];
        x = bessel_step(x, dw, grid.dt, d);
        y = bessel_step(y, dw, grid.dt, d);
        pa.values[i + 1] = x;
        pb.values[i + 1] = y;
    }
    return {std::move(pa), std::move(pb)};
}

std::pair<BesselPath, BesselPath> simulate_coupled_bessel_dims(const TimeGrid& grid,
                                                               const NoisePath& noise, double a,
                                                               double kappa, double kappa_star) {
    if (kappa > kappa_star) throw ParamOrder("kappa must not exceed kappa*");
    const double d = bessel_dimension(kappa);
    const double ds = bessel_dimension(kappa_star);
    check_sim_inputs(grid, noise, a, d);
    BesselPath p = make_path(grid, a, d);
    BesselPath ps = make_path(grid, a, ds);
    double x = a, xs = a;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double dw = noise.increments[i];
        x = bessel_step(x, dw, grid.dt, d);
        xs = bessel_step(xs, dw, grid.dt, ds);
        p.values[i + 1] = x;
        ps.values[i + 1] = xs;
    }
    return {std::move(p), std::move(ps)};
}

RunningExtrema running_extrema(const BesselPath& path, const NoisePath& noise) {
    if (!path.grid.same_as(noise.grid)) throw InvalidGrid("grids do not match");
    RunningExtrema r;
    r.inf_values.resize(path.values.size());
    r.sup_abs_w.resize(path.values.size());
    double m = path.values[0];
    double s = 0.0, w = 0.0;
    r.inf_values[0] = m;
    r.sup_abs_w[0] = 0.0;
    for (std::size_t i = 0; i < noise.increments.size(); ++i) {
        m = std::min(m, path.values[i + 1]);
        w += noise.increments[i];
        s = std::max(s, std::abs(w));
        r.inf_values[i + 1] = m;
        r.sup_abs_w[i + 1] = s;
    }
    return r;
}

namespace {

// Conditional minimum of a Brownian bridge over one step given the endpoints:
// m = (x0 + x1 - sqrt((x1-x0)^2 - 2 dt log U)) / 2, always <= min(x0, x1).
inline double bridge_minimum(double x0, double x1, double dt, double u) {
    const double d = x1 - x0;
    const double m = 0.5 * (x0 + x1 - std::sqrt(d * d - 2.0 * dt * std::log(u)));
    return m > 1e-300 ? m : 1e-300;
}

} // namespace

BesselMcResult bessel_mc(const BesselMcConfig& cfg) {
    if (cfg.segments.empty()) throw InvalidGrid("bessel_mc needs at least one grid segment");
    if (!(cfg.start > 0.0)) throw NonpositiveState("bessel start must be positive");
    const double nu = (cfg.dimension - 2.0) / 2.0;

    BesselMcResult res;
    res.terminal.resize(cfg.n_paths);
    res.grid_min.resize(cfg.n_paths);
    res.refined_min.resize(cfg.n_paths);
    res.inf_estimate.resize(cfg.n_paths);

    constexpr std::size_t block = 64;
    const std::size_t n_blocks = (cfg.n_paths + block - 1) / block;
    const auto& K = kernels::active();

    parallel_for(n_blocks, [&](std::size_t bi) {
        const std::size_t lo = bi * block;
        const std::size_t hi = std::min(lo + block, cfg.n_paths);
        const std::size_t w = hi - lo;
        double x[block], dw[block], xn[block], gmin[block], rmin[block];
        for (std::size_t l = 0; l < w; ++l) {
            x[l] = cfg.start;
            gmin[l] = cfg.start;
            rmin[l] = cfg.start;
        }
        std::uint64_t step = 0;
        for (const GridSegment& seg : cfg.segments) {
            const double two_c_dt = 2.0 * (cfg.dimension - 1.0) * seg.dt;
            const double sdt = std::sqrt(seg.dt);
            for (std::size_t s = 0; s < seg.n_steps; ++s, ++step) {
                for (std::size_t l = 0; l < w; ++l)
                    dw[l] = sdt * rng::normal(cfg.seed + (lo + l), rng::Stream::particle, 0, step);
                K.bessel_step(x, dw, two_c_dt, xn, w);
                K.min_update(gmin, xn, w);
                if (cfg.bridge_minimum) {
                    for (std::size_t l = 0; l < w; ++l) {
                        const double u =
                            rng::uniform(cfg.seed + (lo + l), rng::Stream::bridge, 0, step);
                        const double m = bridge_minimum(x[l], xn[l], seg.dt, u);
                        rmin[l] = std::min(rmin[l], m);
                    }
                } else {
                    K.min_update(rmin, xn, w);
                }
                for (std::size_t l = 0; l < w; ++l) x[l] = xn[l];
            }
        }
        for (std::size_t l = 0; l < w; ++l) {
            res.terminal[lo + l] = x[l];
            res.grid_min[lo + l] = gmin[l];
            res.refined_min[lo + l] = rmin[l];
            double inf = rmin[l];
            if (cfg.tail_sample) {
                const double u = rng::uniform(cfg.seed + (lo + l), rng::Stream::tail, 0, 0);
                inf = std::min(inf, x[l] * std::pow(u, 1.0 / (2.0 * nu)));
            }
            res.inf_estimate[lo + l] = inf;
        }
    });
    return res;
}

} // namespace msle
