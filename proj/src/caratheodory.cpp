#include "msle/caratheodory.hpp"

#include <algorithm>
#include <cmath>

#include "msle/errors.hpp"
#include "msle/kernels.hpp"

namespace msle {

void CompactGridSpec::validate() const {
    if (!(y_min > 0.0)) throw ConfigError("compact grid must satisfy y_min > 0 (G in H)");
    if (!(x_max >= x_min) || !(y_max >= y_min)) throw ConfigError("compact grid rectangle is empty");
    if (nx == 0 || ny == 0) throw ConfigError("compact grid needs nx, ny >= 1");
}

std::vector<Complex> CompactGridSpec::points() const {
    validate();
    std::vector<Complex> pts;
    pts.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y =
            ny == 1 ? y_min : y_min + (y_max - y_min) * static_cast<double>(iy) / double(ny - 1);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x =
                nx == 1 ? x_min : x_min + (x_max - x_min) * static_cast<double>(ix) / double(nx - 1);
            pts.emplace_back(x, y);
        }
    }
    return pts;
}

CompactGridSpec CompactGridSpec::refined() const {
    CompactGridSpec r = *this;
    r.nx = 2 * nx;
    r.ny = 2 * ny;
    return r;
}

CaratheodoryConstant constant_CTG(double delta1, double delta2, double T, std::size_t n_forces) {
    if (!(delta1 > 0.0) || !(delta2 > 0.0) || !(T > 0.0))
        throw ConfigError("constant_CTG needs positive delta1, delta2, T");
    CaratheodoryConstant c;
    c.delta1 = delta1;
    c.delta2 = delta2;
    c.horizon = T;
    c.n_forces = n_forces;
    const double shrunk = std::sqrt(std::max(delta2 * delta2 - 4.0 * T, 0.0));
    const double ratio = delta2 / std::max(delta1, shrunk);
    c.value = std::pow(ratio, static_cast<double>(n_forces));
    return c;
}

PairEvolution evolve_pair_on_grid(const DrivingForces& f1, const DrivingForces& f2,
                                  const CompactGridSpec& grid, EvolveOptions opts) {
    if (!f1.grid.same_as(f2.grid)) throw InvalidGrid("chains must share a time grid");
    const std::vector<Complex> pts = grid.points();
    ForwardBatch b1(pts, f1, opts);
    ForwardBatch b2(pts, f2, opts);
    const auto& K = kernels::active();

    PairEvolution out;
    double dist_sq = 0.0;
    while (true) {
        const bool more1 = b1.step();
        const bool more2 = b2.step();
        if (!b1.all_alive() || !b2.all_alive()) {
            out.grid_valid = false;
            double t = f1.grid.horizon;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (!b1.alive()[i]) t = std::min(t, b1.swallowed_at()[i]);
                if (!b2.alive()[i]) t = std::min(t, b2.swallowed_at()[i]);
            }
            out.first_swallow_time = t;
            return out;
        }
        dist_sq = std::max(dist_sq, K.max_abs_diff_sq(b1.re().data(), b1.im().data(),
                                                      b2.re().data(), b2.im().data(), pts.size()));
        if (!more1 || !more2) break;
    }
    out.grid_valid = true;
    out.distance = std::sqrt(dist_sq);
    double d1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        d1 = std::min({d1, b1.im()[i], b2.im()[i]});
    out.delta1 = d1;
    return out;
}

double caratheodory_distance(const DrivingForces& f1, const DrivingForces& f2,
                             const CompactGridSpec& grid, EvolveOptions opts) {
    const PairEvolution ev = evolve_pair_on_grid(f1, f2, grid, opts);
    if (!ev.grid_valid)
        throw GridIntersectsHull("a grid point was absorbed at t = " +
                                 std::to_string(ev.first_swallow_time));
    return ev.distance;
}

double delta1_estimate(std::span<const DrivingForces* const> chains, const CompactGridSpec& grid,
                       EvolveOptions opts) {
    if (chains.empty()) throw EmptySet("delta1_estimate needs at least one chain");
    const std::vector<Complex> pts = grid.points();
    double d1 = std::numeric_limits<double>::infinity();
    for (const DrivingForces* f : chains) {
        ForwardBatch b(pts, *f, opts);
        while (b.step()) {
            if (!b.all_alive()) {
                double t = f->grid.horizon;
                for (std::size_t i = 0; i < pts.size(); ++i)
                    if (!b.alive()[i]) t = std::min(t, b.swallowed_at()[i]);
                throw GridIntersectsHull("a grid point was absorbed at t = " + std::to_string(t));
            }
        }
        for (std::size_t i = 0; i < pts.size(); ++i) d1 = std::min(d1, b.im()[i]);
    }
    return d1;
}

} // namespace msle
