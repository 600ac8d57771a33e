#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "msle/noise.hpp"
#include "msle/time_grid.hpp"

namespace msle {

// d = 1 + 8/kappa; d >= 3 exactly when kappa <= 4 (the no-collision phase).
double bessel_dimension(double kappa);
// nu = (d-2)/2 = 4/kappa - 1/2
double bessel_index(double kappa);

// One semi-implicit step: x' solves x' = x + ((d-1)/2) dt / x' + dw, i.e. the
// positive root x' = ((x+dw) + sqrt((x+dw)^2 + 2(d-1)dt))/2. Positive for any
// dw, which is what rules out step rejection.
double bessel_step(double x, double dw, double dt, double d);

struct BesselPath {
    TimeGrid grid;
    std::vector<double> values; // one per node, values[0] = start
    double dimension = 0.0;
    double index_nu = 0.0;
    double start = 0.0;

    double terminal() const { return values.back(); }
    double min_value() const;
};

BesselPath simulate_bessel(const TimeGrid& grid, const NoisePath& noise, double a, double d);

// Two starts, one Wiener process: the difference never changes sign and
// contracts pathwise (the step map is a strict contraction).
std::pair<BesselPath, BesselPath> simulate_coupled_bessel_starts(const TimeGrid& grid,
                                                                 const NoisePath& noise,
                                                                 double a, double b, double d);

// Two dimensions 1+8/kappa and 1+8/kappa_star, same start, same Wiener
// process. kappa == kappa_star is allowed and yields identical paths.
std::pair<BesselPath, BesselPath> simulate_coupled_bessel_dims(const TimeGrid& grid,
                                                               const NoisePath& noise, double a,
                                                               double kappa, double kappa_star);

struct RunningExtrema {
    std::vector<double> inf_values;  // running min of X at each node
    std::vector<double> sup_abs_w;   // running sup of |W| at each node
};

RunningExtrema running_extrema(const BesselPath& path, const NoisePath& noise);

// --- batched Monte Carlo -----------------------------------------------

struct GridSegment {
    double dt = 0.0;
    std::size_t n_steps = 0;
};

// Path p draws from effective seed (seed + p): the per-path stream contract
// that makes worker count irrelevant to the output.
struct BesselMcConfig {
    double start = 1.0;
    double dimension = 3.0;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    std::vector<GridSegment> segments;
    // Refine the running minimum with the conditional Brownian-bridge minimum
    // of每 step. This estimates the infimum of the continuous path rather
    // than of its grid skeleton (grid-only minima are biased high by
    // ~0.58*sqrt(dt)).
    bool bridge_minimum = false;
    // Extend the infimum past the simulated horizon with an exact draw of the
    // all-time future infimum, X_T * U^(1/(2 nu)).
    bool tail_sample = false;
};

struct BesselMcResult {
    std::vector<double> terminal;
    std::vector<double> grid_min;    // min over grid nodes
    std::vector<double> refined_min; // bridge-refined (== grid_min when off)
    std::vector<double> inf_estimate; // refined_min combined with the tail draw
};

BesselMcResult bessel_mc(const BesselMcConfig& cfg);

} // namespace msle
