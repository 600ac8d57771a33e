#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msle/caratheodory.hpp"
#include "msle/dyson.hpp"
#include "msle/stats.hpp"

namespace msle {

// Violation slack for almost-sure pathwise bounds: discretization noise must
// not flag false violations.
inline double violation_slack(double dt, double scale) { return 10.0 * dt + 1e-12 * scale; }

// Pass/fail record with margins for one claimed inequality. A margin is
// (bound - observed); only margins below -slack count as violations.
struct BoundReport {
    std::string claim;
    std::size_t n_paths = 0;
    std::size_t n_violations = 0;
    double slack = 0.0;
    Summary margins;

    void add(double margin) {
        margins.add(margin);
        ++n_paths;
        if (margin < -slack) ++n_violations;
    }
    double worst_margin() const { return margins.count ? margins.min : 0.0; }
    bool pass() const { return n_violations == 0; }
};

// --- closed forms from the kappa-perturbation tail estimate ----------------

struct PhiCoefficients {
    double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
};

// alpha1 = C 4T/kappa^2, alpha2 = C 32 T^{5/2}/kappa^3, alpha3 = C 4Ta/kappa^2
PhiCoefficients phi_coefficients(double C, double T, double kappa, double a);

// phi(x) = alpha1 x^{1/8} + alpha2 x^{1/4} + alpha3 x^{7/8}
double phi(double x, const PhiCoefficients& c);

// zeta(x) = 2 x^{nu/8} / a^{2 nu} + 2 x^{3/4} exp(-1/(2 T x^{3/2})); 0 at x=0.
double zeta(double x, double nu, double a, double T);

// Two-index variant with both nu and nu* terms (the event-probability form).
double zeta_two_index(double x, double nu, double nu_star, double a, double T);

// P(M_inf < y) = (y/a)^{2 nu} on [0, a], 0 below, 1 above.
double infimum_law_cdf(double y, double a, double nu);

// P(sup_{s<=t} W_s <= x) = 2 Phi(x/sqrt(t)) - 1.
double sup_bm_cdf(double x, double t);

// Reflection-principle envelope for P(sup |W| > x):
// 2 sqrt(2/pi) (sqrt(t)/x) exp(-x^2 / (2t)).
double sup_abs_bm_tail_envelope(double x, double t);

// --- initial-value perturbation (two forces) -------------------------------

struct InitPerturbConfig {
    double a1 = 1.0, a2 = -1.0;
    double b1 = 1.04, b2 = -0.97;
    double epsilon = 0.05;
    double kappa = 4.0;
    double horizon = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    std::size_t n_paths = 100;
    CompactGridSpec grid_spec;
    int n_sub = 4;
    bool check_caratheodory = true;
    double identity_tol_factor = 1e-2; // residual threshold = factor * epsilon

    void validate() const; // throws ConfigError naming the violated precondition
    TimeGrid grid() const { return grid_with_step(horizon, dt); }
};

struct InitPerturbResult {
    BoundReport driving;      // |lambda_k - eta_k| < 2 eps, all nodes
    BoundReport caratheodory; // distance <= 4 C(T,G) eps, valid-grid paths
    BoundReport identity;     // gap identity residual <= tol
    std::size_t monotonicity_violations = 0; // |lambda-eta-(a-b)| must not decrease
    std::size_t grid_invalid_paths = 0;
    Summary c_values;         // pathwise C(T,G)
    Summary distances;
    bool under_resolved = false; // grid-refinement check on the first path
};

InitPerturbResult run_init_perturbation(const InitPerturbConfig& cfg);

// Max over nodes of the residual of the explicit gap identity
// lambda_k - eta_k = a_k - b_k + (1/2)(-1)^{3-k}(a-b)(exp(-(4/kappa) I_t) - 1),
// with I_t the trapezoid integral of 1/(X Y). Both k are checked.
double init_identity_residual(const DysonPaths& lam, const DysonPaths& eta,
                              const BesselPath& gap_x, const BesselPath& gap_y, double kappa);

// --- diffusivity perturbation (two forces) ---------------------------------

struct KappaPerturbConfig {
    double kappa = 2.0, kappa_star = 2.01;
    double a1 = 1.0, a2 = -1.0; // gap a = a1 - a2
    double horizon = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    std::size_t n_paths = 100;
    CompactGridSpec grid_spec;
    int n_sub = 4;
    double t_long = 0.0;   // 0 selects 100 a^2
    double dt_long = 4e-3; // continuation step towards t_long
    bool check_caratheodory = true;

    void validate() const;
    TimeGrid grid() const { return grid_with_step(horizon, dt); }
    double gap() const { return a1 - a2; }
    double resolved_t_long() const { return t_long > 0.0 ? t_long : 100.0 * gap() * gap(); }
};

struct TailReport {
    double x = 0.0;              // kappa* - kappa
    double zeta_bound = 0.0;     // as printed (nu only)
    double zeta_both = 0.0;      // with the nu* term as well
    bool zeta_vacuous = false;   // zeta >= 1
    std::size_t n_paths = 0;
    std::size_t n_valid_grid = 0;
    std::size_t n_deviations = 0; // caratheodory distance > phi(x)
    double deviation_frequency = 0.0;
    double freq_e1 = 0.0, freq_e2 = 0.0, freq_e3 = 0.0;
    double p_e1_theory = 0.0, p_e2_theory = 0.0;
    Summary phi_values; // pathwise thresholds (pathwise C(T,G))
    Summary c_values;
    // run frequencies against theory at Monte Carlo confidence
    double e1_se = 0.0;
};

struct KappaPerturbResult {
    BoundReport lemma_sup_gap;   // sup (X*-X)^2 <= (4t/kappa^2)|kappa*-kappa|
    double worst_margin_signed_proof = 0.0; // same bound with (kappa-kappa*): vacuous side
    BoundReport driving_bound;   // the running-infima driving-force bound
    TailReport tail;
    Summary distances;
    bool under_resolved = false;
};

KappaPerturbResult run_kappa_perturbation(const KappaPerturbConfig& cfg);

// --- N >= 3 diagnostics -----------------------------------------------------

struct QDiagnostic {
    std::size_t i = 0, j = 0;
    std::vector<double> q;              // per node; meaningless where degenerate
    std::vector<std::uint8_t> degenerate; // per node: gap difference vanished
    double max_identity_residual = 0.0;
    bool all_degenerate = false;
};

// Q^{i,j} and the gap-difference identity residual for a coupled pair of
// general-N systems (0-indexed particles, i < j). Throws ConfigError for N < 3.
QDiagnostic q_diagnostic(const DysonPaths& orig, const DysonPaths& pert, std::size_t i,
                         std::size_t j);

// --- convergence sweeps -----------------------------------------------------

enum class SweepMode { init, kappa };

struct SweepRow {
    double parameter = 0.0;      // eps_n or kappa_n - kappa
    double mean_distance = 0.0;
    double max_distance = 0.0;
    double bound = 0.0;          // 4 C eps (init mode); phi (kappa mode)
    std::size_t n_valid = 0;
    std::size_t n_paths = 0;
    bool within_bound = false;
};

struct SweepConfig {
    SweepMode mode = SweepMode::init;
    std::vector<double> parameters; // decreasing positive sequence
    double kappa = 4.0;
    double a1 = 1.0, a2 = -1.0;
    double horizon = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    std::size_t n_paths = 8;
    CompactGridSpec grid_spec;
    int n_sub = 4;
};

std::vector<SweepRow> convergence_sweep(const SweepConfig& cfg);

// --- infimum law and supremum tail ------------------------------------------

struct InfimumLawConfig {
    double a = 1.0;
    double kappa = 4.0;
    double t_long = 100.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    // fine grid near the start (where the infimum concentrates), coarser after
    double dt_fine = 2.5e-4;
    double t_fine = 10.0;
    double dt_coarse = 2.5e-3;
    bool bridge_minimum = true;
    bool tail_sample = true;
};

struct InfimumLawResult {
    double ks_grid = 0.0;     // plain grid running infimum up to t_long
    double ks_refined = 0.0;  // with bridge-minimum refinement
    double ks_estimate = 0.0; // refined + exact transient tail draw
    std::size_t n_paths = 0;
};

InfimumLawResult run_infimum_law(const InfimumLawConfig& cfg);

struct SupBmTailResult {
    double frequency = 0.0;
    double envelope = 0.0;
    std::size_t n_paths = 0;
    bool within_envelope = false;
};

SupBmTailResult check_sup_bm_tail(double x, double t, double dt, std::size_t n_paths,
                                  std::uint64_t seed);

} // namespace msle
