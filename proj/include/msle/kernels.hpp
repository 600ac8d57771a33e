#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace msle::kernels {

// Batch kernels for the arithmetic inner loops. One scalar reference
// implementation and one AVX2 implementation; both must produce bit-identical
// results (same operation order, no FMA), which the equivalence tests assert
// with exact comparisons. Selection happens once at startup, overridable with
// MSLE_KERNEL=scalar|avx2.
struct Table {
    const char* name;

    // Semi-implicit Bessel step, out[i] = ((x+dw) + sqrt((x+dw)^2 + two_c_dt))/2
    // with two_c_dt = 2*(d-1)*dt. Positive for any input.
    void (*bessel_step)(const double* x, const double* dw, double two_c_dt,
                        double* out, std::size_t n);

    // m[i] = min(m[i], x[i])
    void (*min_update)(double* m, const double* x, std::size_t n);

    // max over i of (a-b) squared modulus for split-complex arrays
    double (*max_abs_diff_sq)(const double* are, const double* aim,
                              const double* bre, const double* bim, std::size_t n);

    // One classical RK4 substep of dz/dt = coeff * sum_j 1/(z - lam_j(t)) for a
    // batch of points. Forces are linear over the substep; lam0/lamm/lam1 hold
    // the per-force values at t, t+h/2, t+h. Points with alive[i] == 0 are left
    // untouched. If min_dist_sq is non-null it receives, per alive point, the
    // squared distance from the updated z to the nearest lam1 value.
    void (*loewner_rk4_substep)(double* zre, double* zim, const std::uint8_t* alive,
                                std::size_t n, const double* lam0, const double* lamm,
                                const double* lam1, std::size_t n_forces, double coeff,
                                double h, double* min_dist_sq);
};

const Table& scalar_table();
const Table* avx2_table(); // nullptr when unsupported by the CPU

// Active table per MSLE_KERNEL / CPU detection.
const Table& active();

// Name of the table `active()` picked (for manifests and logs).
std::string active_name();

} // namespace msle::kernels
