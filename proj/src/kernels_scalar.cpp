#include <cmath>
#include <limits>

#include "msle/kernels.hpp"

// Reference kernels. The AVX2 versions in kernels_avx2.cpp transcribe these
// operation for operation; any change here must be mirrored there or the
// bit-exact equivalence tests fail.

namespace msle::kernels {
namespace {

void bessel_step_scalar(const double* x, const double* dw, double two_c_dt, double* out,
                        std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double u = x[i] + dw[i];
        const double r = std::sqrt(u * u + two_c_dt);
        out[i] = 0.5 * (u + r);
    }
}

void min_update_scalar(double* m, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) m[i] = x[i] < m[i] ? x[i] : m[i];
}

double max_abs_diff_sq_scalar(const double* are, const double* aim, const double* bre,
                              const double* bim, std::size_t n) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dr = are[i] - bre[i];
        const double di = aim[i] - bim[i];
        const double d2 = dr * dr + di * di;
        best = d2 > best ? d2 : best;
    }
    return best;
}

// Field coeff * sum_j 1/(z - lam_j); 1/(a+bi) = (a - bi)/(a^2 + b^2).
inline void field(double zre, double zim, const double* lam, std::size_t nf, double coeff,
                  double& kre, double& kim) {
    double sre = 0.0, sim = 0.0;
    for (std::size_t j = 0; j < nf; ++j) {
        const double dre = zre - lam[j];
        const double dim = zim;
        const double d2 = dre * dre + dim * dim;
        const double rd = 1.0 / d2;
        sre += dre * rd;
        sim -= dim * rd;
    }
    kre = coeff * sre;
    kim = coeff * sim;
}

void loewner_rk4_substep_scalar(double* zre, double* zim, const std::uint8_t* alive,
                                std::size_t n, const double* lam0, const double* lamm,
                                const double* lam1, std::size_t nf, double coeff, double h,
                                double* min_dist_sq) {
    const double h2 = 0.5 * h;
    const double h6 = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alive && !alive[i]) continue;
        const double xr = zre[i], xi = zim[i];
        double k1r, k1i, k2r, k2i, k3r, k3i, k4r, k4i;
        field(xr, xi, lam0, nf, coeff, k1r, k1i);
        field(xr + h2 * k1r, xi + h2 * k1i, lamm, nf, coeff, k2r, k2i);
        field(xr + h2 * k2r, xi + h2 * k2i, lamm, nf, coeff, k3r, k3i);
        field(xr + h * k3r, xi + h * k3i, lam1, nf, coeff, k4r, k4i);
        double sr = k1r + k2r;
        double si = k1i + k2i;
        sr += k2r;
        si += k2i;
        sr += k3r;
        si += k3i;
        sr += k3r;
        si += k3i;
        sr += k4r;
        si += k4i;
        const double nr = xr + h6 * sr;
        const double ni = xi + h6 * si;
        zre[i] = nr;
        zim[i] = ni;
        if (min_dist_sq) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < nf; ++j) {
                const double dre = nr - lam1[j];
                const double d2 = dre * dre + ni * ni;
                best = d2 < best ? d2 : best;
            }
            min_dist_sq[i] = best;
        }
    }
}

const Table table = {
    "scalar",
    bessel_step_scalar,
    min_update_scalar,
    max_abs_diff_sq_scalar,
    loewner_rk4_substep_scalar,
};

} // namespace

const Table& scalar_table() { return table; }

} // namespace msle::kernels
