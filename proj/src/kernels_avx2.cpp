// AVX2 variants of the kernels in kernels_scalar.cpp. Same operation order,
// mul/add kept separate (no FMA), so results are bit-identical to the scalar
// reference. Compiled with -mavx2 for this translation unit only; dispatch
// guards execution at runtime.

#include "msle/kernels.hpp"

#ifdef __AVX2__

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace msle::kernels {
namespace {

inline double scalar_bessel_step_one(double x, double dw, double two_c_dt) {
    const double u = x + dw;
    const double r = std::sqrt(u * u + two_c_dt);
    return 0.5 * (u + r);
}

void bessel_step_avx2(const double* x, const double* dw, double two_c_dt, double* out,
                      std::size_t n) {
    const __m256d c = _mm256_set1_pd(two_c_dt);
    const __m256d half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d u = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(dw + i));
        const __m256d r = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(u, u), c));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(half, _mm256_add_pd(u, r)));
    }
    for (; i < n; ++i) out[i] = scalar_bessel_step_one(x[i], dw[i], two_c_dt);
}

void min_update_avx2(double* m, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(m + i, _mm256_min_pd(_mm256_loadu_pd(m + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) m[i] = x[i] < m[i] ? x[i] : m[i];
}

inline double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

double max_abs_diff_sq_avx2(const double* are, const double* aim, const double* bre,
                            const double* bim, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(are + i), _mm256_loadu_pd(bre + i));
        const __m256d di = _mm256_sub_pd(_mm256_loadu_pd(aim + i), _mm256_loadu_pd(bim + i));
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dr, dr), _mm256_mul_pd(di, di));
        acc = _mm256_max_pd(acc, d2);
    }
    double best = hmax(acc);
    for (; i < n; ++i) {
        const double dr = are[i] - bre[i];
        const double di = aim[i] - bim[i];
        const double d2 = dr * dr + di * di;
        best = d2 > best ? d2 : best;
    }
    return best;
}

inline void field_v(__m256d zre, __m256d zim, const double* lam, std::size_t nf, __m256d coeff,
                    __m256d& kre, __m256d& kim) {
    __m256d sre = _mm256_setzero_pd();
    __m256d sim = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    for (std::size_t j = 0; j < nf; ++j) {
        const __m256d dre = _mm256_sub_pd(zre, _mm256_set1_pd(lam[j]));
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dre, dre), _mm256_mul_pd(zim, zim));
        const __m256d rd = _mm256_div_pd(one, d2);
        sre = _mm256_add_pd(sre, _mm256_mul_pd(dre, rd));
        sim = _mm256_sub_pd(sim, _mm256_mul_pd(zim, rd));
    }
    kre = _mm256_mul_pd(coeff, sre);
    kim = _mm256_mul_pd(coeff, sim);
}

void loewner_rk4_substep_avx2(double* zre, double* zim, const std::uint8_t* alive, std::size_t n,
                              const double* lam0, const double* lamm, const double* lam1,
                              std::size_t nf, double coeff, double h, double* min_dist_sq) {
    const __m256d vc = _mm256_set1_pd(coeff);
    const __m256d vh2 = _mm256_set1_pd(0.5 * h);
    const __m256d vh = _mm256_set1_pd(h);
    const __m256d vh6 = _mm256_set1_pd(h / 6.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xr = _mm256_loadu_pd(zre + i);
        const __m256d xi = _mm256_loadu_pd(zim + i);
        __m256d k1r, k1i, k2r, k2i, k3r, k3i, k4r, k4i;
        field_v(xr, xi, lam0, nf, vc, k1r, k1i);
        field_v(_mm256_add_pd(xr, _mm256_mul_pd(vh2, k1r)),
                _mm256_add_pd(xi, _mm256_mul_pd(vh2, k1i)), lamm, nf, vc, k2r, k2i);
        field_v(_mm256_add_pd(xr, _mm256_mul_pd(vh2, k2r)),
                _mm256_add_pd(xi, _mm256_mul_pd(vh2, k2i)), lamm, nf, vc, k3r, k3i);
        field_v(_mm256_add_pd(xr, _mm256_mul_pd(vh, k3r)),
                _mm256_add_pd(xi, _mm256_mul_pd(vh, k3i)), lam1, nf, vc, k4r, k4i);
        __m256d sr = _mm256_add_pd(k1r, k2r);
        __m256d si = _mm256_add_pd(k1i, k2i);
        sr = _mm256_add_pd(sr, k2r);
        si = _mm256_add_pd(si, k2i);
        sr = _mm256_add_pd(sr, k3r);
        si = _mm256_add_pd(si, k3i);
        sr = _mm256_add_pd(sr, k3r);
        si = _mm256_add_pd(si, k3i);
        sr = _mm256_add_pd(sr, k4r);
        si = _mm256_add_pd(si, k4i);
        const __m256d nr = _mm256_add_pd(xr, _mm256_mul_pd(vh6, sr));
        const __m256d ni = _mm256_add_pd(xi, _mm256_mul_pd(vh6, si));

        // dead lanes keep their frozen values
        __m256d mask;
        if (alive) {
            mask = _mm256_castsi256_pd(_mm256_setr_epi64x(
                alive[i] ? -1 : 0, alive[i + 1] ? -1 : 0, alive[i + 2] ? -1 : 0,
                alive[i + 3] ? -1 : 0));
        } else {
            mask = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
        }
        _mm256_storeu_pd(zre + i, _mm256_blendv_pd(xr, nr, mask));
        _mm256_storeu_pd(zim + i, _mm256_blendv_pd(xi, ni, mask));

        if (min_dist_sq) {
            __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
            for (std::size_t j = 0; j < nf; ++j) {
                const __m256d dre = _mm256_sub_pd(nr, _mm256_set1_pd(lam1[j]));
                const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dre, dre), _mm256_mul_pd(ni, ni));
                best = _mm256_min_pd(best, d2);
            }
            const __m256d old = _mm256_loadu_pd(min_dist_sq + i);
            _mm256_storeu_pd(min_dist_sq + i, _mm256_blendv_pd(old, best, mask));
        }
    }
    if (i < n) {
        scalar_table().loewner_rk4_substep(zre + i, zim + i, alive ? alive + i : nullptr, n - i,
                                           lam0, lamm, lam1, nf, coeff, h,
                                           min_dist_sq ? min_dist_sq + i : nullptr);
    }
}

const Table table = {
    "avx2",
    bessel_step_avx2,
    min_update_avx2,
    max_abs_diff_sq_avx2,
    loewner_rk4_substep_avx2,
};

} // namespace

const Table* avx2_table() {
    return __builtin_cpu_supports("avx2") ? &table : nullptr;
}

} // namespace msle::kernels

#else // !__AVX2__

namespace msle::kernels {
const Table* avx2_table() { return nullptr; }
} // namespace msle::kernels

#endif
