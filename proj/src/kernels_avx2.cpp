// AVX2+FMA backend. This translation unit is compiled with -mavx2 -mfma
// (see CMakeLists); everything is guarded so the build still works on
// toolchains without those flags, in which case the table is absent and
// dispatch stays on the scalar backend.
//
// Layout note: std::complex<double> is guaranteed to be laid out as
// [re, im] pairs, so a complex array is a packed double array and one
// 256-bit vector holds two complex numbers.

#include "dg/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace dg::kernels {
namespace {

inline const double* dp(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

/// Two complex products per vector: (x0*y0, x1*y1).
inline __m256d cmul(__m256d x, __m256d y) {
    __m256d yr = _mm256_movedup_pd(y);                          // [c, c, d, d]
    __m256d yi = _mm256_unpackhi_pd(y, y);                      // [ci, ci, di, di]
    __m256d t = _mm256_mul_pd(_mm256_permute_pd(x, 0x5), yi);   // [xi*ci, xr*ci, ...]
    return _mm256_fmaddsub_pd(x, yr, t);
}

/// Complex scalar times two-complex vector, scalar pre-broadcast.
inline __m256d cmul_bcast(__m256d ar, __m256d ai, __m256d x) {
    __m256d t = _mm256_mul_pd(_mm256_permute_pd(x, 0x5), ai);
    return _mm256_fmaddsub_pd(x, ar, t);
}

void axpy_v(std::size_t n, cplx a, const cplx* x, cplx* y) {
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = _mm256_loadu_pd(dp(x + i));
        __m256d yv = _mm256_loadu_pd(dp(y + i));
        _mm256_storeu_pd(dp(y + i), _mm256_add_pd(yv, cmul_bcast(ar, ai, xv)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

cplx cdotc_v(std::size_t n, const cplx* x, const cplx* y) {
    // re = sum(xr*yr + xi*yi); im = sum(xr*yi - xi*yr). The imaginary part
    // accumulates (odd lane - even lane) of permute(x)*y via a sign mask.
    const __m256d negeven = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
    __m256d accr = _mm256_setzero_pd();
    __m256d acci = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = _mm256_loadu_pd(dp(x + i));
        __m256d yv = _mm256_loadu_pd(dp(y + i));
        accr = _mm256_fmadd_pd(xv, yv, accr);
        __m256d t = _mm256_mul_pd(_mm256_permute_pd(xv, 0x5), yv);
        acci = _mm256_add_pd(acci, _mm256_xor_pd(t, negeven));
    }
    double re = hsum(accr), im = hsum(acci);
    for (; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

double norm2_v(std::size_t n, const cplx* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = _mm256_loadu_pd(dp(x + i));
        acc = _mm256_fmadd_pd(xv, xv, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i)
        r += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return r;
}

void scale_real_v(std::size_t n, double a, cplx* x) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        _mm256_storeu_pd(dp(x + i), _mm256_mul_pd(av, _mm256_loadu_pd(dp(x + i))));
    for (; i < n; ++i) x[i] *= a;
}

void diag_mul_v(std::size_t n, const cplx* d, const cplx* x, cplx* y) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d dv = _mm256_loadu_pd(dp(d + i));
        __m256d xv = _mm256_loadu_pd(dp(x + i));
        _mm256_storeu_pd(dp(y + i), cmul(dv, xv));
    }
    for (; i < n; ++i) y[i] = d[i] * x[i];
}

void diag_mul_real_v(std::size_t n, const double* d, const cplx* x, cplx* y) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        // [d0, d1] -> [d0, d0, d1, d1]
        __m256d dd = _mm256_permute4x64_pd(
            _mm256_castpd128_pd256(_mm_loadu_pd(d + i)), 0x50);
        _mm256_storeu_pd(dp(y + i), _mm256_mul_pd(dd, _mm256_loadu_pd(dp(x + i))));
    }
    for (; i < n; ++i) y[i] = d[i] * x[i];
}

void matvec_v(std::size_t d, const cplx* m, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < d; ++i) {
        const cplx* row = m + i * d;
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 2 <= d; j += 2)
            acc = _mm256_add_pd(acc, cmul(_mm256_loadu_pd(dp(row + j)),
                                          _mm256_loadu_pd(dp(x + j))));
        // fold the two complex lanes
        __m128d lo = _mm256_castpd256_pd128(acc);
        __m128d hi = _mm256_extractf128_pd(acc, 1);
        lo = _mm_add_pd(lo, hi);
        cplx r{_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo))};
        for (; j < d; ++j) r += row[j] * x[j];
        y[i] = r;
    }
}

constexpr std::size_t kMaxPairs = 8;

void assemble_v(std::size_t n, const cplx* psi, const cplx* c,
                const cplx* const* vecs, std::size_t npairs, const cplx* e,
                cplx* out) {
    if (npairs > kMaxPairs) {  // not reached by the integrator; keep exact semantics
        scalar_ops().assemble(n, psi, c, vecs, npairs, e, out);
        return;
    }
    __m256d cr[kMaxPairs], ci[kMaxPairs];
    for (std::size_t k = 0; k < npairs; ++k) {
        cr[k] = _mm256_set1_pd(c[k].real());
        ci[k] = _mm256_set1_pd(c[k].imag());
    }
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d acc = _mm256_loadu_pd(dp(psi + i));
        for (std::size_t k = 0; k < npairs; ++k)
            acc = _mm256_add_pd(
                acc, cmul_bcast(cr[k], ci[k], _mm256_loadu_pd(dp(vecs[k] + i))));
        if (e) acc = cmul(_mm256_loadu_pd(dp(e + i)), acc);
        _mm256_storeu_pd(dp(out + i), acc);
    }
    for (; i < n; ++i) {
        cplx acc = psi[i];
        for (std::size_t k = 0; k < npairs; ++k) acc += c[k] * vecs[k][i];
        out[i] = e ? e[i] * acc : acc;
    }
}

}  // namespace

namespace detail {
const Ops* avx2_table() {
    static const Ops table{
        "avx2",       axpy_v,     cdotc_v,         norm2_v,
        scale_real_v, diag_mul_v, diag_mul_real_v, matvec_v, assemble_v,
    };
    return &table;
}
}  // namespace detail

}  // namespace dg::kernels

#else  // no AVX2/FMA at compile time

namespace dg::kernels::detail {
const Ops* avx2_table() { return nullptr; }
}  // namespace dg::kernels::detail

#endif
