#include "dg/kernels.hpp"

// Scalar reference implementations. These define the semantics the SIMD
// backends must reproduce; keep them simple and obviously correct.

namespace dg::kernels {
namespace {

void axpy_s(std::size_t n, cplx a, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

cplx cdotc_s(std::size_t n, const cplx* x, const cplx* y) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

double norm2_s(std::size_t n, const cplx* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return acc;
}

void scale_real_s(std::size_t n, double a, cplx* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void diag_mul_s(std::size_t n, const cplx* d, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
}

void diag_mul_real_s(std::size_t n, const double* d, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
}

void matvec_s(std::size_t d, const cplx* m, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < d; ++i) {
        cplx acc{0.0, 0.0};
        const cplx* row = m + i * d;
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

void assemble_s(std::size_t n, const cplx* psi, const cplx* c,
                const cplx* const* vecs, std::size_t npairs, const cplx* e,
                cplx* out) {
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = psi[i];
        for (std::size_t k = 0; k < npairs; ++k) acc += c[k] * vecs[k][i];
        out[i] = e ? e[i] * acc : acc;
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{
        "scalar",   axpy_s,          cdotc_s,  norm2_s,
        scale_real_s, diag_mul_s, diag_mul_real_s, matvec_s, assemble_s,
    };
    return table;
}

}  // namespace dg::kernels
