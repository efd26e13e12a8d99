#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace dg::kernels {

using cplx = std::complex<double>;

/// Dense complex vector primitives used by the per-site integrator loop
/// and the small-operator algebra. One implementation table per backend;
/// all backends compute the same quantities and are equivalence-tested
/// against the scalar reference.
struct Ops {
    const char* name;

    /// y += a*x
    void (*axpy)(std::size_t n, cplx a, const cplx* x, cplx* y);

    /// sum_i conj(x_i) * y_i
    cplx (*cdotc)(std::size_t n, const cplx* x, const cplx* y);

    /// sum_i |x_i|^2
    double (*norm2)(std::size_t n, const cplx* x);

    /// x *= a
    void (*scale_real)(std::size_t n, double a, cplx* x);

    /// y_i = d_i * x_i, complex diagonal
    void (*diag_mul)(std::size_t n, const cplx* d, const cplx* x, cplx* y);

    /// y_i = d_i * x_i, real diagonal (ladder-coefficient tables)
    void (*diag_mul_real)(std::size_t n, const double* d, const cplx* x, cplx* y);

    /// y = M x with M a dense row-major d-by-d complex matrix
    void (*matvec)(std::size_t d, const cplx* m, const cplx* x, cplx* y);

    /// out_i = (psi_i + sum_k c_k * vecs_k_i) * e_i
    ///
    /// The fused state-update kernel: drift/noise accumulation over up to
    /// `npairs` ladder vectors followed by the diagonal propagator factor.
    /// Pass e == nullptr to skip the final diagonal multiply.
    void (*assemble)(std::size_t n, const cplx* psi, const cplx* c,
                     const cplx* const* vecs, std::size_t npairs,
                     const cplx* e, cplx* out);
};

/// Scalar reference backend; always available.
const Ops& scalar_ops();

/// AVX2+FMA backend, or nullptr when unavailable (not compiled in, or the
/// CPU lacks the instruction sets).
const Ops* avx2_ops();

/// Backend chosen at startup: AVX2 when the CPU supports it, otherwise
/// scalar. The DG_SIMD environment variable ("scalar" or "avx2") forces a
/// backend; forcing an unavailable one throws dg::Error.
const Ops& active();

/// Names of the backends compiled into this binary.
std::string available_backends();

}  // namespace dg::kernels
