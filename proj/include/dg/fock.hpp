#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace dg {

using cplx = std::complex<double>;

/// Dense operator on a single truncated Fock space, row-major, indexed by
/// occupation number 0..dim-1 (lowest occupation first). Values are
/// immutable by convention once built and safe to share across threads.
struct LocalOperator {
    std::size_t dim = 0;
    std::vector<cplx> entries;  // dim*dim, row-major

    LocalOperator() = default;
    explicit LocalOperator(std::size_t d) : dim(d), entries(d * d, cplx{0.0, 0.0}) {}

    cplx& at(std::size_t m, std::size_t n) { return entries[m * dim + n]; }
    const cplx& at(std::size_t m, std::size_t n) const { return entries[m * dim + n]; }
};

/// a: entries[n-1][n] = sqrt(n). Throws DimensionError for d < 2.
LocalOperator annihilation_op(std::size_t d);

/// a† = adjoint(a).
LocalOperator creation_op(std::size_t d);

/// N = a†a, diagonal (0, 1, ..., d-1).
LocalOperator number_op(std::size_t d);

LocalOperator identity_op(std::size_t d);

LocalOperator adjoint(const LocalOperator& op);

LocalOperator operator+(const LocalOperator& x, const LocalOperator& y);
LocalOperator operator-(const LocalOperator& x, const LocalOperator& y);
LocalOperator operator*(const LocalOperator& x, const LocalOperator& y);
LocalOperator operator*(cplx s, const LocalOperator& x);

/// y = op * v. Throws DimensionError on length mismatch.
void apply_into(const LocalOperator& op, const cplx* v, cplx* y);
std::vector<cplx> apply(const LocalOperator& op, const std::vector<cplx>& v);

/// ⟨v|op|v⟩ for a normalized v. Norm and dimension preconditions are
/// enforced in debug builds only; the release path stays branch-light.
cplx expectation(const LocalOperator& op, const std::vector<cplx>& v);

/// max_{m,n} |A[m][n] - conj(A[n][m])|
double hermiticity_error(const LocalOperator& op);

}  // namespace dg
