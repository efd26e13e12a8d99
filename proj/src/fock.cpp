#include "dg/fock.hpp"

#include <cassert>
#include <cmath>

#include "dg/errors.hpp"
#include "dg/kernels.hpp"

namespace dg {

LocalOperator annihilation_op(std::size_t d) {
    if (d < 2)
        throw DimensionError("annihilation_op: dimension must be >= 2, got " +
                             std::to_string(d));
    LocalOperator op(d);
    for (std::size_t n = 1; n < d; ++n)
        op.at(n - 1, n) = std::sqrt(static_cast<double>(n));
    return op;
}

LocalOperator creation_op(std::size_t d) { return adjoint(annihilation_op(d)); }

LocalOperator number_op(std::size_t d) {
    if (d < 2)
        throw DimensionError("number_op: dimension must be >= 2, got " +
                             std::to_string(d));
    LocalOperator op(d);
    for (std::size_t n = 0; n < d; ++n) op.at(n, n) = static_cast<double>(n);
    return op;
}

LocalOperator identity_op(std::size_t d) {
    LocalOperator op(d);
    for (std::size_t n = 0; n < d; ++n) op.at(n, n) = 1.0;
    return op;
}

LocalOperator adjoint(const LocalOperator& op) {
    LocalOperator out(op.dim);
    for (std::size_t m = 0; m < op.dim; ++m)
        for (std::size_t n = 0; n < op.dim; ++n)
            out.at(m, n) = std::conj(op.at(n, m));
    return out;
}

static void require_same_dim(const LocalOperator& x, const LocalOperator& y,
                             const char* what) {
    if (x.dim != y.dim)
        throw DimensionError(std::string(what) + ": dimension mismatch " +
                             std::to_string(x.dim) + " vs " + std::to_string(y.dim));
}

LocalOperator operator+(const LocalOperator& x, const LocalOperator& y) {
    require_same_dim(x, y, "operator+");
    LocalOperator out(x.dim);
    for (std::size_t i = 0; i < out.entries.size(); ++i)
        out.entries[i] = x.entries[i] + y.entries[i];
    return out;
}

LocalOperator operator-(const LocalOperator& x, const LocalOperator& y) {
    require_same_dim(x, y, "operator-");
    LocalOperator out(x.dim);
    for (std::size_t i = 0; i < out.entries.size(); ++i)
        out.entries[i] = x.entries[i] - y.entries[i];
    return out;
}

LocalOperator operator*(const LocalOperator& x, const LocalOperator& y) {
    require_same_dim(x, y, "operator*");
    const std::size_t d = x.dim;
    LocalOperator out(d);
    for (std::size_t m = 0; m < d; ++m)
        for (std::size_t k = 0; k < d; ++k) {
            const cplx xv = x.at(m, k);
            if (xv == cplx{0.0, 0.0}) continue;
            for (std::size_t n = 0; n < d; ++n) out.at(m, n) += xv * y.at(k, n);
        }
    return out;
}

LocalOperator operator*(cplx s, const LocalOperator& x) {
    LocalOperator out(x.dim);
    for (std::size_t i = 0; i < out.entries.size(); ++i)
        out.entries[i] = s * x.entries[i];
    return out;
}

void apply_into(const LocalOperator& op, const cplx* v, cplx* y) {
    kernels::active().matvec(op.dim, op.entries.data(), v, y);
}

std::vector<cplx> apply(const LocalOperator& op, const std::vector<cplx>& v) {
    if (v.size() != op.dim)
        throw DimensionError("apply: vector length " + std::to_string(v.size()) +
                             " does not match operator dimension " +
                             std::to_string(op.dim));
    std::vector<cplx> y(op.dim);
    apply_into(op, v.data(), y.data());
    return y;
}

cplx expectation(const LocalOperator& op, const std::vector<cplx>& v) {
    assert(v.size() == op.dim);
#ifndef NDEBUG
    {
        const double norm = std::sqrt(kernels::active().norm2(v.size(), v.data()));
        assert(std::abs(norm - 1.0) < 1e-10 && "expectation requires a normalized state");
    }
#endif
    std::vector<cplx> y(op.dim);
    apply_into(op, v.data(), y.data());
    return kernels::active().cdotc(op.dim, v.data(), y.data());
}

double hermiticity_error(const LocalOperator& op) {
    double worst = 0.0;
    for (std::size_t m = 0; m < op.dim; ++m)
        for (std::size_t n = 0; n < op.dim; ++n)
            worst = std::max(worst, std::abs(op.at(m, n) - std::conj(op.at(n, m))));
    return worst;
}

}  // namespace dg
