#include "dg/model.hpp"

#include <cmath>

#include "dg/errors.hpp"

namespace dg {

std::vector<std::string> ModelParams::violations() const {
    std::vector<std::string> v;
    if (gamma1 < 0.0) v.push_back("model.gamma1 must be >= 0");
    if (gamma2 < 0.0) v.push_back("model.gamma2 must be >= 0");
    if (gamma1 == 0.0 && gamma2 == 0.0)
        v.push_back("model.gamma1 and model.gamma2 must not both be zero");
    if (cutoff < 4)
        v.push_back("model.cutoff must be >= 4 (two-photon operators need |0>..|3>)");
    for (auto [val, name] : {std::pair{delta, "model.delta"}, {u, "model.u"},
                             {g2, "model.g2"}, {j_hop, "model.j_hop"},
                             {gamma1, "model.gamma1"}, {gamma2, "model.gamma2"}})
        if (!std::isfinite(val)) v.push_back(std::string(name) + " must be finite");
    return v;
}

LocalModel build_local_model(const ModelParams& p) {
    if (auto v = p.violations(); !v.empty())
        throw ConfigError("invalid model parameters", std::move(v));

    const std::size_t d = p.cutoff;
    const LocalOperator a = annihilation_op(d);
    const LocalOperator ad = adjoint(a);
    const LocalOperator n = number_op(d);
    const LocalOperator a2 = a * a;
    const LocalOperator ad2 = ad * ad;

    LocalModel m;
    m.params = p;
    // delta*N + (u/2) a†a†aa + (g2/2)(a†² + a²); a†a†aa = N(N-1) on the
    // number basis, so only the drive is off-diagonal.
    m.h_local = cplx{p.delta, 0.0} * n + cplx{0.5 * p.u, 0.0} * (ad2 * a2) +
                cplx{0.5 * p.g2, 0.0} * (ad2 + a2);
    m.k1 = cplx{std::sqrt(p.gamma1), 0.0} * a;
    m.k2 = cplx{std::sqrt(p.gamma2), 0.0} * a2;
    m.damping = cplx{0.5, 0.0} *
                (adjoint(m.k1) * m.k1 + adjoint(m.k2) * m.k2);
    m.hop_coefficient = p.j_hop;
    return m;
}

LocalOperator mean_field_hamiltonian(const LocalModel& m, cplx neighbor_sum) {
    const std::size_t d = m.params.cutoff;
    const double mj = -m.hop_coefficient;
    LocalOperator op(d);
    // -J (conj(ns)·a + ns·a†): bidiagonal, filled directly.
    for (std::size_t k = 1; k < d; ++k) {
        const double s = std::sqrt(static_cast<double>(k));
        op.at(k - 1, k) = mj * s * std::conj(neighbor_sum);
        op.at(k, k - 1) = mj * s * neighbor_sum;
    }
    return op;
}

}  // namespace dg
