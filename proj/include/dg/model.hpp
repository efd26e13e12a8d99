#pragma once

#include <string>
#include <vector>

#include "dg/fock.hpp"

namespace dg {

/// Physical couplings, all rates in units of the reference loss rate.
struct ModelParams {
    double delta = 0.0;   ///< detuning of the on-site number term
    double u = 0.0;       ///< Kerr (two-body) interaction strength
    double g2 = 0.0;      ///< two-photon drive amplitude
    double j_hop = 0.0;   ///< nearest-neighbor hopping
    double gamma1 = 1.0;  ///< single-photon loss rate
    double gamma2 = 1.0;  ///< two-photon loss rate
    std::size_t cutoff = 15;  ///< local Fock dimension d

    /// All invariant violations, empty when valid.
    std::vector<std::string> violations() const;
};

/// Per-site operators of the model, precomputed once per run and shared
/// read-only across workers.
struct LocalModel {
    ModelParams params;
    LocalOperator h_local;  ///< delta*N + (u/2) a†a†aa + (g2/2)(a†² + a²)
    LocalOperator k1;       ///< sqrt(gamma1) * a
    LocalOperator k2;       ///< sqrt(gamma2) * a²
    LocalOperator damping;  ///< ½(k1†k1 + k2†k2), diagonal and PSD
    double hop_coefficient = 0.0;  ///< J
};

/// Throws ConfigError listing every violated invariant.
LocalModel build_local_model(const ModelParams& p);

/// -J (conj(neighbor_sum)·a + neighbor_sum·a†), the effective hopping term
/// seen by one site given the sum of its neighbors' ⟨a⟩ values.
LocalOperator mean_field_hamiltonian(const LocalModel& m, cplx neighbor_sum);

}  // namespace dg
