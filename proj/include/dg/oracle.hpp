#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dg/lattice.hpp"
#include "dg/model.hpp"

namespace dg {

/// Exact dense master-equation integration for one or two sites. This path
/// deliberately shares no machinery with the stochastic integrator: it is
/// the verification backend the trajectory method is tested against.

Eigen::MatrixXcd to_eigen(const LocalOperator& op);
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Literal right-hand side of the master equation,
///   -i[H, rho] + sum_k (K rho K† - ½{K†K, rho}),
/// written directly in dense matrix algebra. The production integrator
/// uses a faster ladder-structured evaluation that is equivalence-tested
/// against this form.
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                              const Eigen::MatrixXcd& ham,
                              const std::vector<Eigen::MatrixXcd>& jumps);

struct LindbladResult {
    std::vector<double> times;
    std::vector<double> n_exp;     // samples × sites
    std::vector<cplx> a_exp;       // samples × sites
    std::vector<cplx> cross_corr;  // ⟨a†_0 a_1⟩ per sample (two sites only)

    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    bool steady_reached = false;
    double t_steady = -1.0;
    Eigen::MatrixXcd rho_final;
    std::size_t total_dim = 0;
    int sites = 1;
};

/// Classic 4th-order deterministic integration of the master equation.
/// sites must be 1 or 2; the total dimension d^sites must not exceed
/// dim_cap. Two-site runs include the hopping term -J(a0 a1† + a0† a1).
/// Vacuum initial state unless rho0 (D×D, trace 1) is given. t_steady
/// records the first time the entrywise L1 norm of the right-hand side
/// falls below steady_tol; integration always continues to t_final so
/// every requested sample exists.
LindbladResult evolve_exact(const ModelParams& p, int sites, double t_final,
                            double dt_rk, double sample_interval,
                            std::size_t dim_cap = 400, double steady_tol = 1e-9,
                            const Eigen::MatrixXcd* rho0 = nullptr);

/// Steady-state ⟨n⟩ computed with dt halving until two consecutive answers
/// agree to `tol`; the reference-constant generator for oracle-vs-ensemble
/// comparisons.
double steady_state_n(const ModelParams& p, double tol = 1e-6,
                      double t_final = 50.0);

/// Jump (Poisson) unraveling of the same product-state dynamics:
/// deterministic non-Hermitian drift plus stochastic applications of the
/// loss operators at their expected rates. Kept as a comparator only — it
/// is expected to produce exactly zero local coherence from vacuum.
struct JumpCompareResult {
    std::vector<double> times;
    std::vector<double> n_mean;       // ensemble-mean ⟨n⟩, spatial average
    double max_abs_a = 0.0;           // over all sites, samples, trajectories
    long jumps_k1 = 0, jumps_k2 = 0;  // total jump counts
};

JumpCompareResult jump_gutzwiller_compare(const ModelParams& p,
                                          const LatticeGeometry& geom,
                                          long n_traj, double t_final,
                                          double dt, double sample_interval,
                                          std::uint64_t master_seed);

}  // namespace dg
