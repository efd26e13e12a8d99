#include "dg/oracle.hpp"

#include <cmath>

#include "dg/errors.hpp"
#include "dg/fock.hpp"
#include "dg/kernels.hpp"
#include "dg/rng.hpp"

namespace dg {

Eigen::MatrixXcd to_eigen(const LocalOperator& op) {
    const auto d = static_cast<Eigen::Index>(op.dim);
    Eigen::MatrixXcd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = op.at(r, c);
    return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                              const Eigen::MatrixXcd& ham,
                              const std::vector<Eigen::MatrixXcd>& jumps) {
    if (rho.rows() != rho.cols() || ham.rows() != rho.rows() ||
        ham.cols() != rho.cols())
        throw DimensionError("lindblad_rhs: dimension mismatch between rho and H");
    const cplx mi{0.0, -1.0};
    Eigen::MatrixXcd out = mi * (ham * rho - rho * ham);
    for (const auto& k : jumps) {
        if (k.rows() != rho.rows() || k.cols() != rho.cols())
            throw DimensionError("lindblad_rhs: jump operator dimension mismatch");
        const Eigen::MatrixXcd kdk = k.adjoint() * k;
        out += k * rho * k.adjoint() - 0.5 * (kdk * rho + rho * kdk);
    }
    return out;
}

namespace {

// Fast evaluation path used by the integrator. Every jump operator here is
// a pure lowering ladder a^k on one subsystem, so the sandwich K rho K†
// and the anticommutator with the (diagonal) K†K cost O(D²) instead of a
// dense product. The Hamiltonian commutator remains one dense product plus
// an adjoint. Equivalence with lindblad_rhs is covered by unit tests.
struct FastLindblad {
    Eigen::Index d = 0;       // per-site dimension
    int sites = 1;
    Eigen::Index dim = 0;     // total dimension d^sites
    Eigen::MatrixXcd h;       // full Hamiltonian, dense
    std::vector<double> wdiag;  // Σ_k (K†K)_rr, diagonal
    double gamma1 = 0.0, gamma2 = 0.0;
    std::vector<double> c1, c2;  // sqrt(n), sqrt(n(n-1))

    Eigen::Index stride(int sub) const { return sub == 0 && sites == 2 ? d : 1; }
    Eigen::Index sub_index(Eigen::Index r, int sub) const {
        return sub == 0 && sites == 2 ? r / d : r % d;
    }

    // out = (a^k on subsystem `sub`) * rho, scaled by `scale`
    void lmul_ladder(const Eigen::MatrixXcd& rho, int sub, int k, double scale,
                     Eigen::MatrixXcd& out) const {
        out.setZero();
        const Eigen::Index st = stride(sub);
        const std::vector<double>& tab = (k == 1) ? c1 : c2;
        for (Eigen::Index r = 0; r < dim; ++r) {
            const Eigen::Index m = sub_index(r, sub);
            if (m + k > d - 1) continue;
            const double coeff = scale * tab[m + k];
            out.row(r) = coeff * rho.row(r + k * st);
        }
    }

    // out = rho * (a†^k on subsystem `sub`), in place over a scratch input
    void rmul_ladder_dag(const Eigen::MatrixXcd& rho, int sub, int k,
                         Eigen::MatrixXcd& out) const {
        out.setZero();
        const Eigen::Index st = stride(sub);
        const std::vector<double>& tab = (k == 1) ? c1 : c2;
        for (Eigen::Index c = 0; c < dim; ++c) {
            const Eigen::Index m = sub_index(c, sub);
            if (m + k > d - 1) continue;
            out.col(c) = tab[m + k] * rho.col(c + k * st);
        }
    }

    void rhs(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out,
             Eigen::MatrixXcd& t1, Eigen::MatrixXcd& t2) const {
        // -i(H rho - (H rho)†): exact for Hermitian rho, and keeps every
        // Runge-Kutta stage exactly Hermitian.
        t1.noalias() = h * rho;
        out = cplx{0.0, -1.0} * (t1 - t1.adjoint());
        for (int sub = 0; sub < sites; ++sub) {
            if (gamma1 != 0.0) {
                lmul_ladder(rho, sub, 1, 1.0, t1);
                rmul_ladder_dag(t1, sub, 1, t2);
                out += gamma1 * t2;
            }
            if (gamma2 != 0.0) {
                lmul_ladder(rho, sub, 2, 1.0, t1);
                rmul_ladder_dag(t1, sub, 2, t2);
                out += gamma2 * t2;
            }
        }
        for (Eigen::Index r = 0; r < dim; ++r)
            for (Eigen::Index c = 0; c < dim; ++c)
                out(r, c) -= 0.5 * (wdiag[r] + wdiag[c]) * rho(r, c);
    }
};

FastLindblad make_fast(const ModelParams& p, int sites) {
    const auto d = static_cast<Eigen::Index>(p.cutoff);
    FastLindblad f;
    f.d = d;
    f.sites = sites;
    f.dim = sites == 2 ? d * d : d;
    f.gamma1 = p.gamma1;
    f.gamma2 = p.gamma2;
    f.c1.resize(d + 2, 0.0);
    f.c2.resize(d + 2, 0.0);
    for (Eigen::Index n = 0; n <= d + 1; ++n) {
        f.c1[n] = std::sqrt(static_cast<double>(n));
        f.c2[n] = std::sqrt(static_cast<double>(n) * static_cast<double>(n - 1));
    }

    const LocalModel lm = build_local_model(p);
    const Eigen::MatrixXcd h1 = to_eigen(lm.h_local);
    if (sites == 1) {
        f.h = h1;
    } else {
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
        const Eigen::MatrixXcd a = to_eigen(annihilation_op(p.cutoff));
        const Eigen::MatrixXcd ad = a.adjoint();
        f.h = kron(h1, id) + kron(id, h1) -
              p.j_hop * (kron(a, ad) + kron(ad, a));
    }
    f.wdiag.resize(f.dim);
    for (Eigen::Index r = 0; r < f.dim; ++r) {
        double w = 0.0;
        for (int sub = 0; sub < sites; ++sub) {
            const double n = static_cast<double>(f.sub_index(r, sub));
            w += p.gamma1 * n + p.gamma2 * n * (n - 1.0);
        }
        f.wdiag[r] = w;
    }
    return f;
}

}  // namespace

LindbladResult evolve_exact(const ModelParams& p, int sites, double t_final,
                            double dt_rk, double sample_interval,
                            std::size_t dim_cap, double steady_tol,
                            const Eigen::MatrixXcd* rho0) {
    if (sites != 1 && sites != 2)
        throw ConfigError("exact integration supports 1 or 2 sites, got " +
                          std::to_string(sites));
    if (auto v = p.violations(); !v.empty())
        throw ConfigError("invalid model parameters", std::move(v));
    const std::size_t total = sites == 2 ? p.cutoff * p.cutoff : p.cutoff;
    if (total > dim_cap)
        throw ConfigError("total dimension " + std::to_string(total) +
                          " exceeds the cap " + std::to_string(dim_cap));
    if (dt_rk <= 0.0 || sample_interval < dt_rk)
        throw ConfigError("need 0 < dt_rk <= sample_interval");
    const long per = std::lround(sample_interval / dt_rk);
    if (std::abs(per * dt_rk - sample_interval) > 1e-9 * sample_interval)
        throw ConfigError("sample_interval must be an integer multiple of dt_rk");
    const long n_intervals = std::lround(t_final / sample_interval);
    if (std::abs(n_intervals * sample_interval - t_final) >
        1e-9 * std::max(t_final, 1.0))
        throw ConfigError("t_final must be an integer multiple of sample_interval");

    const FastLindblad fast = make_fast(p, sites);
    const Eigen::Index D = fast.dim;
    const Eigen::Index d = fast.d;

    Eigen::MatrixXcd rho;
    if (rho0 != nullptr) {
        if (rho0->rows() != D || rho0->cols() != D)
            throw DimensionError("initial density matrix has wrong dimension");
        rho = *rho0;
    } else {
        rho = Eigen::MatrixXcd::Zero(D, D);
        rho(0, 0) = 1.0;
    }

    LindbladResult res;
    res.sites = sites;
    res.total_dim = total;
    res.min_eigenvalue = 1.0;

    Eigen::MatrixXcd k1(D, D), k2(D, D), k3(D, D), k4(D, D), t1(D, D), t2(D, D),
        stage(D, D);

    auto sample = [&](double t) {
        res.times.push_back(t);
        for (int sub = 0; sub < sites; ++sub) {
            const Eigen::Index st = fast.stride(sub);
            double nexp = 0.0;
            cplx aexp{0.0, 0.0};
            for (Eigen::Index r = 0; r < D; ++r) {
                const Eigen::Index m = fast.sub_index(r, sub);
                nexp += static_cast<double>(m) * rho(r, r).real();
                if (m >= 1) aexp += fast.c1[m] * rho(r - st, r);
            }
            res.n_exp.push_back(nexp);
            res.a_exp.push_back(aexp);
        }
        if (sites == 2) {
            // ⟨a†_0 a_1⟩ = tr(rho a†_0 a_1)
            cplx cc{0.0, 0.0};
            for (Eigen::Index r = 0; r < D; ++r) {
                const Eigen::Index m0 = fast.sub_index(r, 0);
                const Eigen::Index m1 = fast.sub_index(r, 1);
                if (m0 + 1 <= d - 1 && m1 >= 1)
                    cc += fast.c1[m0 + 1] * fast.c1[m1] * rho(r + d - 1, r);
            }
            res.cross_corr.push_back(cc);
        }
        res.max_trace_error =
            std::max(res.max_trace_error, std::abs(rho.trace().real() - 1.0) +
                                              std::abs(rho.trace().imag()));
        res.max_hermiticity_error = std::max(
            res.max_hermiticity_error,
            (rho - Eigen::MatrixXcd(rho.adjoint())).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho,
                                                           Eigen::EigenvaluesOnly);
        res.min_eigenvalue = std::min(res.min_eigenvalue, es.eigenvalues().minCoeff());
    };

    sample(0.0);
    double t = 0.0;
    for (long iv = 1; iv <= n_intervals; ++iv) {
        for (long i = 0; i < per; ++i) {
            fast.rhs(rho, k1, t1, t2);
            if (!res.steady_reached && k1.cwiseAbs().sum() < steady_tol) {
                res.steady_reached = true;
                res.t_steady = t;
            }
            stage = rho + (0.5 * dt_rk) * k1;
            fast.rhs(stage, k2, t1, t2);
            stage = rho + (0.5 * dt_rk) * k2;
            fast.rhs(stage, k3, t1, t2);
            stage = rho + dt_rk * k3;
            fast.rhs(stage, k4, t1, t2);
            rho += (dt_rk / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt_rk;
        }
        t = iv * sample_interval;
        sample(t);
    }
    res.rho_final = rho;
    return res;
}

double steady_state_n(const ModelParams& p, double tol, double t_final) {
    double dt = 1e-3;
    double prev = -1.0;
    for (int it = 0; it < 6; ++it) {
        LindbladResult r = evolve_exact(p, 1, t_final, dt, t_final / 50.0);
        const double n = r.n_exp.back();
        if (prev >= 0.0 && std::abs(n - prev) < tol) return n;
        prev = n;
        dt *= 0.5;
    }
    throw NumericalError("steady-state ⟨n⟩ did not stabilize under dt halving");
}

JumpCompareResult jump_gutzwiller_compare(const ModelParams& p,
                                          const LatticeGeometry& geom,
                                          long n_traj, double t_final,
                                          double dt, double sample_interval,
                                          std::uint64_t master_seed) {
    if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
    const LocalModel lm = build_local_model(p);
    const std::size_t d = p.cutoff;
    const std::size_t ns = geom.n_sites();
    const NeighborTable nbr(geom);
    const auto& ops = kernels::active();

    const long per = std::lround(sample_interval / dt);
    const long n_intervals = std::lround(t_final / sample_interval);
    if (per < 1 || std::abs(per * dt - sample_interval) > 1e-9 * sample_interval)
        throw ConfigError("sample_interval must be an integer multiple of dt");

    std::vector<double> sq1(d, 0.0), sq2(d, 0.0), ndiag(d), wdiag(d);
    for (std::size_t n = 0; n + 1 < d; ++n)
        sq1[n] = std::sqrt(static_cast<double>(n + 1));
    for (std::size_t n = 0; n + 2 < d; ++n)
        sq2[n] = std::sqrt(static_cast<double>((n + 1) * (n + 2)));
    for (std::size_t n = 0; n < d; ++n) {
        const double nn = static_cast<double>(n);
        ndiag[n] = nn;
        wdiag[n] = 0.5 * (p.gamma1 * nn + p.gamma2 * nn * (nn - 1.0));
    }

    // The Kerr diagonal is stiff at realistic cutoffs (|U| n² dt comes close
    // to 1 near the truncation edge), so the no-jump drift propagates the
    // diagonal of the effective non-Hermitian Hamiltonian exactly and treats
    // only the off-diagonal drive by first-order increment.
    LocalOperator h_off = lm.h_local;
    std::vector<cplx> drift_exp(d);
    for (std::size_t n = 0; n < d; ++n) {
        drift_exp[n] =
            std::exp(dt * (cplx{0.0, -1.0} * lm.h_local.at(n, n) - wdiag[n]));
        h_off.at(n, n) = 0.0;
    }

    JumpCompareResult out;
    out.times.resize(n_intervals + 1);
    for (long k = 0; k <= n_intervals; ++k) out.times[k] = k * sample_interval;
    out.n_mean.assign(n_intervals + 1, 0.0);

    std::vector<cplx> amps(ns * d), hpsi(d), low(d), upv(d), next(d);
    std::vector<cplx> alphas(ns);

    for (long traj = 0; traj < n_traj; ++traj) {
        Xoshiro256pp rng(derive_stream_seed(master_seed, static_cast<std::uint64_t>(traj)));
        std::fill(amps.begin(), amps.end(), cplx{0.0, 0.0});
        for (std::size_t s = 0; s < ns; ++s) amps[s * d] = 1.0;

        auto sample_into = [&](long k) {
            double nsum = 0.0;
            for (std::size_t s = 0; s < ns; ++s) {
                const cplx* psi = amps.data() + s * d;
                double nexp = 0.0;
                for (std::size_t n = 1; n < d; ++n)
                    nexp += static_cast<double>(n) * std::norm(psi[n]);
                nsum += nexp;
                ops.diag_mul_real(d - 1, sq1.data(), psi + 1, low.data());
                low[d - 1] = 0.0;
                const double absa = std::abs(ops.cdotc(d, psi, low.data()));
                if (absa > out.max_abs_a) out.max_abs_a = absa;
            }
            out.n_mean[k] += nsum / static_cast<double>(ns);
        };

        sample_into(0);
        for (long iv = 1; iv <= n_intervals; ++iv) {
            for (long i = 0; i < per; ++i) {
                // pre-step local coherences for the mean-field term
                for (std::size_t s = 0; s < ns; ++s) {
                    const cplx* psi = amps.data() + s * d;
                    ops.diag_mul_real(d - 1, sq1.data(), psi + 1, low.data());
                    low[d - 1] = 0.0;
                    alphas[s] = ops.cdotc(d, psi, low.data());
                }
                for (std::size_t s = 0; s < ns; ++s) {
                    cplx nsum{0.0, 0.0};
                    for (const auto* q = nbr.begin_of(s); q != nbr.end_of(s); ++q)
                        nsum += alphas[*q];
                    cplx* psi = amps.data() + s * d;

                    // deterministic non-Hermitian drift: exact diagonal
                    // propagation, first-order off-diagonal increments
                    apply_into(h_off, psi, hpsi.data());
                    ops.diag_mul_real(d - 1, sq1.data(), psi + 1, low.data());
                    low[d - 1] = 0.0;
                    upv[0] = 0.0;
                    ops.diag_mul_real(d - 1, sq1.data(), psi, upv.data() + 1);
                    const cplx mj = -p.j_hop * dt;
                    const cplx mi{0.0, -1.0};
                    double nexp = 0.0, pairexp = 0.0;
                    for (std::size_t n = 0; n < d; ++n) {
                        const double w = std::norm(psi[n]);
                        nexp += ndiag[n] * w;
                        pairexp += ndiag[n] * (ndiag[n] - 1.0) * w;
                        next[n] =
                            drift_exp[n] *
                            (psi[n] + mi * dt * hpsi[n] +
                             mi * (mj * (std::conj(nsum) * low[n] + nsum * upv[n])));
                    }
                    // jump decision from the pre-step rates
                    const double p1 = p.gamma1 * nexp * dt;
                    const double p2 = p.gamma2 * pairexp * dt;
                    const double u = rng.uniform_co();
                    if (u < p1) {
                        ops.diag_mul_real(d - 1, sq1.data(), psi + 1, next.data());
                        next[d - 1] = 0.0;
                        ++out.jumps_k1;
                    } else if (u < p1 + p2) {
                        ops.diag_mul_real(d - 2, sq2.data(), psi + 2, next.data());
                        next[d - 2] = next[d - 1] = 0.0;
                        ++out.jumps_k2;
                    }
                    const double nrm2 = ops.norm2(d, next.data());
                    if (!(nrm2 > 0.0) || !std::isfinite(nrm2)) {
                        NumericalError err("jump-unraveled state collapsed or diverged");
                        err.site = static_cast<int>(s);
                        err.trajectory = traj;
                        throw err;
                    }
                    const double inv = 1.0 / std::sqrt(nrm2);
                    for (std::size_t n = 0; n < d; ++n) psi[n] = next[n] * inv;
                }
            }
            sample_into(iv);
        }
    }
    for (auto& v : out.n_mean) v /= static_cast<double>(n_traj);
    return out;
}

}  // namespace dg
