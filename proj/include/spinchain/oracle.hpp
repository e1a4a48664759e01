/*
 * Reference implementations for tests and acceptance runs.  None of
 * them touch the inchworm marching code: the closed chain is dense
 * linear algebra, the diagram sum enumerates bond assignments without
 * the distributive-law reuse, and the Dyson series sums bare diagrams
 * directly.  They share the 2x2 algebra, pairing enumeration, and bath
 * table, which are checked by their own unit tests.
 */
#ifndef SPINCHAIN_ORACLE_HPP
#define SPINCHAIN_ORACLE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bath.hpp"
#include "config.hpp"
#include "mat2.hpp"
#include "pairings.hpp"
#include "resummation.hpp"
#include "spin_algebra.hpp"

namespace spinchain {

// Dense propagation of the bath-free chain: H = sum_k eps_k sz_k +
// delta_k sx_k + sum_k J_k J_{k+1} sz_k sz_{k+1}, eigendecomposed once.
// Returns <sigma_z^(k)>(l dt) as [l][spin].
inline std::vector<std::vector<double>> exact_closed_chain(const ChainConfig& cfg) {
    const int k_spins = cfg.n_spins();
    const int L = cfg.numerics.n_steps;
    if (k_spins > 12) throw std::invalid_argument("closed-chain oracle limited to 12 spins");
    for (const SpinParams& s : cfg.spins)
        if (s.bath.xi != 0.0)
            throw std::invalid_argument("closed-chain oracle requires every bath switched off");

    const int dim = 1 << k_spins;
    // spin k occupies bit k_spins-1-k; bit 0 state = sigma_z eigenvalue +1
    auto sz = [&](int state, int k) {
        return ((state >> (k_spins - 1 - k)) & 1) ? -1.0 : 1.0;
    };
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int st = 0; st < dim; ++st) {
        double diag = 0.0;
        for (int k = 0; k < k_spins; ++k) diag += cfg.spins[k].epsilon * sz(st, k);
        for (int k = 0; k + 1 < k_spins; ++k)
            diag += cfg.spins[k].coupling * cfg.spins[k + 1].coupling * sz(st, k) * sz(st, k + 1);
        h(st, st) = diag;
        for (int k = 0; k < k_spins; ++k)
            h(st ^ (1 << (k_spins - 1 - k)), st) += cfg.spins[k].delta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

    int init = 0;
    for (int k = 0; k < k_spins; ++k)
        if (cfg.spins[k].initial < 0) init |= 1 << (k_spins - 1 - k);
    const Eigen::VectorXd coeff = es.eigenvectors().row(init).transpose();

    std::vector<std::vector<double>> traj(L + 1, std::vector<double>(k_spins, 0.0));
    for (int l = 0; l <= L; ++l) {
        const double t = l * cfg.numerics.dt;
        Eigen::VectorXcd phase(dim);
        for (int j = 0; j < dim; ++j)
            phase(j) = std::exp(cplx(0.0, -es.eigenvalues()(j) * t)) * coeff(j);
        const Eigen::VectorXcd psi = es.eigenvectors() * phase;
        const double norm_err = std::abs(psi.squaredNorm() - 1.0);
        if (norm_err > 1e-10) throw std::runtime_error("closed-chain norm drift");
        for (int k = 0; k < k_spins; ++k) {
            double e = 0.0;
            for (int st = 0; st < dim; ++st) e += std::norm(psi(st)) * sz(st, k);
            traj[l][k] = e;
        }
    }
    return traj;
}

namespace detail {

// Product of lazily resolved trapezoid weights for one bond tuple on
// [-l, l]; identical rule to the engine's quadrature.
inline double tuple_weight(const std::vector<int>& u, int l, double dt) {
    double w = 1.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const int hi = j + 1 < u.size() ? u[j + 1] : l;
        if (hi == -l) return 0.0;
        w *= dt * ((u[j] == -l || u[j] == hi) ? 0.5 : 1.0);
    }
    return w;
}

} // namespace detail

// Direct bond-assignment enumeration: every bond independently carries
// a cross tuple, each spin's trace is looked up at the merge of its two
// bonds' tuples, per-spin counts above n_bar are skipped like in the
// engine.  corrupt_weight scales the first bond's nonempty tuple
// weights and exists as a negative control for the equivalence check.
inline cplx bare_diagram_sum(const std::vector<const LevelArray*>& tables, int n_bar, int l,
                             double dt, double corrupt_weight = 1.0) {
    const int k_spins = static_cast<int>(tables.size());
    const int bonds = k_spins - 1;
    // all nondecreasing tuples over [-l, l] \ {0} up to length n_bar
    std::vector<std::vector<int>> all;
    all.push_back({});
    std::vector<int> stack;
    struct Gen {
        int l, cap;
        std::vector<std::vector<int>>& out;
        void rec(std::vector<int>& cur, int prev) {
            if (static_cast<int>(cur.size()) == cap) return;
            for (int v = prev; v <= l; ++v) {
                if (v == 0) continue;
                cur.push_back(v);
                out.push_back(cur);
                rec(cur, v);
                cur.pop_back();
            }
        }
    } gen{l, n_bar, all};
    gen.rec(stack, -l);

    std::vector<int> pick(std::max(bonds, 0), 0);
    cplx total(0.0);
    for (;;) {
        // per-spin caps
        bool ok = true;
        for (int k = 0; k < k_spins && ok; ++k) {
            const std::size_t left = k > 0 ? all[pick[k - 1]].size() : 0;
            const std::size_t right = k < bonds ? all[pick[k]].size() : 0;
            if (static_cast<int>(left + right) > n_bar) ok = false;
        }
        if (ok) {
            cplx term(1.0);
            for (int b = 0; b < bonds && term != cplx(0.0); ++b) {
                double w = detail::tuple_weight(all[pick[b]], l, dt);
                if (b == 0 && !all[pick[b]].empty()) w *= corrupt_weight;
                term *= w;
            }
            if (term != cplx(0.0)) {
                for (int k = 0; k < k_spins; ++k) {
                    std::vector<int> merged;
                    if (k > 0) merged = all[pick[k - 1]];
                    if (k < bonds)
                        merged.insert(merged.end(), all[pick[k]].begin(), all[pick[k]].end());
                    std::sort(merged.begin(), merged.end());
                    std::uint64_t r = 0;
                    for (std::size_t i = 0; i < merged.size(); ++i)
                        r += multiset_rank_step(merged[i] + l, static_cast<int>(i) + 1);
                    term *= tables[k]->at(static_cast<int>(merged.size()), r);
                    if (term == cplx(0.0)) break;
                }
                total += term;
            }
        }
        int b = 0;
        while (b < bonds && pick[b] + 1 == static_cast<int>(all.size())) pick[b++] = 0;
        if (b == bonds) break;
        ++pick[b];
    }
    return total;
}

// Bare Dyson series for a single spin: even insertion counts up to
// m_trunc, full (connected and disconnected) pairings, the observable
// riding between the negative and positive branch insertions.
inline cplx dyson_single_spin(const SpinAlgebra& alg, const BathTable& table, int initial,
                              int m_trunc, int l) {
    const double dt = alg.dt();
    const Mat2 rho = alg.rho_int(l, initial);
    cplx total = trace_of_product(rho, Mat2::sigma_z()); // M = 0 term

    struct Sum {
        const SpinAlgebra& alg;
        const BathTable& table;
        const Mat2& rho;
        int l, m_trunc;
        double dt;
        cplx total = 0.0;

        void rec(std::vector<int>& tau, const Mat2& chain, bool obs_done, cplx pref) {
            const int m = static_cast<int>(tau.size());
            if (m > 0 && m % 2 == 0) {
                // close: resolve the last node's weight against l
                const double wc = (l == -l) ? 0.0
                                            : dt * ((tau.back() == -l || tau.back() == l) ? 0.5 : 1.0);
                if (wc != 0.0) {
                    std::vector<int> absq(m);
                    for (int j = 0; j < m; ++j) absq[j] = std::abs(tau[j]);
                    const cplx lbc = influence_full(pairing_table(m), absq.data(), table);
                    const Mat2 closed = obs_done ? chain : Mat2::sigma_z() * chain;
                    total += pref * wc * lbc * trace_of_product(rho, closed);
                }
            }
            if (m == m_trunc) return;
            const int lo = m == 0 ? -l : tau.back();
            for (int v = lo; v <= l; ++v) {
                if (v == 0) continue;
                // weight of the previous node, resolved by this one
                double wp = 1.0;
                if (m > 0) {
                    if (v == -l) continue;
                    wp = dt * ((tau.back() == -l || tau.back() == v) ? 0.5 : 1.0);
                }
                const bool next_done = obs_done || v > 0;
                Mat2 chain2 = (next_done && !obs_done) ? Mat2::sigma_z() * chain : chain;
                chain2 = alg.w_int(v) * chain2;
                tau.push_back(v);
                rec(tau, chain2, next_done, pref * wp * i_sign(v));
                tau.pop_back();
            }
        }
    } sum{alg, table, rho, l, m_trunc, dt};
    Mat2 ident = Mat2::identity();
    std::vector<int> t0;
    sum.rec(t0, ident, false, cplx(1.0));
    return total + sum.total;
}

// Refinement reference: the same discrete sum with 16x the oscillators.
inline cplx highres_bath_correlation(const BathParams& bath, double dtau) {
    return bath_correlation(bath, dtau, bath.n_osc * 16);
}

} // namespace spinchain

#endif
