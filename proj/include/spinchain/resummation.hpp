/*
 * Distributive-law resummation across the chain.
 *
 * For one output horizon l the chain observable is assembled spin by
 * spin: a level array maps each free cross tuple s (bond to the next
 * spin, |s| <= n_bar) to a partial amplitude.  Layer 1 copies the first
 * spin's traces; each middle layer integrates the previous bond's
 * crosses against the next spin's traces of the merged tuple (per-spin
 * total capped at n_bar); the last layer closes to a scalar.  Merged
 * tuples keep duplicates, and a merge walk assigns equal-time copies
 * "integrated first" so each (s', s) split is visited exactly once.
 *
 * Cross-time integrals reuse the kernel's lazy trapezoid rule on
 * [-l, l]: a node's weight is resolved by the next node of the same
 * bond, the last one by the closing endpoint l.  Tuples containing grid
 * time 0 contribute zero: the bond factor i*sgn(s) flips sign across
 * the fold while the operator chain is continuous there (the observable
 * commutes with sigma_z insertions), so the two-sided mean of the
 * integrand vanishes.
 *
 * When every bath is switched off the propagators degenerate to pure
 * products of cross events, and the whole assembly collapses to a
 * transfer tensor marched once over the time nodes, with per-bond
 * insertion counts and pending-weight flags as the only state.  That
 * path is picked when the trace tables would not fit; both paths
 * produce the same quadrature sum.
 */
#ifndef SPINCHAIN_RESUMMATION_HPP
#define SPINCHAIN_RESUMMATION_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "combinatorics.hpp"
#include "config.hpp"
#include "inchworm.hpp"
#include "mat2.hpp"
#include "spin_algebra.hpp"
#include "store.hpp"

namespace spinchain {

// Dense map from cross tuples over [-l, l] (colex rank per count) to
// complex amplitudes; used both for per-spin traces and for the partial
// chain amplitudes.
struct LevelArray {
    int l = 0;
    int cap = 0;
    std::vector<std::uint64_t> off;
    std::vector<cplx> vals;

    LevelArray() = default;
    LevelArray(int l_, int cap_) : l(l_), cap(cap_), off(cap_ + 2, 0) {
        for (int n = 0; n <= cap; ++n) off[n + 1] = off[n] + multiset_count(2 * l + 1, n);
        vals.assign(off[cap + 1], cplx(0.0));
    }

    cplx at(int n, std::uint64_t rank) const { return vals[off[n] + rank]; }
};

// Per-spin trace table T(u) = tr(rho_I(l) * G(-l, u, l)) for the given
// insertion kind, read off the solved straddling blocks.
inline LevelArray build_trace_table(const SolveContext& ctx, ObsKind kind, int initial, int l,
                                    int cap) {
    LevelArray t(l, cap);
    const int L = ctx.L;
    const Mat2 rho = ctx.algebra.rho_int(l, initial);
    if (l == 0) {
        // Zero-width contour: only the insertion at the fold acts.
        const Mat2 g0 = kind == ObsKind::Observable ? Mat2::sigma_z() : Mat2::identity();
        t.vals[0] = trace_of_product(rho, g0);
        return t; // tuples of positive count all contain grid time 0
    }
    const StraddleStore& st = ctx.straddle[static_cast<int>(kind)];
    for (int n = 0; n <= cap; ++n) {
        const std::uint64_t n_ranks = multiset_count(2 * l + 1, n);
        std::vector<int> w(n, 0);
        for (std::uint64_t r = 0; r < n_ranks; ++r) {
            bool has_zero = false;
            std::uint64_t rr = 0;
            for (int i = 0; i < n; ++i) {
                if (w[i] == l) has_zero = true;
                rr += multiset_rank_step(w[i] - l + L, i + 1);
            }
            if (!has_zero) t.vals[t.off[n] + r] = trace_of_product(rho, st.read(n, rr, -l, l));
            if (n > 0 && r + 1 < n_ranks) next_multiset(w.data(), n, 2 * l);
        }
    }
    // With nothing inserted anywhere, the backward branch exactly undoes
    // the forward branch (bath included), so the trace closes on tr rho
    // = 1.  Using the closed form here instead of the marched value
    // keeps idle spins from multiplying quadrature noise into the chain.
    if (kind == ObsKind::Identity) t.vals[0] = cplx(1.0);
    return t;
}

// Same table with every bath switched off: the propagator is a bare
// product of cross events around the fold insertion, so the whole
// table falls out of one walk over nondecreasing tuples.
inline LevelArray build_trace_table_seeds(const SpinAlgebra& alg, ObsKind kind, int initial, int l,
                                          int cap) {
    LevelArray t(l, cap);
    const Mat2 rho = alg.rho_int(l, initial);
    const Mat2 obs = kind == ObsKind::Observable ? Mat2::sigma_z() : Mat2::identity();

    struct Walk {
        LevelArray& t;
        const SpinAlgebra& alg;
        const Mat2& rho;
        const Mat2& obs;
        int l, cap;

        void rec(int depth, int prev, std::uint64_t rank, const Mat2& acc, bool obs_done) {
            const Mat2 closed = obs_done ? acc : obs * acc;
            t.vals[t.off[depth] + rank] = trace_of_product(rho, closed);
            if (depth == cap) return;
            for (int v = prev; v <= l; ++v) {
                if (v == 0) continue;
                const bool next_done = obs_done || v > 0;
                const Mat2 ev = alg.cross_event(v, v > 0 ? +1 : -1);
                const Mat2 acc2 = (next_done && !obs_done) ? ev * (obs * acc) : ev * acc;
                rec(depth + 1, v, rank + multiset_rank_step(v + l, depth + 1), acc2, next_done);
            }
        }
    } walk{t, alg, rho, obs, l, cap};
    walk.rec(0, -l, 0, Mat2::identity(), false);
    return t;
}

namespace detail {

// Joint walk over merges of an integrated tuple (from the previous
// layer) and a free tuple (toward the next).  Every node is a complete
// (s', s) split and contributes prev(s') * T(merge) to out(s) with the
// trapezoid weights of the integrated entries.
struct MergeWalk {
    const LevelArray& in;
    const LevelArray& t;
    LevelArray& out;
    int in_cap, out_cap, merged_cap, l;
    double dt;

    static constexpr int no_pending = INT_MIN;

    double resolve(int pend, int v) const {
        if (pend == no_pending) return 1.0;
        if (v == -l) return 0.0;
        return dt * ((pend == -l || pend == v) ? 0.5 : 1.0);
    }

    void rec(int prev, bool last_out, int n_in, int n_out, std::uint64_t r_in, std::uint64_t r_out,
             std::uint64_t r_m, int pend, cplx w) {
        const double w_close = resolve(pend, l);
        if (w_close != 0.0)
            out.vals[out.off[n_out] + r_out] +=
                w * w_close * in.at(n_in, r_in) * t.at(n_in + n_out, r_m);
        const int depth = n_in + n_out;
        if (depth == merged_cap) return;
        for (int v = prev; v <= l; ++v) {
            if (v == 0) continue;
            const std::uint64_t m_step = multiset_rank_step(v + l, depth + 1);
            if (n_in < in_cap && !(last_out && v == prev)) {
                const double wr = resolve(pend, v);
                if (wr != 0.0)
                    rec(v, false, n_in + 1, n_out, r_in + multiset_rank_step(v + l, n_in + 1),
                        r_out, r_m + m_step, v, w * wr);
            }
            if (n_out < out_cap)
                rec(v, true, n_in, n_out + 1, r_in,
                    r_out + multiset_rank_step(v + l, n_out + 1), r_m + m_step, pend, w);
        }
    }
};

} // namespace detail

// One distributive-law layer: integrate the previous bond's crosses
// against this spin's traces, producing amplitudes over the next
// bond's free crosses.  First layer: in_cap 0; last layer: out_cap 0.
inline void add_spin(const LevelArray& in, int in_cap, const LevelArray& t, int merged_cap,
                     LevelArray& out, double dt) {
    detail::MergeWalk walk{in, t, out, in_cap, out.cap, merged_cap, in.l, dt};
    walk.rec(-in.l, false, 0, 0, 0, 0, 0, detail::MergeWalk::no_pending, cplx(1.0));
}

// Chain assembly at horizon l from per-spin trace tables.
inline cplx chain_value(const std::vector<const LevelArray*>& tables, int n_bar, int l, double dt) {
    const int k_spins = static_cast<int>(tables.size());
    LevelArray g(l, 0);
    g.vals[0] = cplx(1.0);
    for (int k = 0; k < k_spins; ++k) {
        const int out_cap = k + 1 < k_spins ? n_bar : 0;
        LevelArray next(l, out_cap);
        add_spin(g, g.cap, *tables[k], n_bar, next, dt);
        g = std::move(next);
    }
    return g.vals[0];
}

// ---------------------------------------------------------------
// Zero-bath transfer march.
//
// State: per-bond insertion count (per-spin totals capped at n_bar),
// per-bond pending-weight flag, and a vectorized 2x2 chain factor per
// spin.  Nodes v = -l..l are visited once; at each node any bond may
// fire any number of times, every firing left-multiplying both end
// spins' factors by their cross events and resolving that bond's
// pending weight.
// ---------------------------------------------------------------

namespace detail {

enum PendFlag : int { pend_none = 0, pend_half = 1, pend_mid_prev = 2, pend_mid_here = 3 };

struct SeedsMarch {
    int k_spins, bonds, n_bar, l, target;
    double dt;
    const std::vector<const SpinAlgebra*>& alg;
    const std::vector<int>& initial;

    std::vector<std::vector<int>> counts;      // valid per-bond count vectors
    std::map<std::vector<int>, int> count_idx; // vector -> dense index
    std::vector<std::vector<int>> bump;        // [cid][b] -> cid with m_b+1, or -1
    int n_flags = 1, legs = 1;
    std::vector<cplx> psi; // [cid][fid][leg index]

    SeedsMarch(const std::vector<const SpinAlgebra*>& alg_, const std::vector<int>& initial_,
               int target_, int n_bar_, int l_, double dt_)
        : k_spins(static_cast<int>(alg_.size())),
          bonds(k_spins - 1),
          n_bar(n_bar_),
          l(l_),
          target(target_),
          dt(dt_),
          alg(alg_),
          initial(initial_) {
        double rough = 1.0;
        for (int b = 0; b < bonds; ++b) rough *= n_bar + 1;
        if (k_spins > 13 || rough > 2e7)
            throw std::runtime_error("zero-bath chain state too large; reduce n_bar or chain length");
        enumerate_counts();
        for (int b = 0; b < bonds; ++b) n_flags *= 4;
        for (int k = 0; k < k_spins; ++k) legs *= 4;
        const std::uint64_t entries =
            static_cast<std::uint64_t>(counts.size()) * n_flags * legs;
        if (entries > (std::uint64_t(1) << 27))
            throw std::runtime_error("zero-bath chain state too large; reduce n_bar or chain length");
        psi.assign(entries, cplx(0.0));
    }

    bool spin_caps_ok(const std::vector<int>& m) const {
        for (int k = 0; k < k_spins; ++k) {
            const int tot = (k > 0 ? m[k - 1] : 0) + (k < bonds ? m[k] : 0);
            if (tot > n_bar) return false;
        }
        return true;
    }

    void enumerate_counts() {
        std::vector<int> m(bonds, 0);
        for (;;) {
            if (spin_caps_ok(m)) {
                count_idx[m] = static_cast<int>(counts.size());
                counts.push_back(m);
            }
            int b = 0;
            while (b < bonds && m[b] == n_bar) m[b++] = 0;
            if (b == bonds) break;
            ++m[b];
        }
        bump.assign(counts.size(), std::vector<int>(std::max(bonds, 1), -1));
        for (std::size_t c = 0; c < counts.size(); ++c)
            for (int b = 0; b < bonds; ++b) {
                std::vector<int> m2 = counts[c];
                if (++m2[b] > n_bar) continue;
                auto it = count_idx.find(m2);
                if (it != count_idx.end()) bump[c][b] = it->second;
            }
    }

    std::uint64_t slot(int cid, int fid) const {
        return (static_cast<std::uint64_t>(cid) * n_flags + fid) * legs;
    }

    int flag_of(int fid, int b) const { return (fid >> (2 * b)) & 3; }
    int with_flag(int fid, int b, int p) const {
        return (fid & ~(3 << (2 * b))) | (p << (2 * b));
    }

    // Left-multiply spin k's vectorized factor by m, within one state's
    // legs block.
    void apply_leg(cplx* block, int k, const Mat2& m) const {
        const int stride = legs >> (2 * (k + 1)); // digit k counts from the top
        const int outer = legs / (stride * 4);
        for (int o = 0; o < outer; ++o)
            for (int s = 0; s < stride; ++s) {
                cplx* base = block + (static_cast<std::uint64_t>(o) * 4) * stride + s;
                for (int c = 0; c < 2; ++c) {
                    const cplx x0 = base[(0 * 2 + c) * stride];
                    const cplx x1 = base[(1 * 2 + c) * stride];
                    base[(0 * 2 + c) * stride] = m(0, 0) * x0 + m(0, 1) * x1;
                    base[(1 * 2 + c) * stride] = m(1, 0) * x0 + m(1, 1) * x1;
                }
            }
    }

    double resolve_weight(int p, int v) const {
        switch (p) {
            case pend_none: return 1.0;
            case pend_half: return v == -l ? 0.0 : 0.5 * dt;
            case pend_mid_prev: return dt;
            default: return 0.5 * dt; // pend_mid_here: same-node resolution
        }
    }

    double close_weight(int p) const {
        switch (p) {
            case pend_none: return 1.0;
            case pend_mid_prev: return dt;
            default: return 0.5 * dt; // endpoint pendings
        }
    }

    cplx run() {
        // initial state: no insertions, vec(Id) = e_{00} + e_{11} on
        // every spin, i.e. a sum over all diagonal corner combinations
        for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << k_spins); ++mask) {
            std::uint64_t leg = 0;
            for (int k = 0; k < k_spins; ++k)
                leg = leg * 4 + (((mask >> k) & 1) ? 3 : 0);
            psi[slot(0, 0) + leg] = cplx(1.0);
        }
        std::vector<cplx> scratch(psi.size());
        for (int v = -l; v <= l; ++v) {
            if (v > -l) advance_flags(scratch);
            if (v == 0) {
                for (std::size_t c = 0; c < counts.size(); ++c)
                    for (int f = 0; f < n_flags; ++f)
                        apply_leg(psi.data() + slot(static_cast<int>(c), f), target,
                                  Mat2::sigma_z());
                continue;
            }
            for (int b = 0; b < bonds; ++b) fire_bond(b, v, scratch);
        }
        return close();
    }

    void advance_flags(std::vector<cplx>& scratch) {
        std::fill(scratch.begin(), scratch.end(), cplx(0.0));
        for (std::size_t c = 0; c < counts.size(); ++c)
            for (int f = 0; f < n_flags; ++f) {
                int f2 = f;
                for (int b = 0; b < bonds; ++b)
                    if (flag_of(f2, b) == pend_mid_here) f2 = with_flag(f2, b, pend_mid_prev);
                cplx* src = psi.data() + slot(static_cast<int>(c), f);
                cplx* dst = scratch.data() + slot(static_cast<int>(c), f2);
                for (int i = 0; i < legs; ++i) dst[i] += src[i];
            }
        psi.swap(scratch);
    }

    // psi += sum over j >= 1 firings of bond b at node v.
    void fire_bond(int b, int v, std::vector<cplx>& layer) {
        layer = psi;
        const int new_flag = v == -l ? pend_half : pend_mid_here;
        std::vector<cplx> next(psi.size());
        std::vector<cplx> tmp(legs);
        for (;;) {
            std::fill(next.begin(), next.end(), cplx(0.0));
            bool any = false;
            for (std::size_t c = 0; c < counts.size(); ++c) {
                const int c2 = bump[c][b];
                if (c2 < 0) continue;
                for (int f = 0; f < n_flags; ++f) {
                    const double wr = resolve_weight(flag_of(f, b), v);
                    if (wr == 0.0) continue;
                    const cplx* src = layer.data() + slot(static_cast<int>(c), f);
                    bool nonzero = false;
                    for (int i = 0; i < legs; ++i)
                        if (src[i] != cplx(0.0)) { nonzero = true; break; }
                    if (!nonzero) continue;
                    any = true;
                    for (int i = 0; i < legs; ++i) tmp[i] = wr * src[i];
                    apply_leg(tmp.data(), b, alg[b]->cross_event(v, v > 0 ? +1 : -1));
                    apply_leg(tmp.data(), b + 1, alg[b + 1]->cross_event(v, v > 0 ? +1 : -1));
                    // sources differing only in this bond's old flag land
                    // on the same slot, so accumulate rather than assign
                    const int f2 = with_flag(f, b, new_flag);
                    cplx* dst = next.data() + slot(c2, f2);
                    for (int i = 0; i < legs; ++i) dst[i] += tmp[i];
                }
            }
            if (!any) break;
            for (std::uint64_t i = 0; i < psi.size(); ++i) psi[i] += next[i];
            layer.swap(next);
        }
    }

    cplx close() {
        // per-spin closing vectors: coefficient of A_{mc} in tr(rho A)
        std::vector<std::array<cplx, 4>> fvec(k_spins);
        for (int k = 0; k < k_spins; ++k) {
            const Mat2 rho = alg[k]->rho_int(l, initial[k]);
            for (int m = 0; m < 2; ++m)
                for (int c = 0; c < 2; ++c) fvec[k][m * 2 + c] = rho(c, m);
        }
        cplx total(0.0);
        for (std::size_t c = 0; c < counts.size(); ++c)
            for (int f = 0; f < n_flags; ++f) {
                double wf = 1.0;
                for (int b = 0; b < bonds; ++b) wf *= close_weight(flag_of(f, b));
                if (wf == 0.0) continue;
                const cplx* block = psi.data() + slot(static_cast<int>(c), f);
                cplx s(0.0);
                for (int i = 0; i < legs; ++i) {
                    cplx prod(1.0);
                    int idx = i;
                    for (int k = k_spins - 1; k >= 0; --k) {
                        prod *= fvec[k][idx & 3];
                        idx >>= 2;
                    }
                    if (prod != cplx(0.0)) s += block[i] * prod;
                }
                total += wf * s;
            }
        return total;
    }
};

} // namespace detail

inline cplx chain_value_seeds(const std::vector<const SpinAlgebra*>& alg,
                              const std::vector<int>& initial, int target, int n_bar, int l,
                              double dt) {
    if (alg.size() == 1) {
        // no bonds: just the dressed single-spin trace, which with the
        // bath off is tr(rho_I(l) sigma_z)
        const Mat2 rho = alg[0]->rho_int(l, initial[0]);
        return trace_of_product(rho, Mat2::sigma_z());
    }
    detail::SeedsMarch march(alg, initial, target, n_bar, l, dt);
    return march.run();
}

} // namespace spinchain

#endif
