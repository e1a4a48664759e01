/*
 * Inchworm solve for one spin class.
 *
 * The propagator tables are built in three sweeps over the unfolded
 * contour [-L, L] (grid units, physical time = index * dt):
 *
 *   1. negative branch:  G(-L, s, f) for f = -L..0, all cross tuples s
 *      with at most n_bar entries, marched in lockstep and stored as
 *      shift-invariant canonicals keyed by (span, tuple rank);
 *   2. positive branch:  G(0, s, f) for f = 0..L, same treatment;
 *   3. straddling keys:  G(a, s, f) with a < 0 <= f, which carry the
 *      fold kink and the observable jump at time 0 and therefore need a
 *      dense (row, frontier) block per tuple.  Tasks at cross count n
 *      read only finished level n-1 blocks (plus both branch stores),
 *      so each level runs embarrassingly parallel.
 *
 * Each frontier advance is one Heun step: K evaluated at the current
 * frontier, an Euler predictor, K again at the new frontier with
 * same-frontier propagator reads answered from the predictors, then the
 * trapezoidal corrector.
 *
 * The kernel K(g) sums, over odd insertion counts M <= m_bar and
 * ordered bath-coupling times a <= tau_1 <= ... <= tau_M <= g, the
 * operator chain
 *
 *   i sgn(g) W(g) [ G(tau_M,.,g) W(tau_M) ... W(tau_1) G(a,.,tau_1) ]
 *
 * times the connected-pairing sum of bath correlations over the M+1
 * coupling times and a product of i sgn(tau_m) branch factors, with the
 * cross tuple split across the segments (first segment closed, the rest
 * half-open).  Time integrals use trapezoidal weights resolved lazily:
 * a node's weight is fixed only once the next node (or the close) pins
 * down its integration interval.  Branch signs follow the segment
 * carrying the node; on the straddling sweep interior nodes at grid
 * time 0 drop out (the two branch limits average to zero) except when
 * the frontier itself sits at 0, where the one-sided limit from inside
 * the simplex applies.
 */
#ifndef SPINCHAIN_INCHWORM_HPP
#define SPINCHAIN_INCHWORM_HPP

#include <array>
#include <climits>
#include <cstdint>
#include <vector>

#include "bath.hpp"
#include "combinatorics.hpp"
#include "config.hpp"
#include "counters.hpp"
#include "mat2.hpp"
#include "pairings.hpp"
#include "parallel.hpp"
#include "spin_algebra.hpp"
#include "store.hpp"

namespace spinchain {

enum class ObsKind : int { Observable = 0, Identity = 1 };

enum class Sweep { NegBranch, PosBranch, Straddle };

struct SolveContext {
    int L = 0;
    int m_bar = 1;
    int n_bar = 0;
    SpinAlgebra algebra;
    BathTable bath;
    std::vector<const PairingTable*> ptabs; // indexed by coupling-point count
    CanonicalStore neg, pos;
    StraddleStore straddle[2];
    bool kind_built[2] = {false, false};

    SolveContext(const SpinParams& p, const TimeGrid& grid, int m_bar_, int n_bar_)
        : L(grid.n_steps),
          m_bar(m_bar_),
          n_bar(n_bar_),
          algebra(p, grid),
          bath(p.bath, grid),
          neg(grid.n_steps, n_bar_),
          pos(grid.n_steps, n_bar_) {
        ptabs.resize(m_bar + 2, nullptr);
        for (int m = 1; m <= m_bar; m += 2) ptabs[m + 1] = &pairing_table(m + 1);
    }

    SolveContext(const SolveContext&) = delete;
    SolveContext& operator=(const SolveContext&) = delete;

    void ensure_kind(ObsKind k) {
        const int i = static_cast<int>(k);
        if (!kind_built[i]) {
            straddle[i] = StraddleStore(L, n_bar);
            kind_built[i] = true;
        }
    }
};

// Answers segment-propagator reads for the kernel.  Keys on a finished
// branch go to the canonical stores; straddling keys to the dense
// blocks.  During a corrector stage reads at the new frontier resolve
// to predictor values: per-level rank arrays on the branch sweeps
// (every frontier hit there is anchored at the sweep's own start), the
// current task's row array on the straddle sweep.
struct SegReader {
    const SolveContext* ctx = nullptr;
    Sweep sweep = Sweep::NegBranch;
    int kind = 0;
    int ov_frontier = INT_MIN;
    const std::vector<std::vector<Mat2>>* pred_levels = nullptr; // branch sweeps
    const Mat2* pred_rows = nullptr;                             // straddle sweep
    int task_n = -1;

    Mat2 read(int x, const int* sub, int n, int y) const {
        if (x == y && n == 0) return Mat2::identity();
        if (sweep == Sweep::NegBranch) {
            if (y == ov_frontier && x == -ctx->L) return pred(sub, n, ctx->L);
            return read_neg(x, sub, n, y);
        }
        if (sweep == Sweep::PosBranch) {
            if (y == ov_frontier && x == 0) return pred(sub, n, 0);
            return read_pos(x, sub, n, y);
        }
        if (y < 0) return read_neg(x, sub, n, y);
        if (x >= 0) return read_pos(x, sub, n, y);
        if (y == ov_frontier && n == task_n) return pred_rows[x + ctx->L];
        std::uint64_t r = 0;
        for (int i = 0; i < n; ++i) r += multiset_rank_step(sub[i] + ctx->L, i + 1);
        return ctx->straddle[kind].read(n, r, x, y);
    }

  private:
    Mat2 pred(const int* sub, int n, int shift) const {
        std::uint64_t r = 0;
        for (int i = 0; i < n; ++i) r += multiset_rank_step(sub[i] + shift, i + 1);
        return (*pred_levels)[n][r];
    }

    Mat2 read_neg(int x, const int* sub, int n, int y) const {
        std::uint64_t r = 0;
        for (int i = 0; i < n; ++i) r += multiset_rank_step(sub[i] - x, i + 1);
        const Mat2& c = ctx->neg.at(y - x, n, r);
        return y == 0 ? c : ctx->algebra.from_canonical(c, -y);
    }

    Mat2 read_pos(int x, const int* sub, int n, int y) const {
        std::uint64_t r = 0;
        for (int i = 0; i < n; ++i) r += multiset_rank_step(sub[i] - x, i + 1);
        const Mat2& c = ctx->pos.at(y - x, n, r);
        return x == 0 ? c : ctx->algebra.from_canonical(c, x);
    }
};

namespace detail {

struct KernelDfs {
    const SolveContext& ctx;
    const SegReader& rd;
    int a, g, ns;
    const int* s;
    double dt;
    bool zero_skip;  // drop interior nodes at grid time 0
    cplx node_zero;  // branch factor for a node at 0 when it is kept
    Mat2 acc = Mat2::zero();
    std::uint64_t closes = 0;
    std::array<int, 14> absq{};

    cplx node_factor(int v) const {
        if (v > 0) return cplx(0.0, 1.0);
        if (v < 0) return cplx(0.0, -1.0);
        return node_zero;
    }

    // Trapezoidal weight of node t once its interval [a, hi] is known.
    double trap_w(int t, int hi) const {
        if (hi == a) return 0.0;
        return dt * ((t == a || t == hi) ? 0.5 : 1.0);
    }

    // depth d: tau_1..tau_d chosen, vd = tau_d, cid crosses consumed,
    // prefix = W(tau_d) G(tau_{d-1},.,tau_d) ... W(tau_1) G(a,.,tau_1),
    // pref = branch factors for all nodes, weights for tau_1..tau_{d-1}.
    void recurse(int d, int vd, int cid, const Mat2& prefix, cplx pref) {
        absq[d] = vd < 0 ? -vd : vd;
        if (d & 1) {
            const double wc = trap_w(vd, g);
            if (wc != 0.0) {
                const Mat2 gtop = rd.read(vd, s + cid, ns - cid, g);
                absq[d + 1] = g < 0 ? -g : g;
                const PairingTable& pt = *ctx.ptabs[d + 1];
                const int pts = d + 1;
                cplx lbc(0.0);
                const std::vector<int>& flat = pt.connected_flat;
                for (std::size_t base = 0; base < flat.size(); base += pts) {
                    cplx prod(1.0);
                    for (int q = 0; q < pts; q += 2)
                        prod *= ctx.bath(absq[flat[base + q] + 1] - absq[flat[base + q + 1] + 1]);
                    lbc += prod;
                }
                ++closes;
                acc += (pref * wc * lbc) * (gtop * prefix);
            }
        }
        if (d >= ctx.m_bar) return;
        for (int v = vd; v <= g; ++v) {
            if (v == a) continue; // appending at the lower limit has zero weight
            if (zero_skip && v == 0) continue;
            const double wd = trap_w(vd, v);
            int c2 = cid;
            while (c2 < ns && s[c2] <= v) ++c2;
            const Mat2 gseg = rd.read(vd, s + cid, c2 - cid, v);
            recurse(d + 1, v, c2, ctx.algebra.w_int(v) * (gseg * prefix), pref * wd * node_factor(v));
        }
    }
};

} // namespace detail

// One evaluation of the inchworm kernel K(g) for the propagator
// G(a, s, g); closes counts connected-pairing sums evaluated.
inline Mat2 eval_kernel(const SolveContext& ctx, const SegReader& rd, int a, const int* s, int ns,
                        int g, std::uint64_t& closes) {
    if (g == a || ctx.bath.all_zero()) return Mat2::zero();
    cplx prefactor, node_zero;
    bool zero_skip = false;
    switch (rd.sweep) {
        case Sweep::NegBranch:
            prefactor = node_zero = cplx(0.0, -1.0);
            break;
        case Sweep::PosBranch:
            prefactor = node_zero = cplx(0.0, 1.0);
            break;
        case Sweep::Straddle:
            prefactor = cplx(0.0, 1.0);
            node_zero = cplx(0.0, -1.0); // reachable only when g == 0
            zero_skip = g != 0;
            break;
    }
    detail::KernelDfs dfs{ctx, rd, a, g, ns, s, ctx.algebra.dt(), zero_skip, node_zero};
    for (int v = a; v <= g; ++v) {
        if (zero_skip && v == 0) continue;
        int c1 = 0;
        while (c1 < ns && s[c1] <= v) ++c1;
        const Mat2 p1 = ctx.algebra.w_int(v) * rd.read(a, s, c1, v);
        dfs.recurse(1, v, c1, p1, dfs.node_factor(v));
    }
    closes += dfs.closes;
    return prefactor * (ctx.algebra.w_int(g) * dfs.acc);
}

// Lockstep march of one branch.  All families (cross tuples confined to
// the branch) advance together so that same-frontier reads across
// families can be answered from the predictor arrays.
inline void march_branch(SolveContext& ctx, bool negative_side, CostCounters& counters) {
    const int L = ctx.L;
    const int n_bar = ctx.n_bar;
    const double dt = ctx.algebra.dt();
    const int anchor = negative_side ? -L : 0;
    const int last = negative_side ? 0 : L;
    const int birth_sign = negative_side ? -1 : +1;
    CanonicalStore& store = negative_side ? ctx.neg : ctx.pos;

    std::vector<std::vector<Mat2>> cur(n_bar + 1), pred(n_bar + 1), kc(n_bar + 1);
    for (int n = 0; n <= n_bar; ++n) {
        const std::uint64_t full = multiset_count(L + 1, n);
        cur[n].assign(full, unwritten_mat());
        pred[n].assign(full, unwritten_mat());
        kc[n].assign(full, unwritten_mat());
    }

    // Iterate the born prefix of level n in rank order, handing the
    // callback the tuple in contour coordinates.
    auto for_each_family = [&](int n, std::uint64_t count, auto&& fn) {
        std::array<int, 16> w{}, c{};
        for (std::uint64_t r = 0; r < count; ++r) {
            for (int i = 0; i < n; ++i) c[i] = w[i] + anchor;
            fn(r, c.data());
            if (r + 1 < count) next_multiset(w.data(), n, L);
        }
    };

    std::uint64_t closes = 0, kevals = 0;
    for (int f = anchor;; ++f) {
        const int W = f - anchor;
        // births: level 0 once at the anchor, higher levels whenever the
        // tuple's last cross sits at this frontier.
        if (f == anchor) cur[0][0] = Mat2::identity();
        for (int n = 1; n <= n_bar; ++n) {
            const std::uint64_t lo = (W == 0) ? 0 : multiset_count(W, n);
            const std::uint64_t hi = multiset_count(W + 1, n);
            const Mat2 ev = ctx.algebra.cross_event(f, birth_sign);
            const std::uint64_t pstep = multiset_rank_step(W, n);
            for (std::uint64_t r = lo; r < hi; ++r) cur[n][r] = ev * cur[n - 1][r - pstep];
        }
        for (int n = 0; n <= n_bar; ++n) {
            const std::uint64_t born = multiset_count(W + 1, n);
            for (std::uint64_t r = 0; r < born; ++r)
                store.at(W, n, r) = negative_side ? ctx.algebra.to_canonical(cur[n][r], -f) : cur[n][r];
        }
        if (f == last) break;

        SegReader plain;
        plain.ctx = &ctx;
        plain.sweep = negative_side ? Sweep::NegBranch : Sweep::PosBranch;
        SegReader overlay = plain;
        overlay.ov_frontier = f + 1;
        overlay.pred_levels = &pred;

        for (int n = 0; n <= n_bar; ++n) {
            const std::uint64_t born = multiset_count(W + 1, n);
            for_each_family(n, born, [&](std::uint64_t r, const int* c) {
                kc[n][r] = eval_kernel(ctx, plain, anchor, c, n, f, closes);
                ++kevals;
                pred[n][r] = cur[n][r] + dt * kc[n][r];
            });
        }
        for (int n = 0; n <= n_bar; ++n) {
            const std::uint64_t born = multiset_count(W + 1, n);
            for_each_family(n, born, [&](std::uint64_t r, const int* c) {
                const Mat2 kt = eval_kernel(ctx, overlay, anchor, c, n, f + 1, closes);
                ++kevals;
                cur[n][r] += (0.5 * dt) * (kc[n][r] + kt);
            });
        }
    }
    counters.add_lbc(closes);
    counters.add_kernel(kevals);
}

// March every row of one straddling tuple from its birth frontier to L.
inline void march_task(SolveContext& ctx, ObsKind kind, int n, std::uint64_t rank, const int* s,
                       CostCounters& counters) {
    StraddleStore& st = ctx.straddle[static_cast<int>(kind)];
    const int L = ctx.L;
    const double dt = ctx.algebra.dt();
    const int amax = st.amax(n, rank);
    const int b0 = st.bmin(n, rank);
    const int rows = amax + L + 1;
    const int fr = L - b0 + 1;
    Mat2* blk = st.block(n, rank);

    std::vector<Mat2> cur(rows), pred(rows), kc(rows);
    if (b0 == 0) {
        // Whole tuple on the negative branch: jump birth at time 0.
        for (int a = -L; a <= amax; ++a) {
            std::uint64_t rr = 0;
            for (int i = 0; i < n; ++i) rr += multiset_rank_step(s[i] - a, i + 1);
            const Mat2& c = ctx.neg.at(-a, n, rr);
            cur[a + L] = kind == ObsKind::Observable ? Mat2::sigma_z() * c : c;
        }
    } else {
        // Last cross on the positive branch: birth off the level n-1 block.
        std::uint64_t pr = 0;
        for (int i = 0; i < n - 1; ++i) pr += multiset_rank_step(s[i] + L, i + 1);
        const Mat2 ev = ctx.algebra.cross_event(b0, +1);
        for (int a = -L; a <= amax; ++a) cur[a + L] = ev * st.read(n - 1, pr, a, b0);
    }
    for (int a = -L; a <= amax; ++a) blk[static_cast<std::uint64_t>(a + L) * fr] = cur[a + L];

    SegReader plain;
    plain.ctx = &ctx;
    plain.sweep = Sweep::Straddle;
    plain.kind = static_cast<int>(kind);
    SegReader overlay = plain;
    overlay.pred_rows = pred.data();
    overlay.task_n = n;

    std::uint64_t closes = 0, kevals = 0;
    for (int f = b0; f < L; ++f) {
        for (int a = -L; a <= amax; ++a) {
            kc[a + L] = eval_kernel(ctx, plain, a, s, n, f, closes);
            ++kevals;
            pred[a + L] = cur[a + L] + dt * kc[a + L];
        }
        overlay.ov_frontier = f + 1;
        for (int a = -L; a <= amax; ++a) {
            const Mat2 kt = eval_kernel(ctx, overlay, a, s, n, f + 1, closes);
            ++kevals;
            cur[a + L] += (0.5 * dt) * (kc[a + L] + kt);
            blk[static_cast<std::uint64_t>(a + L) * fr + (f + 1 - b0)] = cur[a + L];
        }
    }
    counters.add_lbc(closes);
    counters.add_kernel(kevals);
}

inline void march_straddle(SolveContext& ctx, ObsKind kind, int threads, CostCounters& counters) {
    const int L = ctx.L;
    StraddleStore& st = ctx.straddle[static_cast<int>(kind)];
    for (int n = 0; n <= ctx.n_bar; ++n) {
        const std::uint64_t n_ranks = multiset_count(2 * L + 1, n);
        std::vector<int> vecs(n_ranks * static_cast<std::uint64_t>(n));
        std::vector<int> w(n, 0);
        for (std::uint64_t r = 0; r < n_ranks; ++r) {
            for (int i = 0; i < n; ++i) vecs[r * n + i] = w[i] - L;
            if (r + 1 < n_ranks) next_multiset(w.data(), n, 2 * L);
        }
        parallel_for(n_ranks, threads, [&](std::uint64_t r) {
            if (st.zero_block(n, r)) return;
            march_task(ctx, kind, n, r, n > 0 ? vecs.data() + r * n : nullptr, counters);
        });
    }
}

// Full solve for one class: both branches, then the straddling blocks
// for each requested insertion kind, then a completeness scan so any
// missed write dies loudly here rather than in the resummation.
inline void solve_class(SolveContext& ctx, const std::vector<ObsKind>& kinds, int threads,
                        CostCounters& counters) {
    march_branch(ctx, true, counters);
    march_branch(ctx, false, counters);
    ctx.neg.check_complete("negative-branch canonicals");
    ctx.pos.check_complete("positive-branch canonicals");
    for (ObsKind k : kinds) {
        ctx.ensure_kind(k);
        march_straddle(ctx, k, threads, counters);
        ctx.straddle[static_cast<int>(k)].check_complete(
            k == ObsKind::Observable ? "straddling blocks (observable)" : "straddling blocks (identity)");
    }
}

} // namespace spinchain

#endif
