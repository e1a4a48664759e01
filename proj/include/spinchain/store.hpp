/*
 * Dense propagator stores.
 *
 * Propagator keys are (a, s, b): contour start a, ascending cross-time
 * tuple s inside [a, b], contour end b (grid indices on [-L, L]).  Keys
 * lying entirely on one branch are shift-invariant, so only a canonical
 * representative per (span, tuple) is kept:
 *
 *   b <= 0:  G(a,s,b) = U(|b|) C U(|b|)^dag with C = G(a-b, s-b, 0),
 *   a >= 0:  G(a,s,b) = U(a)   C U(a)^dag   with C = G(0, s-a, b-a),
 *
 * stored by span len = b - a and the rank of the tuple shifted to
 * [0, len].  Keys straddling the fold (a < 0 <= b) feel the kink of
 * |tau| and the observable insertion at 0, so they get a full dense
 * block per tuple: rows a in [-L, min(s_1, -1)] times frontiers
 * b in [max(s_N, 0), L].  Tuples containing grid time 0 are identically
 * zero (the two branch limits of the cross factor average to zero) and
 * are not allocated.
 *
 * Entries start as NaN; a completeness scan after the solve turns any
 * missed write into a hard error instead of silently polluted data.
 */
#ifndef SPINCHAIN_STORE_HPP
#define SPINCHAIN_STORE_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "mat2.hpp"

namespace spinchain {

inline Mat2 unwritten_mat() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Mat2 m;
    for (auto& e : m.a) e = cplx(nan, nan);
    return m;
}

// One-branch canonical propagators: slab per span 0..span_max, per cross
// count 0..n_bar, dense in the colex rank of the shifted tuple.
class CanonicalStore {
  public:
    CanonicalStore() = default;
    CanonicalStore(int span_max, int n_bar) : span_max_(span_max) {
        slabs_.resize(span_max + 1);
        for (int len = 0; len <= span_max; ++len) {
            slabs_[len].resize(n_bar + 1);
            for (int n = 0; n <= n_bar; ++n)
                slabs_[len][n].assign(multiset_count(len + 1, n), unwritten_mat());
        }
    }

    Mat2& at(int len, int n, std::uint64_t rank) { return slabs_[len][n][rank]; }
    const Mat2& at(int len, int n, std::uint64_t rank) const { return slabs_[len][n][rank]; }

    std::uint64_t bytes() const {
        std::uint64_t total = 0;
        for (const auto& spans : slabs_)
            for (const auto& slab : spans) total += slab.size() * sizeof(Mat2);
        return total;
    }

    void check_complete(const std::string& name) const {
        for (const auto& spans : slabs_)
            for (const auto& slab : spans)
                for (const Mat2& m : slab)
                    if (!all_finite(m))
                        throw std::logic_error("unwritten entry in store " + name);
    }

  private:
    int span_max_ = -1;
    std::vector<std::vector<std::vector<Mat2>>> slabs_;
};

// Straddling propagators: per cross count, per tuple rank over the full
// contour window, a rectangular (row, frontier) block.
class StraddleStore {
  public:
    static constexpr std::uint64_t npos = std::numeric_limits<std::uint64_t>::max();

    StraddleStore() = default;
    StraddleStore(int L, int n_bar) : L_(L) {
        levels_.resize(n_bar + 1);
        for (int n = 0; n <= n_bar; ++n) {
            Level& lev = levels_[n];
            const std::uint64_t n_ranks = multiset_count(2 * L + 1, n);
            lev.offset.resize(n_ranks);
            lev.amax.resize(n_ranks);
            lev.bmin.resize(n_ranks);
            std::vector<int> w(n, 0); // tuple shifted to [0, 2L]
            std::uint64_t acc = 0;
            for (std::uint64_t r = 0; r < n_ranks; ++r) {
                bool has_zero = false;
                for (int i = 0; i < n; ++i)
                    if (w[i] == L) { has_zero = true; break; }
                const int amax = (n > 0 && w[0] - L < -1) ? w[0] - L : -1;
                const int bmin = (n > 0 && w[n - 1] - L > 0) ? w[n - 1] - L : 0;
                lev.amax[r] = amax;
                lev.bmin[r] = bmin;
                if (has_zero) {
                    lev.offset[r] = npos;
                } else {
                    lev.offset[r] = acc;
                    acc += static_cast<std::uint64_t>(amax + L + 1) * (L - bmin + 1);
                }
                if (n > 0) next_multiset(w.data(), n, 2 * L);
            }
            lev.data.assign(acc, unwritten_mat());
        }
    }

    // Same block bookkeeping without the allocation; lets the driver
    // report the memory footprint before committing to it.
    static std::uint64_t estimate_bytes(int L, int n_bar) {
        std::uint64_t total = 0;
        for (int n = 0; n <= n_bar; ++n) {
            const std::uint64_t n_ranks = multiset_count(2 * L + 1, n);
            std::vector<int> w(n, 0);
            for (std::uint64_t r = 0; r < n_ranks; ++r) {
                bool has_zero = false;
                for (int i = 0; i < n; ++i)
                    if (w[i] == L) { has_zero = true; break; }
                if (!has_zero) {
                    const int amax = (n > 0 && w[0] - L < -1) ? w[0] - L : -1;
                    const int bmin = (n > 0 && w[n - 1] - L > 0) ? w[n - 1] - L : 0;
                    total += static_cast<std::uint64_t>(amax + L + 1) * (L - bmin + 1) * sizeof(Mat2);
                }
                if (n > 0) next_multiset(w.data(), n, 2 * L);
            }
        }
        return total;
    }

    bool zero_block(int n, std::uint64_t rank) const { return levels_[n].offset[rank] == npos; }
    int amax(int n, std::uint64_t rank) const { return levels_[n].amax[rank]; }
    int bmin(int n, std::uint64_t rank) const { return levels_[n].bmin[rank]; }
    int rows(int n, std::uint64_t rank) const { return levels_[n].amax[rank] + L_ + 1; }
    int fronts(int n, std::uint64_t rank) const { return L_ - levels_[n].bmin[rank] + 1; }

    // Raw block pointer for the task march; layout (a+L)*fronts + (b-bmin).
    Mat2* block(int n, std::uint64_t rank) {
        const std::uint64_t off = levels_[n].offset[rank];
        return off == npos ? nullptr : levels_[n].data.data() + off;
    }
    const Mat2* block(int n, std::uint64_t rank) const {
        const std::uint64_t off = levels_[n].offset[rank];
        return off == npos ? nullptr : levels_[n].data.data() + off;
    }

    Mat2 read(int n, std::uint64_t rank, int a, int b) const {
        const Level& lev = levels_[n];
        const std::uint64_t off = lev.offset[rank];
        if (off == npos) return Mat2::zero();
        const int fr = L_ - lev.bmin[rank] + 1;
        return lev.data[off + static_cast<std::uint64_t>(a + L_) * fr + (b - lev.bmin[rank])];
    }

    std::uint64_t bytes() const {
        std::uint64_t total = 0;
        for (const Level& lev : levels_) total += lev.data.size() * sizeof(Mat2);
        return total;
    }

    void check_complete(const std::string& name) const {
        for (const Level& lev : levels_)
            for (const Mat2& m : lev.data)
                if (!all_finite(m))
                    throw std::logic_error("unwritten entry in store " + name);
    }

  private:
    struct Level {
        std::vector<std::uint64_t> offset; // npos marks tuples containing time 0
        std::vector<int> amax, bmin;
        std::vector<Mat2> data;
    };

    int L_ = 0;
    std::vector<Level> levels_;
};

} // namespace spinchain

#endif
