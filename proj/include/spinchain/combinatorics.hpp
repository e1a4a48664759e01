/*
 * Binomial table and multiset (combination-with-repetition) ranking.
 *
 * Cross-time vectors are nondecreasing integer tuples on a grid; we store
 * propagators in dense arrays indexed by the colexicographic rank of the
 * tuple.  For an ascending tuple (v_1 <= ... <= v_N) with values in
 * [0, P-1], the rank is sum_m C(v_m + m - 1, m), which enumerates all
 * multisets of size N over P values exactly once.
 */
#ifndef SPINCHAIN_COMBINATORICS_HPP
#define SPINCHAIN_COMBINATORICS_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace spinchain {

class BinomTable {
  public:
    // Rows 0..n_max, columns 0..k_max.  Entries that would overflow
    // uint64 are saturated; they can never be legitimate array ranks.
    BinomTable(int n_max, int k_max) : n_max_(n_max), k_max_(k_max), c_((n_max + 1) * (k_max + 1), 0) {
        const std::uint64_t sat = std::numeric_limits<std::uint64_t>::max();
        for (int n = 0; n <= n_max; ++n) {
            at(n, 0) = 1;
            for (int k = 1; k <= k_max; ++k) {
                if (k > n) {
                    at(n, k) = 0;
                    continue;
                }
                std::uint64_t a = at(n - 1, k - 1), b = at(n - 1, k);
                at(n, k) = (a == sat || b == sat || a > sat - b) ? sat : a + b;
            }
        }
    }

    std::uint64_t operator()(int n, int k) const {
        if (k < 0 || k > k_max_ || n < 0) return 0;
        if (n > n_max_) throw std::out_of_range("binomial table row exceeded");
        return c_[static_cast<std::size_t>(n) * (k_max_ + 1) + k];
    }

    int n_max() const { return n_max_; }
    int k_max() const { return k_max_; }

  private:
    std::uint64_t& at(int n, int k) { return c_[static_cast<std::size_t>(n) * (k_max_ + 1) + k]; }
    int n_max_, k_max_;
    std::vector<std::uint64_t> c_;
};

// Shared table, sized for the largest grids we ever rank on
// (cost scans go up to n_steps = 256, i.e. 513 contour points).
inline const BinomTable& binom() {
    static const BinomTable table(1200, 16);
    return table;
}

// Number of multisets of size n over p values.
inline std::uint64_t multiset_count(int p, int n) {
    if (n == 0) return 1;
    return binom()(p + n - 1, n);
}

// Multisets of size 0..n_max over p values.
inline std::uint64_t multiset_count_upto(int p, int n_max) {
    std::uint64_t total = 0;
    for (int n = 0; n <= n_max; ++n) total += multiset_count(p, n);
    return total;
}

// Colex rank of an ascending tuple; values must lie in [0, p-1] but p is
// not needed for the rank itself.
inline std::uint64_t multiset_rank(const int* v, int n) {
    std::uint64_t r = 0;
    for (int m = 1; m <= n; ++m) r += binom()(v[m - 1] + m - 1, m);
    return r;
}

// Rank increment contributed by appending value v at (1-based) position m.
inline std::uint64_t multiset_rank_step(int v, int m) { return binom()(v + m - 1, m); }

// Advance an ascending tuple with values in [0, maxval] to its colex
// successor (the enumeration order that matches multiset_rank).  Returns
// false after the last tuple (maxval, ..., maxval).
inline bool next_multiset(int* v, int n, int maxval) {
    for (int i = 0; i < n; ++i) {
        int bound = (i + 1 < n) ? v[i + 1] : maxval;
        if (v[i] < bound) {
            ++v[i];
            for (int j = 0; j < i; ++j) v[j] = 0;
            return true;
        }
    }
    return false;
}

} // namespace spinchain

#endif
