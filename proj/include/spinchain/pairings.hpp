/*
 * Wick pairings of an even number of contour points and their connected
 * subset.
 *
 * A pairing is a perfect matching of positions {0..m-1}; there are
 * (m-1)!! of them.  Two arcs (j,j') and (k,k') are linked when they
 * interleave (j < k < j' < k'); a pairing is connected when its arcs form
 * a single component under that relation.  The inchworm kernel sums only
 * connected pairings; the bare Dyson oracle sums all of them.
 */
#ifndef SPINCHAIN_PAIRINGS_HPP
#define SPINCHAIN_PAIRINGS_HPP

#include <mutex>
#include <utility>
#include <vector>

#include "bath.hpp"
#include "mat2.hpp"

namespace spinchain {

using Pairing = std::vector<std::pair<int, int>>; // arcs (first < second), sorted by first

inline void enumerate_pairings_rec(std::vector<int>& free_pos, Pairing& current,
                                   std::vector<Pairing>& out) {
    if (free_pos.empty()) {
        out.push_back(current);
        return;
    }
    // Pair the smallest free position with each later one in turn.
    std::vector<int> rest(free_pos.begin() + 1, free_pos.end());
    const int first = free_pos[0];
    for (std::size_t i = 0; i < rest.size(); ++i) {
        std::vector<int> next;
        next.reserve(rest.size() - 1);
        for (std::size_t j = 0; j < rest.size(); ++j)
            if (j != i) next.push_back(rest[j]);
        current.emplace_back(first, rest[i]);
        enumerate_pairings_rec(next, current, out);
        current.pop_back();
    }
}

inline std::vector<Pairing> enumerate_pairings(int m) {
    std::vector<Pairing> out;
    if (m <= 0 || m % 2 != 0) return out;
    std::vector<int> free_pos(m);
    for (int i = 0; i < m; ++i) free_pos[i] = i;
    Pairing current;
    enumerate_pairings_rec(free_pos, current, out);
    return out;
}

inline bool arcs_interleave(const std::pair<int, int>& a, const std::pair<int, int>& b) {
    return (a.first < b.first && b.first < a.second && a.second < b.second) ||
           (b.first < a.first && a.first < b.second && b.second < a.second);
}

// Breadth-first search over the arc-interleaving graph.
inline bool is_connected(const Pairing& q) {
    const int n = static_cast<int>(q.size());
    if (n <= 1) return true;
    std::vector<char> seen(n, 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
        int cur = queue.back();
        queue.pop_back();
        for (int j = 0; j < n; ++j) {
            if (!seen[j] && arcs_interleave(q[cur], q[j])) {
                seen[j] = 1;
                ++reached;
                queue.push_back(j);
            }
        }
    }
    return reached == n;
}

inline std::vector<Pairing> enumerate_connected(int m) {
    std::vector<Pairing> out;
    for (const Pairing& q : enumerate_pairings(m))
        if (is_connected(q)) out.push_back(q);
    return out;
}

// Cached pairings for one point count, with the arcs flattened to a raw
// position array so the kernel loop touches contiguous memory.
struct PairingTable {
    int m = 0;
    std::vector<Pairing> all;
    std::vector<Pairing> connected;
    std::vector<int> all_flat;       // size all.size() * m, arc endpoints in order
    std::vector<int> connected_flat; // size connected.size() * m

    static void flatten(const std::vector<Pairing>& src, std::vector<int>& dst, int m) {
        dst.reserve(src.size() * m);
        for (const Pairing& q : src)
            for (const auto& arc : q) {
                dst.push_back(arc.first);
                dst.push_back(arc.second);
            }
    }

    explicit PairingTable(int m_points) : m(m_points) {
        all = enumerate_pairings(m);
        for (const Pairing& q : all)
            if (is_connected(q)) connected.push_back(q);
        flatten(all, all_flat, m);
        flatten(connected, connected_flat, m);
    }
};

// Shared cache; point counts stay tiny (m <= m_bar + 1 <= 12).
inline const PairingTable& pairing_table(int m_points) {
    static std::vector<const PairingTable*> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    if (m_points >= static_cast<int>(cache.size())) cache.resize(m_points + 1, nullptr);
    if (!cache[m_points]) cache[m_points] = new PairingTable(m_points);
    return *cache[m_points];
}

// Sum over pairings of products of B factors.  abs_idx[p] is the
// absolute grid index |tau_p| of contour point p; the bath argument is
// |tau_earlier| - |tau_later| in grid units.
inline cplx influence_sum(const std::vector<int>& flat, int m, const int* abs_idx,
                          const BathTable& table) {
    cplx total(0.0);
    const int arcs = m / 2;
    for (std::size_t base = 0; base < flat.size(); base += m) {
        cplx prod(1.0);
        for (int a = 0; a < arcs; ++a) {
            const int p = flat[base + 2 * a], q = flat[base + 2 * a + 1];
            prod *= table(abs_idx[p] - abs_idx[q]);
        }
        total += prod;
    }
    return total;
}

inline cplx influence_full(const PairingTable& t, const int* abs_idx, const BathTable& table) {
    return influence_sum(t.all_flat, t.m, abs_idx, table);
}

inline cplx influence_connected(const PairingTable& t, const int* abs_idx, const BathTable& table) {
    return influence_sum(t.connected_flat, t.m, abs_idx, table);
}

} // namespace spinchain

#endif
