/*
 * Cost instrumentation.  Counters are exact (atomic increments, not
 * sampled) so runs are comparable across thread counts.
 */
#ifndef SPINCHAIN_COUNTERS_HPP
#define SPINCHAIN_COUNTERS_HPP

#include <atomic>
#include <cstdint>

namespace spinchain {

struct CostCounters {
    std::atomic<std::uint64_t> lbc_evaluations{0}; // connected-pairing influence products
    std::atomic<std::uint64_t> kernel_evals{0};    // kernel evaluations (one per frontier node)

    void add_lbc(std::uint64_t n) { lbc_evaluations.fetch_add(n, std::memory_order_relaxed); }
    void add_kernel(std::uint64_t n) { kernel_evals.fetch_add(n, std::memory_order_relaxed); }

    std::uint64_t lbc() const { return lbc_evaluations.load(std::memory_order_relaxed); }
    std::uint64_t kernel() const { return kernel_evals.load(std::memory_order_relaxed); }

    void reset() {
        lbc_evaluations.store(0, std::memory_order_relaxed);
        kernel_evals.store(0, std::memory_order_relaxed);
    }
};

} // namespace spinchain

#endif
