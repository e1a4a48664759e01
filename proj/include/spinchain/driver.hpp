/*
 * Run orchestration: solves each spin class once, then assembles the
 * per-target trajectories, one independent resummation per output time.
 * Also hosts the cost scan used to exercise the O(L^{m_bar+n_bar+2})
 * growth of kernel work.
 */
#ifndef SPINCHAIN_DRIVER_HPP
#define SPINCHAIN_DRIVER_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "counters.hpp"
#include "inchworm.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "resummation.hpp"

namespace spinchain {

struct RunOptions {
    std::vector<int> targets; // must be nonempty and in range
    int threads = 0;          // 0: config, then SIM_THREADS, then hardware
    std::string checkpoint;   // empty: no store checkpointing
    std::ostream* log = nullptr;
};

struct RunReport {
    double solve_seconds = 0.0;
    double resum_seconds = 0.0;
    std::uint64_t lbc_evals = 0;
    std::uint64_t kernel_evals = 0;
    std::uint64_t store_bytes_estimate = 0;
    int threads = 1;
    bool zero_bath_path = false;
    bool checkpoint_loaded = false;
    std::string output_path;
};

struct RunResult {
    std::vector<int> targets;
    std::vector<std::vector<cplx>> values; // [target][l], l = 0..n_steps
    RunReport report;
};

inline void print_report(std::ostream& os, const RunReport& r) {
    os << "inchworm solve seconds: " << r.solve_seconds << "\n"
       << "resummation seconds:    " << r.resum_seconds << "\n"
       << "L_b^c evaluations:      " << r.lbc_evals << "\n"
       << "kernel evaluations:     " << r.kernel_evals << "\n"
       << "store bytes (estimate): " << r.store_bytes_estimate << "\n"
       << "threads:                " << r.threads << "\n";
    if (r.zero_bath_path) os << "engine: zero-bath product path\n";
    if (r.checkpoint_loaded) os << "propagator store: loaded from checkpoint\n";
    if (!r.output_path.empty()) os << "output: " << r.output_path << "\n";
}

inline std::uint64_t canonical_store_estimate(int L, int n_bar) {
    std::uint64_t total = 0;
    for (int len = 0; len <= L; ++len)
        for (int n = 0; n <= n_bar; ++n) total += multiset_count(len + 1, n) * sizeof(Mat2);
    return total;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Straddle kinds each class must provide for the given target set.
inline std::vector<std::vector<ObsKind>> kinds_per_class(const ChainConfig& cfg,
                                                         const SpinClassTable& classes,
                                                         const std::vector<int>& targets) {
    std::vector<bool> is_target(cfg.n_spins(), false);
    for (int t : targets) is_target[t] = true;
    std::vector<std::vector<ObsKind>> kinds(classes.n_classes());
    for (int c = 0; c < classes.n_classes(); ++c) {
        bool obs = false, id = false;
        for (int k = 0; k < cfg.n_spins(); ++k) {
            if (classes.spin_to_class[k] != c) continue;
            if (is_target[k]) obs = true;
            for (int t : targets)
                if (t != k) id = true;
        }
        if (obs) kinds[c].push_back(ObsKind::Observable);
        if (id) kinds[c].push_back(ObsKind::Identity);
    }
    return kinds;
}

} // namespace detail

inline RunResult run_chain(const ChainConfig& cfg, const RunOptions& opt) {
    validate(cfg);
    if (opt.targets.empty()) throw std::invalid_argument("no target spin selected");
    for (int t : opt.targets)
        if (t < 0 || t >= cfg.n_spins()) throw std::invalid_argument("target spin out of range");

    const int L = cfg.numerics.n_steps;
    const int n_bar = cfg.numerics.n_bar;
    const double dt = cfg.numerics.dt;
    const int threads = resolve_threads(opt.threads > 0 ? opt.threads : cfg.numerics.threads);

    RunResult res;
    res.targets = opt.targets;
    res.values.assign(opt.targets.size(), std::vector<cplx>(L + 1, cplx(0.0)));
    res.report.threads = threads;

    bool zero_bath = true;
    for (const SpinParams& s : cfg.spins) zero_bath = zero_bath && s.bath.xi == 0.0;
    res.report.zero_bath_path = zero_bath;

    const SpinClassTable classes = partition_classes(cfg);
    CostCounters counters;

    if (zero_bath) {
        // No propagator tables: chain factors are bare cross-event
        // products.  Small trace tables go through the regular joins;
        // otherwise the transfer march over time nodes takes over.
        std::vector<std::unique_ptr<SpinAlgebra>> algs;
        for (int c = 0; c < classes.n_classes(); ++c) {
            SpinParams p{};
            const SpinClassKey& key = classes.keys[c];
            p.epsilon = key.epsilon;
            p.delta = key.delta;
            p.coupling = key.coupling;
            algs.push_back(std::make_unique<SpinAlgebra>(p, cfg.grid()));
        }
        std::vector<const SpinAlgebra*> alg_by_spin(cfg.n_spins());
        std::vector<int> initials(cfg.n_spins());
        for (int k = 0; k < cfg.n_spins(); ++k) {
            alg_by_spin[k] = algs[classes.spin_to_class[k]].get();
            initials[k] = cfg.spins[k].initial;
        }
        const bool use_join = multiset_count_upto(2 * L + 1, n_bar) <= (std::uint64_t(1) << 21);
        const auto t0 = detail::Clock::now();
        const std::uint64_t jobs = opt.targets.size() * static_cast<std::uint64_t>(L + 1);
        parallel_for(jobs, threads, [&](std::uint64_t job) {
            const int ti = static_cast<int>(job / (L + 1));
            const int l = static_cast<int>(job % (L + 1));
            const int target = opt.targets[ti];
            if (use_join) {
                std::vector<LevelArray> tables;
                tables.reserve(cfg.n_spins());
                std::vector<const LevelArray*> ptrs;
                for (int k = 0; k < cfg.n_spins(); ++k) {
                    tables.push_back(build_trace_table_seeds(
                        *alg_by_spin[k], k == target ? ObsKind::Observable : ObsKind::Identity,
                        initials[k], l, n_bar));
                    ptrs.push_back(&tables.back());
                }
                res.values[ti][l] = chain_value(ptrs, n_bar, l, dt);
            } else {
                res.values[ti][l] = chain_value_seeds(alg_by_spin, initials, target, n_bar, l, dt);
            }
        });
        res.report.resum_seconds = detail::seconds_since(t0);
        return res;
    }

    const auto kinds = detail::kinds_per_class(cfg, classes, opt.targets);
    std::uint64_t estimate = 0;
    for (int c = 0; c < classes.n_classes(); ++c) {
        estimate += 2 * canonical_store_estimate(L, n_bar);
        estimate += kinds[c].size() * StraddleStore::estimate_bytes(L, n_bar);
    }
    res.report.store_bytes_estimate = estimate;
    if (opt.log) *opt.log << "estimated propagator store bytes: " << estimate << std::endl;

    std::vector<std::unique_ptr<SolveContext>> ctxs;
    for (int c = 0; c < classes.n_classes(); ++c) {
        SpinParams p{};
        const SpinClassKey& key = classes.keys[c];
        p.epsilon = key.epsilon;
        p.delta = key.delta;
        p.coupling = key.coupling;
        p.bath.xi = key.xi;
        p.bath.beta = key.beta;
        p.bath.omega_c = key.omega_c;
        p.bath.omega_max = key.omega_max;
        p.bath.n_osc = key.n_osc;
        ctxs.push_back(std::make_unique<SolveContext>(p, cfg.grid(), cfg.numerics.m_bar, n_bar));
    }

    const auto t_solve = detail::Clock::now();
    bool loaded = false;
    if (!opt.checkpoint.empty() && load_checkpoint(opt.checkpoint, cfg, ctxs, kinds)) loaded = true;
    if (!loaded) {
        for (int c = 0; c < classes.n_classes(); ++c)
            solve_class(*ctxs[c], kinds[c], threads, counters);
        if (!opt.checkpoint.empty()) save_checkpoint(opt.checkpoint, cfg, ctxs);
    }
    res.report.checkpoint_loaded = loaded;
    res.report.solve_seconds = detail::seconds_since(t_solve);

    const auto t_resum = detail::Clock::now();
    const std::uint64_t jobs = opt.targets.size() * static_cast<std::uint64_t>(L + 1);
    parallel_for(jobs, threads, [&](std::uint64_t job) {
        const int ti = static_cast<int>(job / (L + 1));
        const int l = static_cast<int>(job % (L + 1));
        const int target = opt.targets[ti];
        // trace tables for this horizon, shared across same-kind spins
        std::vector<std::unique_ptr<LevelArray>> cache(classes.n_classes() * 4);
        std::vector<const LevelArray*> ptrs(cfg.n_spins());
        for (int k = 0; k < cfg.n_spins(); ++k) {
            const ObsKind kind = k == target ? ObsKind::Observable : ObsKind::Identity;
            const int slot = classes.spin_to_class[k] * 4 + static_cast<int>(kind) * 2 +
                             (cfg.spins[k].initial > 0 ? 1 : 0);
            if (!cache[slot])
                cache[slot] = std::make_unique<LevelArray>(build_trace_table(
                    *ctxs[classes.spin_to_class[k]], kind, cfg.spins[k].initial, l, n_bar));
            ptrs[k] = cache[slot].get();
        }
        res.values[ti][l] = chain_value(ptrs, n_bar, l, dt);
    });
    res.report.resum_seconds = detail::seconds_since(t_resum);
    res.report.lbc_evals = counters.lbc();
    res.report.kernel_evals = counters.kernel();
    return res;
}

struct CostRow {
    int n_steps = 0;
    std::uint64_t lbc = 0;
    std::uint64_t kernels = 0;
    double seconds = 0.0;
    double log2_ratio = 0.0; // vs the previous row; 0 for the first
};

// Inchworm-solve cost growth over a list of horizons, using spin 0's
// parameters (intended for single-spin configs).
inline std::vector<CostRow> cost_scan(ChainConfig cfg, const std::vector<int>& steps,
                                      int threads_req) {
    std::vector<CostRow> rows;
    const int threads = resolve_threads(threads_req > 0 ? threads_req : cfg.numerics.threads);
    for (int L : steps) {
        cfg.numerics.n_steps = L;
        validate(cfg);
        SolveContext ctx(cfg.spins[0], cfg.grid(), cfg.numerics.m_bar, cfg.numerics.n_bar);
        CostCounters counters;
        const auto t0 = detail::Clock::now();
        solve_class(ctx, {ObsKind::Observable}, threads, counters);
        CostRow row;
        row.n_steps = L;
        row.lbc = counters.lbc();
        row.kernels = counters.kernel();
        row.seconds = detail::seconds_since(t0);
        if (!rows.empty() && rows.back().lbc > 0 && row.lbc > 0)
            row.log2_ratio = std::log2(static_cast<double>(row.lbc) /
                                       static_cast<double>(rows.back().lbc));
        rows.push_back(row);
    }
    return rows;
}

} // namespace spinchain

#endif
