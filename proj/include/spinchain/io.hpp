/*
 * File formats: trajectory CSV, bath-table CSV, gnuplot script, and the
 * binary propagator-store checkpoint.  CSV numbers use %.17g so files
 * round-trip exactly; the checkpoint is a machine-local cache in native
 * byte order, guarded by a header that pins grid, truncations, and the
 * config fingerprint.
 */
#ifndef SPINCHAIN_IO_HPP
#define SPINCHAIN_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "inchworm.hpp"
#include "mat2.hpp"

namespace spinchain {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_or_throw(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

} // namespace detail

inline void write_trajectory_csv(const std::string& path, const std::vector<int>& targets,
                                 const std::vector<std::vector<cplx>>& values, double dt) {
    detail::FilePtr f = detail::open_or_throw(path, "w");
    std::fprintf(f.get(), "t,spin,re,im\n");
    const std::size_t n_rows = values.empty() ? 0 : values[0].size();
    for (std::size_t l = 0; l < n_rows; ++l)
        for (std::size_t ti = 0; ti < targets.size(); ++ti)
            std::fprintf(f.get(), "%.17g,%d,%.17g,%.17g\n", static_cast<double>(l) * dt,
                         targets[ti], values[ti][l].real(), values[ti][l].imag());
}

inline void write_bath_table_csv(const std::string& path, const BathTable& table) {
    detail::FilePtr f = detail::open_or_throw(path, "w");
    std::fprintf(f.get(), "lag,re,im\n");
    for (int lag = -table.max_lag(); lag <= table.max_lag(); ++lag)
        std::fprintf(f.get(), "%d,%.17g,%.17g\n", lag, table(lag).real(), table(lag).imag());
}

inline void write_plot_script(const std::string& path, const std::string& csv_path,
                              const std::vector<int>& targets) {
    detail::FilePtr f = detail::open_or_throw(path, "w");
    std::fprintf(f.get(), "set datafile separator ','\n");
    std::fprintf(f.get(), "set xlabel 't'\n");
    std::fprintf(f.get(), "set ylabel '<sigma_z>'\n");
    std::fprintf(f.get(), "set key top right\n");
    std::fprintf(f.get(), "plot ");
    for (std::size_t ti = 0; ti < targets.size(); ++ti)
        std::fprintf(f.get(), "%s'%s' skip 1 using 1:($2==%d?$3:1/0) with lines title 'spin %d'",
                     ti == 0 ? "" : ", \\\n     ", csv_path.c_str(), targets[ti], targets[ti]);
    std::fprintf(f.get(), "\n");
}

// ---------------------------------------------------------------
// Propagator-store checkpoint
// ---------------------------------------------------------------

namespace detail {

constexpr char checkpoint_magic[8] = {'S', 'P', 'C', 'H', 'A', 'I', 'N', '1'};

struct CheckpointHeader {
    char magic[8];
    double dt;
    std::int32_t n_steps, m_bar, n_bar, n_classes;
    std::uint64_t fingerprint;
};

template <class T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return static_cast<bool>(is);
}

inline void write_canonical(std::ofstream& os, const CanonicalStore& store, int L, int n_bar) {
    for (int len = 0; len <= L; ++len)
        for (int n = 0; n <= n_bar; ++n) {
            const std::uint64_t count = multiset_count(len + 1, n);
            if (count > 0)
                os.write(reinterpret_cast<const char*>(&store.at(len, n, 0)),
                         static_cast<std::streamsize>(count * sizeof(Mat2)));
        }
}

inline bool read_canonical(std::ifstream& is, CanonicalStore& store, int L, int n_bar) {
    for (int len = 0; len <= L; ++len)
        for (int n = 0; n <= n_bar; ++n) {
            const std::uint64_t count = multiset_count(len + 1, n);
            if (count > 0) {
                is.read(reinterpret_cast<char*>(&store.at(len, n, 0)),
                        static_cast<std::streamsize>(count * sizeof(Mat2)));
                if (!is) return false;
            }
        }
    return true;
}

inline void write_straddle(std::ofstream& os, const StraddleStore& store, int L, int n_bar) {
    for (int n = 0; n <= n_bar; ++n) {
        const std::uint64_t n_ranks = multiset_count(2 * L + 1, n);
        for (std::uint64_t r = 0; r < n_ranks; ++r) {
            const Mat2* blk = store.block(n, r);
            if (!blk) continue;
            const std::uint64_t count =
                static_cast<std::uint64_t>(store.rows(n, r)) * store.fronts(n, r);
            os.write(reinterpret_cast<const char*>(blk),
                     static_cast<std::streamsize>(count * sizeof(Mat2)));
        }
    }
}

inline bool read_straddle(std::ifstream& is, StraddleStore& store, int L, int n_bar) {
    for (int n = 0; n <= n_bar; ++n) {
        const std::uint64_t n_ranks = multiset_count(2 * L + 1, n);
        for (std::uint64_t r = 0; r < n_ranks; ++r) {
            Mat2* blk = store.block(n, r);
            if (!blk) continue;
            const std::uint64_t count =
                static_cast<std::uint64_t>(store.rows(n, r)) * store.fronts(n, r);
            is.read(reinterpret_cast<char*>(blk),
                    static_cast<std::streamsize>(count * sizeof(Mat2)));
            if (!is) return false;
        }
    }
    return true;
}

} // namespace detail

// Saves every class's solved stores; the straddle kinds actually built
// per class are encoded as a bitmask in the stream.
inline void save_checkpoint(const std::string& path, const ChainConfig& cfg,
                            const std::vector<std::unique_ptr<SolveContext>>& ctxs) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path);
    detail::CheckpointHeader h{};
    std::memcpy(h.magic, detail::checkpoint_magic, 8);
    h.dt = cfg.numerics.dt;
    h.n_steps = cfg.numerics.n_steps;
    h.m_bar = cfg.numerics.m_bar;
    h.n_bar = cfg.numerics.n_bar;
    h.n_classes = static_cast<std::int32_t>(ctxs.size());
    h.fingerprint = config_fingerprint(cfg);
    detail::put(os, h);
    for (std::size_t c = 0; c < ctxs.size(); ++c) {
        std::uint8_t mask = 0;
        for (int k = 0; k < 2; ++k)
            if (ctxs[c]->kind_built[k]) mask |= static_cast<std::uint8_t>(1u << k);
        detail::put(os, mask);
    }
    const int L = cfg.numerics.n_steps, n_bar = cfg.numerics.n_bar;
    for (std::size_t c = 0; c < ctxs.size(); ++c) {
        detail::write_canonical(os, ctxs[c]->neg, L, n_bar);
        detail::write_canonical(os, ctxs[c]->pos, L, n_bar);
        for (int k = 0; k < 2; ++k)
            if (ctxs[c]->kind_built[k]) detail::write_straddle(os, ctxs[c]->straddle[k], L, n_bar);
    }
    if (!os) throw std::runtime_error("short write to " + path);
}

// Loads a checkpoint into freshly built contexts.  Returns false (and
// leaves the contexts untouched beyond possibly partial fills) when the
// file is absent, malformed, or solved for a different config or a
// smaller set of straddle kinds; the caller then solves from scratch.
inline bool load_checkpoint(const std::string& path, const ChainConfig& cfg,
                            std::vector<std::unique_ptr<SolveContext>>& ctxs,
                            const std::vector<std::vector<ObsKind>>& kinds) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    detail::CheckpointHeader h{};
    if (!detail::get(is, h)) return false;
    if (std::memcmp(h.magic, detail::checkpoint_magic, 8) != 0) return false;
    if (h.dt != cfg.numerics.dt || h.n_steps != cfg.numerics.n_steps ||
        h.m_bar != cfg.numerics.m_bar || h.n_bar != cfg.numerics.n_bar ||
        h.fingerprint != config_fingerprint(cfg) ||
        h.n_classes != static_cast<std::int32_t>(ctxs.size()))
        return false;
    std::vector<std::uint8_t> masks(ctxs.size());
    for (std::size_t c = 0; c < ctxs.size(); ++c)
        if (!detail::get(is, masks[c])) return false;
    for (std::size_t c = 0; c < ctxs.size(); ++c) {
        std::uint8_t need = 0;
        for (ObsKind k : kinds[c]) need |= static_cast<std::uint8_t>(1u << static_cast<int>(k));
        if ((masks[c] & need) != need) return false;
    }
    const int L = cfg.numerics.n_steps, n_bar = cfg.numerics.n_bar;
    for (std::size_t c = 0; c < ctxs.size(); ++c) {
        if (!detail::read_canonical(is, ctxs[c]->neg, L, n_bar)) return false;
        if (!detail::read_canonical(is, ctxs[c]->pos, L, n_bar)) return false;
        for (int k = 0; k < 2; ++k)
            if (masks[c] & (1u << k)) {
                ctxs[c]->ensure_kind(static_cast<ObsKind>(k));
                if (!detail::read_straddle(is, ctxs[c]->straddle[k], L, n_bar)) return false;
            }
    }
    return true;
}

} // namespace spinchain

#endif
