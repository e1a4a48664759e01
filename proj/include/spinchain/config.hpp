/*
 * Run configuration: time grid, per-spin physical parameters, bath
 * parameters, truncation orders, and the JSON loader with validation.
 *
 * Spins whose physical parameters agree bit-for-bit share a "spin class";
 * the propagator tables are solved once per class and reused along the
 * chain, so a uniform chain costs the same as a single spin on the solve
 * side regardless of its length.
 */
#ifndef SPINCHAIN_CONFIG_HPP
#define SPINCHAIN_CONFIG_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace spinchain {

struct TimeGrid {
    double dt = 0.0;
    int n_steps = 0; // trajectory reaches t = n_steps * dt; contour spans [-t, t]

    double time(int i) const { return dt * i; }
    int contour_points() const { return 2 * n_steps + 1; }
};

struct BathParams {
    double xi = 0.0;        // Kondo parameter; 0 switches the bath off
    double beta = 1.0;      // inverse temperature
    double omega_c = 1.0;   // primary frequency
    double omega_max = 4.0; // discretization cutoff
    int n_osc = 400;        // number of oscillators in the discrete spectral density
};

struct SpinParams {
    double epsilon = 0.0; // sigma_z coefficient in H_s
    double delta = 0.0;   // sigma_x coefficient in H_s
    double coupling = 0.0; // J; the spin's factor in the bond operator V = J sigma_z
    int initial = +1;     // varsigma; +1 or -1
    BathParams bath;
};

struct Numerics {
    double dt = 0.0;
    int n_steps = 0;
    int m_bar = 1; // odd truncation of system-bath insertions per kernel
    int n_bar = 0; // max interspin crosses per spin line
    int threads = 0; // 0 = decide at runtime
};

// Everything that determines a spin's propagator tables (observable and
// initial state excluded: they enter only through the jump insertion and
// the closing trace).  Compared bitwise, as documented.
struct SpinClassKey {
    double epsilon, delta, coupling;
    double xi, beta, omega_c, omega_max;
    int n_osc;

    bool operator==(const SpinClassKey& o) const {
        return std::memcmp(this, &o, sizeof(SpinClassKey)) == 0;
    }
};

struct ChainConfig {
    Numerics numerics;
    int observable_spin = 0;
    std::vector<SpinParams> spins;

    int n_spins() const { return static_cast<int>(spins.size()); }
    TimeGrid grid() const { return TimeGrid{numerics.dt, numerics.n_steps}; }

    SpinClassKey class_key(int k) const {
        const SpinParams& s = spins[k];
        SpinClassKey key{};
        key.epsilon = s.epsilon;
        key.delta = s.delta;
        key.coupling = s.coupling;
        key.xi = s.bath.xi;
        key.beta = s.bath.beta;
        key.omega_c = s.bath.omega_c;
        key.omega_max = s.bath.omega_max;
        key.n_osc = s.bath.n_osc;
        return key;
    }
};

// Partition of the chain into solve-once classes, in first-appearance order.
struct SpinClassTable {
    std::vector<SpinClassKey> keys;
    std::vector<int> spin_to_class;

    int n_classes() const { return static_cast<int>(keys.size()); }
};

inline SpinClassTable partition_classes(const ChainConfig& cfg) {
    SpinClassTable table;
    table.spin_to_class.resize(cfg.spins.size());
    for (int k = 0; k < cfg.n_spins(); ++k) {
        SpinClassKey key = cfg.class_key(k);
        int found = -1;
        for (int c = 0; c < table.n_classes(); ++c)
            if (table.keys[c] == key) { found = c; break; }
        if (found < 0) {
            found = table.n_classes();
            table.keys.push_back(key);
        }
        table.spin_to_class[k] = found;
    }
    return table;
}

// FNV-1a over the class keys plus grid/truncation parameters; used to
// reject stale checkpoints.
inline std::uint64_t config_fingerprint(const ChainConfig& cfg) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix(&cfg.numerics.dt, sizeof(double));
    mix(&cfg.numerics.n_steps, sizeof(int));
    mix(&cfg.numerics.m_bar, sizeof(int));
    mix(&cfg.numerics.n_bar, sizeof(int));
    for (int k = 0; k < cfg.n_spins(); ++k) {
        SpinClassKey key = cfg.class_key(k);
        mix(&key, sizeof(key));
        mix(&cfg.spins[k].initial, sizeof(int));
    }
    return h;
}

inline void validate(const ChainConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (cfg.spins.empty()) fail("at least one spin is required");
    if (cfg.numerics.dt <= 0.0) fail("dt must be positive");
    if (cfg.numerics.n_steps < 1) fail("n_steps must be at least 1");
    if (cfg.numerics.m_bar < 1) fail("m_bar must be at least 1");
    if (cfg.numerics.m_bar % 2 == 0) fail("m_bar must be odd");
    if (cfg.numerics.m_bar > 11) fail("m_bar must not exceed 11");
    if (cfg.numerics.n_bar < 0) fail("n_bar must be nonnegative");
    if (cfg.numerics.n_bar > 12) fail("n_bar must not exceed 12");
    if (cfg.numerics.n_steps > 512) fail("n_steps must not exceed 512");
    if (cfg.numerics.threads < 0) fail("threads must be nonnegative");
    if (cfg.observable_spin < 0 || cfg.observable_spin >= cfg.n_spins())
        fail("observable_spin out of range");
    for (const SpinParams& s : cfg.spins) {
        if (s.initial != 1 && s.initial != -1) fail("initial must be +1 or -1");
        if (s.bath.xi < 0.0) fail("xi must be nonnegative");
        if (s.bath.beta <= 0.0) fail("beta must be positive");
        if (s.bath.omega_c <= 0.0) fail("omega_c must be positive");
        if (s.bath.omega_max <= 0.0) fail("omega_max must be positive");
        if (s.bath.n_osc < 1) fail("n_osc must be at least 1");
    }
}

namespace detail {

inline BathParams parse_bath(const nlohmann::json& j) {
    BathParams b;
    b.xi = j.value("xi", 0.0);
    b.beta = j.value("beta", 1.0);
    b.omega_c = j.value("omega_c", 1.0);
    if (j.contains("omega_max"))
        b.omega_max = j.at("omega_max").get<double>();
    else
        b.omega_max = j.value("omega_max_factor", 4.0) * b.omega_c;
    b.n_osc = j.value("n_osc", 400);
    return b;
}

inline SpinParams parse_spin(const nlohmann::json& j) {
    SpinParams s;
    s.epsilon = j.value("epsilon", 0.0);
    s.delta = j.value("delta", 0.0);
    s.coupling = j.value("J", 0.0);
    s.initial = j.value("initial", +1);
    if (j.contains("bath")) s.bath = parse_bath(j.at("bath"));
    return s;
}

} // namespace detail

inline ChainConfig config_from_json(const nlohmann::json& j) {
    ChainConfig cfg;
    if (!j.contains("numerics")) throw std::invalid_argument("missing numerics block");
    const nlohmann::json& num = j.at("numerics");
    if (!num.contains("dt") || !num.contains("n_steps"))
        throw std::invalid_argument("numerics requires dt and n_steps");
    cfg.numerics.dt = num.at("dt").get<double>();
    cfg.numerics.n_steps = num.at("n_steps").get<int>();
    cfg.numerics.m_bar = num.value("m_bar", 1);
    cfg.numerics.n_bar = num.value("n_bar", 0);
    cfg.numerics.threads = num.value("threads", 0);
    cfg.observable_spin = j.value("observable_spin", 0);

    if (j.contains("spins")) {
        for (const nlohmann::json& js : j.at("spins")) cfg.spins.push_back(detail::parse_spin(js));
    } else if (j.contains("spins_uniform")) {
        int count = j.value("count", 0);
        if (count < 1) throw std::invalid_argument("count must be at least 1 with spins_uniform");
        cfg.spins.assign(count, detail::parse_spin(j.at("spins_uniform")));
    } else {
        throw std::invalid_argument("config requires spins or spins_uniform");
    }
    validate(cfg);
    return cfg;
}

inline ChainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config parse error: " + std::string(e.what()));
    }
    return config_from_json(j);
}

} // namespace spinchain

#endif
