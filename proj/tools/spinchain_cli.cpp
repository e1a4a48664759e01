// Command-line front end: run a chain simulation, scan solve cost over
// horizons, or exercise the built-in cross-check oracles.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinchain/bath.hpp"
#include "spinchain/config.hpp"
#include "spinchain/driver.hpp"
#include "spinchain/io.hpp"
#include "spinchain/oracle.hpp"

namespace {

using namespace spinchain;

std::vector<int> parse_targets(const std::string& spec, const ChainConfig& cfg) {
    std::vector<int> targets;
    if (spec == "all") {
        for (int k = 0; k < cfg.n_spins(); ++k) targets.push_back(k);
        return targets;
    }
    if (spec.empty()) {
        targets.push_back(cfg.observable_spin);
        return targets;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t pos = 0;
        const int v = std::stoi(item, &pos);
        if (pos != item.size()) throw std::invalid_argument("bad target spec: " + item);
        targets.push_back(v);
    }
    return targets;
}

std::vector<int> parse_steps(const std::string& spec) {
    std::vector<int> steps;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t pos = 0;
        const int v = std::stoi(item, &pos);
        if (pos != item.size() || v <= 0) throw std::invalid_argument("bad steps spec: " + item);
        steps.push_back(v);
    }
    if (steps.empty()) throw std::invalid_argument("empty steps list");
    return steps;
}

std::string derived_path(const std::string& out, const std::string& suffix) {
    const size_t dot = out.find_last_of('.');
    const size_t slash = out.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return out + suffix;
    return out.substr(0, dot) + suffix;
}

int cmd_run(const std::string& config_path, const std::string& out,
            const std::string& target_spec, int threads, const std::string& checkpoint,
            bool emit_plot, bool dump_bath) {
    const ChainConfig cfg = load_config(config_path);
    RunOptions opt;
    opt.targets = parse_targets(target_spec, cfg);
    opt.threads = threads;
    opt.checkpoint = checkpoint;
    opt.log = &std::cout;
    RunResult res = run_chain(cfg, opt);
    write_trajectory_csv(out, res.targets, res.values, cfg.numerics.dt);
    res.report.output_path = out;
    if (emit_plot) {
        const std::string plot = derived_path(out, "_plot.gp");
        write_plot_script(plot, out, res.targets);
        std::cout << "plot script: " << plot << "\n";
    }
    if (dump_bath) {
        const std::string bpath = derived_path(out, "_bath.csv");
        BathTable table(cfg.spins[0].bath, cfg.grid());
        write_bath_table_csv(bpath, table);
        std::cout << "bath table: " << bpath << "\n";
    }
    print_report(std::cout, res.report);
    return 0;
}

int cmd_cost_scan(const std::string& config_path, const std::string& steps_spec, int m_bar,
                  int n_bar, int threads, const std::string& out) {
    ChainConfig cfg = load_config(config_path);
    if (m_bar >= 0) cfg.numerics.m_bar = m_bar;
    if (n_bar >= 0) cfg.numerics.n_bar = n_bar;
    const std::vector<int> steps = parse_steps(steps_spec);
    const std::vector<CostRow> rows = cost_scan(cfg, steps, threads);
    std::cout << "m_bar=" << cfg.numerics.m_bar << " n_bar=" << cfg.numerics.n_bar << "\n";
    std::printf("%10s %16s %16s %10s %12s\n", "n_steps", "lbc_evals", "kernel_evals",
                "seconds", "log2_ratio");
    for (const CostRow& r : rows)
        std::printf("%10d %16llu %16llu %10.3f %12.3f\n", r.n_steps,
                    static_cast<unsigned long long>(r.lbc),
                    static_cast<unsigned long long>(r.kernels), r.seconds, r.log2_ratio);
    if (!out.empty()) {
        FILE* f = std::fopen(out.c_str(), "w");
        if (!f) throw std::runtime_error("cannot open output file: " + out);
        std::fprintf(f, "n_steps,lbc_evals,kernel_evals,seconds,log2_ratio\n");
        for (const CostRow& r : rows)
            std::fprintf(f, "%d,%llu,%llu,%.17g,%.17g\n", r.n_steps,
                         static_cast<unsigned long long>(r.lbc),
                         static_cast<unsigned long long>(r.kernels), r.seconds, r.log2_ratio);
        std::fclose(f);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

// Three independent cross-checks against the main engine.  The corrupt
// weight knob (SPINCHAIN_CORRUPT_WEIGHT) deliberately perturbs the bare
// diagram sum so tests can confirm the checks actually bite.
int cmd_oracle(const std::string& config_path, int threads) {
    const ChainConfig cfg = load_config(config_path);
    bool all_pass = true;
    double corrupt = 1.0;
    if (const char* env = std::getenv("SPINCHAIN_CORRUPT_WEIGHT")) corrupt = std::atof(env);

    // 1) distributive law: resummed chain value vs the bare sum over all
    //    insertion tuples, at short horizons where the bare sum is cheap.
    {
        ChainConfig small = cfg;
        small.numerics.n_steps = std::min(cfg.numerics.n_steps, 2);
        small.numerics.n_bar = std::min(cfg.numerics.n_bar, 2);
        validate(small);
        const int L = small.numerics.n_steps;
        const int n_bar = small.numerics.n_bar;
        const int target = small.observable_spin;
        const SpinClassTable classes = partition_classes(small);
        const auto kinds = detail::kinds_per_class(small, classes, {target});
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
            ctxs.push_back(std::make_unique<SolveContext>(p, small.grid(), small.numerics.m_bar,
                                                          n_bar));
        }
        CostCounters counters;
        for (int c = 0; c < classes.n_classes(); ++c)
            solve_class(*ctxs[c], kinds[c], resolve_threads(threads), counters);
        double max_dev = 0.0;
        for (int l = 1; l <= L; ++l) {
            std::vector<LevelArray> tables;
            tables.reserve(small.n_spins());
            std::vector<const LevelArray*> ptrs;
            for (int k = 0; k < small.n_spins(); ++k) {
                const ObsKind kind = k == target ? ObsKind::Observable : ObsKind::Identity;
                tables.push_back(build_trace_table(*ctxs[classes.spin_to_class[k]], kind,
                                                   small.spins[k].initial, l, n_bar));
                ptrs.push_back(&tables.back());
            }
            const cplx resummed = chain_value(ptrs, n_bar, l, small.numerics.dt);
            const cplx bare = bare_diagram_sum(ptrs, n_bar, l, small.numerics.dt, corrupt);
            max_dev = std::max(max_dev, std::abs(resummed - bare));
        }
        const bool pass = max_dev <= 1e-12;
        all_pass = all_pass && pass;
        std::printf("%s distributive-law (max dev %.3e)\n", pass ? "PASS" : "FAIL", max_dev);
    }

    // 2) zero-bath copy of the config vs dense closed-chain evolution.
    //    Horizon, step, chain length and insertion cap are clamped so the
    //    check stays cheap and its truncation error sits well below the
    //    gate whatever the production config looks like.
    {
        ChainConfig closed = cfg;
        const double horizon = std::min(1.0, cfg.numerics.dt * cfg.numerics.n_steps);
        closed.numerics.dt = std::min(cfg.numerics.dt, 0.05);
        closed.numerics.n_steps =
            std::max(1, std::min(40, static_cast<int>(std::lround(horizon / closed.numerics.dt))));
        closed.numerics.n_bar = std::min(cfg.numerics.n_bar, 2);
        if (closed.n_spins() > 8) closed.spins.resize(8);
        if (closed.observable_spin >= closed.n_spins()) closed.observable_spin = 0;
        for (SpinParams& s : closed.spins) s.bath.xi = 0.0;
        validate(closed);
        RunOptions opt;
        opt.targets = {closed.observable_spin};
        opt.threads = threads;
        const RunResult res = run_chain(closed, opt);
        const auto exact = exact_closed_chain(closed);
        double max_dev = 0.0;
        for (int l = 0; l <= closed.numerics.n_steps; ++l)
            max_dev = std::max(max_dev,
                               std::abs(res.values[0][l].real() - exact[l][closed.observable_spin]));
        const bool pass = max_dev <= 1e-2;
        all_pass = all_pass && pass;
        std::printf("%s closed-chain (max dev %.3e)\n", pass ? "PASS" : "FAIL", max_dev);
    }

    // 3) oscillator-count refinement must converge toward a high
    //    resolution reference at every probed lag.
    {
        BathParams bath = cfg.spins[0].bath;
        if (bath.xi == 0.0) bath.xi = 0.2;
        const double dt = cfg.numerics.dt;
        const std::vector<double> lags = {0.5 * dt, 2.0 * dt, 7.0 * dt};
        bool monotone = true;
        double last_max = 0.0;
        for (int n_osc = 400; n_osc <= 6400; n_osc *= 2) {
            double dev = 0.0;
            for (double lag : lags) {
                const cplx ref = highres_bath_correlation(bath, lag);
                const cplx got = bath_correlation(bath, lag, n_osc);
                dev = std::max(dev, std::abs(got - ref) / std::abs(ref));
            }
            if (n_osc > 400 && dev > last_max) monotone = false;
            last_max = dev;
        }
        all_pass = all_pass && monotone;
        std::printf("%s bath-refinement (final rel dev %.3e)\n", monotone ? "PASS" : "FAIL",
                    last_max);
    }

    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"inchworm spin-chain simulator"};
    app.require_subcommand(1);

    std::string config_path, out = "trajectory.csv", target_spec, checkpoint;
    std::string steps_spec = "16,32,64,128", scan_out;
    int threads = 0, m_bar = -1, n_bar = -1;
    bool emit_plot = false, dump_bath = false;

    CLI::App* run = app.add_subcommand("run", "simulate and write a trajectory CSV");
    run->add_option("--config", config_path, "chain config JSON");
    run->add_option("--out", out, "output CSV path");
    run->add_option("--target", target_spec, "spin index, comma list, or 'all'");
    run->add_option("--threads", threads, "worker thread count");
    run->add_option("--checkpoint", checkpoint, "propagator store checkpoint file");
    run->add_flag("--emit-plot-script", emit_plot, "write a gnuplot script next to the CSV");
    run->add_flag("--dump-bath-table", dump_bath, "write the bath correlation table");

    CLI::App* scan = app.add_subcommand("cost-scan", "solve cost growth over horizons");
    scan->add_option("--config", config_path, "chain config JSON");
    scan->add_option("--steps", steps_spec, "comma list of n_steps values");
    scan->add_option("--m-bar", m_bar, "override expansion order cap");
    scan->add_option("--n-bar", n_bar, "override per-spin insertion cap");
    scan->add_option("--threads", threads, "worker thread count");
    scan->add_option("--out", scan_out, "optional CSV for the scan table");

    CLI::App* oracle = app.add_subcommand("oracle", "run the built-in cross-checks");
    oracle->add_option("--config", config_path, "chain config JSON");
    oracle->add_option("--threads", threads, "worker thread count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (config_path.empty()) {
        std::cerr << "missing required --config\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, out, target_spec, threads, checkpoint, emit_plot,
                           dump_bath);
        if (scan->parsed()) return cmd_cost_scan(config_path, steps_spec, m_bar, n_bar, threads,
                                                 scan_out);
        if (oracle->parsed()) return cmd_oracle(config_path, threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
