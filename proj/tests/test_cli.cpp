#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spinchain/config.hpp"
#include "test_common.hpp"

namespace fs = std::filesystem;

static int run_cmd(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) {
        std::printf("command did not exit cleanly: %s\n", cmd.c_str());
        return -1;
    }
    return WEXITSTATUS(status);
}

static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

static int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

int main(int argc, char** argv) {
    if (argc < 3) {
        std::printf("usage: test_cli <spinchain_cli binary> <configs dir>\n");
        return EXIT_FAILURE;
    }
    const std::string cli = std::string("\"") + argv[1] + "\"";
    const fs::path configs(argv[2]);
    const fs::path single = configs / "single_spin.json";
    const fs::path chain = configs / "chain5.json";
    const fs::path work = fs::path("cli_test_out");
    fs::create_directories(work);

    // Every shipped config parses and validates.
    {
        int seen = 0;
        for (const auto& entry : fs::directory_iterator(configs)) {
            if (entry.path().extension() != ".json") continue;
            spinchain::ChainConfig cfg = spinchain::load_config(entry.path().string());
            spinchain::validate(cfg);
            ++seen;
        }
        REQUIRE(seen >= 3);
        REQUIRE(fs::exists(single));
        REQUIRE(fs::exists(chain));
    }

    // Argument handling.
    REQUIRE(run_cmd(cli + " --help > /dev/null 2>&1") == 0);
    REQUIRE(run_cmd(cli + " > /dev/null 2>&1") == 2);
    REQUIRE(run_cmd(cli + " run > /dev/null 2>&1") == 2);
    REQUIRE(run_cmd(cli + " run --config " + (work / "missing.json").string() +
                    " > /dev/null 2>&1") == 1);

    // A run produces the trajectory file with the promised shape.
    const spinchain::ChainConfig single_cfg = spinchain::load_config(single.string());
    const fs::path traj = work / "traj.csv";
    {
        const int rc = run_cmd(cli + " run --config \"" + single.string() + "\" --out \"" +
                               traj.string() + "\" > /dev/null");
        REQUIRE(rc == 0);
        const std::string body = slurp(traj);
        REQUIRE(body.rfind("t,spin,re,im\n", 0) == 0);
        REQUIRE(count_lines(body) == 1 + (single_cfg.numerics.n_steps + 1));
    }

    // Thread count must not change the numbers: byte-identical output.
    {
        const fs::path t3 = work / "traj_t3.csv";
        const int rc = run_cmd("SIM_THREADS=3 " + cli + " run --config \"" + single.string() +
                               "\" --out \"" + t3.string() + "\" > /dev/null");
        REQUIRE(rc == 0);
        REQUIRE(slurp(t3) == slurp(traj));
    }

    // Side outputs: gnuplot script and bath table.
    {
        const fs::path out = work / "extras.csv";
        const int rc =
            run_cmd(cli + " run --config \"" + single.string() + "\" --out \"" + out.string() +
                    "\" --target all --emit-plot-script --dump-bath-table > /dev/null");
        REQUIRE(rc == 0);
        const std::string plot = slurp(work / "extras_plot.gp");
        REQUIRE(plot.find("plot") != std::string::npos);
        const std::string bath = slurp(work / "extras_bath.csv");
        REQUIRE(bath.rfind("lag,re,im\n", 0) == 0);
        REQUIRE(count_lines(bath) == 1 + (4 * single_cfg.numerics.n_steps + 1));
    }

    // Checkpoint round trip: second run restores the propagator store.
    {
        const fs::path ck = work / "store.ckpt";
        const fs::path c1 = work / "ck1.csv";
        const fs::path c2 = work / "ck2.csv";
        fs::remove(ck);
        const std::string base = cli + " run --config \"" + single.string() +
                                 "\" --checkpoint \"" + ck.string() + "\" --out \"";
        REQUIRE(run_cmd(base + c1.string() + "\" > \"" + (work / "ck1.log").string() + "\"") == 0);
        REQUIRE(fs::exists(ck));
        REQUIRE(run_cmd(base + c2.string() + "\" > \"" + (work / "ck2.log").string() + "\"") == 0);
        REQUIRE(slurp(work / "ck1.log").find("loaded from checkpoint") == std::string::npos);
        REQUIRE(slurp(work / "ck2.log").find("loaded from checkpoint") != std::string::npos);
        REQUIRE(slurp(c1) == slurp(c2));
    }

    // Cost scan prints the table and writes the CSV when asked.
    {
        const fs::path out = work / "scan.csv";
        const int rc = run_cmd(cli + " cost-scan --config \"" + single.string() +
                               "\" --steps 4,8 --m-bar 1 --n-bar 0 --out \"" + out.string() +
                               "\" > /dev/null");
        REQUIRE(rc == 0);
        const std::string body = slurp(out);
        REQUIRE(body.rfind("n_steps,", 0) == 0);
        REQUIRE(count_lines(body) == 3);
    }

    // Self-check command: clean pass, and the planted-defect hook trips it.
    {
        REQUIRE(run_cmd(cli + " oracle --config \"" + chain.string() + "\" > \"" +
                        (work / "oracle.log").string() + "\"") == 0);
        const std::string log = slurp(work / "oracle.log");
        REQUIRE(log.find("PASS") != std::string::npos);
        REQUIRE(log.find("FAIL") == std::string::npos);
        REQUIRE(run_cmd("SPINCHAIN_CORRUPT_WEIGHT=1.001 " + cli + " oracle --config \"" +
                        chain.string() + "\" > /dev/null") == 1);
    }

    TEST_SUMMARY();
}
