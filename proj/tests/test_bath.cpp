#include "spinchain/bath.hpp"

#include <cmath>

#include "test_common.hpp"

using namespace spinchain;

int main() {
    BathParams bath;
    bath.xi = 0.2;
    bath.beta = 5.0;
    bath.omega_c = 2.5;
    bath.omega_max = 10.0;
    bath.n_osc = 400;

    // The top oscillator of the comb must sit exactly at omega_max:
    // l = L gives omega = -omega_c ln(exp(-omega_max/omega_c)).
    {
        const int L = bath.n_osc;
        const double depletion = 1.0 - std::exp(-bath.omega_max / bath.omega_c);
        const double top = -bath.omega_c * std::log(1.0 - depletion);
        EXPECT_NEAR(top, bath.omega_max, 1e-12);
        (void)L;
    }

    // Independent evaluation of the comb sum at a few lags.
    for (double dtau : {0.0, 0.3, -0.7, 2.0}) {
        double re = 0.0, im = 0.0;
        const int L = bath.n_osc;
        const double depletion = 1.0 - std::exp(-bath.omega_max / bath.omega_c);
        for (int l = 1; l <= L; ++l) {
            const double omega =
                -bath.omega_c * std::log(1.0 - (double(l) / L) * depletion);
            const double c2 = omega * omega * bath.xi * bath.omega_c * depletion / L;
            const double coth =
                std::cosh(0.5 * bath.beta * omega) / std::sinh(0.5 * bath.beta * omega);
            re += c2 / (2.0 * omega) * coth * std::cos(omega * dtau);
            im -= c2 / (2.0 * omega) * std::sin(omega * dtau);
        }
        const cplx got = bath_correlation(bath, dtau);
        EXPECT_NEAR(got.real(), re, 1e-10 * std::abs(re));
        EXPECT_NEAR(got.imag(), im, 1e-10);
    }

    // Symmetry and zero-lag structure.
    const cplx b0 = bath_correlation(bath, 0.0);
    REQUIRE(b0.real() > 0.0);
    EXPECT_NEAR(b0.imag(), 0.0, 1e-15);
    const cplx bp = bath_correlation(bath, 0.9);
    const cplx bm = bath_correlation(bath, -0.9);
    EXPECT_NEAR(std::abs(bp - std::conj(bm)), 0.0, 1e-14);

    // Table agrees with direct evaluation on every stored lag.
    TimeGrid grid{0.2, 6};
    BathTable table(bath, grid);
    REQUIRE(table.max_lag() == 12);
    REQUIRE(!table.all_zero());
    for (int lag = -table.max_lag(); lag <= table.max_lag(); ++lag)
        EXPECT_NEAR(std::abs(table(lag) - bath_correlation(bath, lag * grid.dt)), 0.0, 1e-14);

    // xi = 0 switches the bath off entirely.
    BathParams off = bath;
    off.xi = 0.0;
    BathTable zt(off, grid);
    REQUIRE(zt.all_zero());
    EXPECT_NEAR(std::abs(zt(3)), 0.0, 0.0);

    // Doubling the oscillator count moves the value toward a much finer
    // reference; spot-check one lag.
    const cplx ref = bath_correlation(bath, 0.5, 400 * 64);
    const double d400 = std::abs(bath_correlation(bath, 0.5, 400) - ref);
    const double d1600 = std::abs(bath_correlation(bath, 0.5, 1600) - ref);
    REQUIRE(d1600 < d400);

    TEST_SUMMARY();
}
