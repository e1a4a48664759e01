/*
 * Harmonic bath: discretized Ohmic spectral density and the two-point
 * correlation B*(dtau) tabulated on grid lags.
 *
 * The spectral density is a finite comb of n_osc oscillators with
 *   omega_l = -omega_c * ln(1 - (l/L) * (1 - exp(-omega_max/omega_c)))
 *   c_l     = omega_l * sqrt(xi * omega_c * (1 - exp(-omega_max/omega_c)) / L)
 * and the correlation evaluated at a time difference dtau is
 *   B*(dtau) = sum_l c_l^2/(2 omega_l) [coth(beta omega_l / 2) cos(omega_l dtau)
 *                                       - i sin(omega_l dtau)].
 * Every argument the engine ever needs is |tau_j| - |tau_j'| for two grid
 * points on the contour, so a table over integer lags -2n..2n suffices.
 * B*(-x) = conj(B*(x)), hence only nonnegative lags are computed.
 */
#ifndef SPINCHAIN_BATH_HPP
#define SPINCHAIN_BATH_HPP

#include <cmath>
#include <vector>

#include "config.hpp"
#include "mat2.hpp"

namespace spinchain {

// coth(beta*omega/2) written as 1 + 2/(exp(beta*omega) - 1) to stay
// accurate for large beta*omega, where tanh-based forms lose digits.
inline double coth_half_beta_omega(double beta, double omega) {
    return 1.0 + 2.0 / std::expm1(beta * omega);
}

// B*(dtau) summed over n_override oscillators (pass bath.n_osc for the
// production table; the refinement oracle passes larger counts).
inline cplx bath_correlation(const BathParams& bath, double dtau, int n_override) {
    if (bath.xi == 0.0) return cplx(0.0);
    const int L = n_override;
    const double depletion = 1.0 - std::exp(-bath.omega_max / bath.omega_c);
    const double weight_scale = bath.xi * bath.omega_c * depletion / (2.0 * L);
    double re = 0.0, im = 0.0;
    for (int l = 1; l <= L; ++l) {
        const double omega = -bath.omega_c * std::log(1.0 - (static_cast<double>(l) / L) * depletion);
        const double w = omega * weight_scale; // c_l^2 / (2 omega_l)
        re += w * coth_half_beta_omega(bath.beta, omega) * std::cos(omega * dtau);
        im -= w * std::sin(omega * dtau);
    }
    return cplx(re, im);
}

inline cplx bath_correlation(const BathParams& bath, double dtau) {
    return bath_correlation(bath, dtau, bath.n_osc);
}

class BathTable {
  public:
    BathTable() = default;

    BathTable(const BathParams& bath, const TimeGrid& grid) : max_lag_(2 * grid.n_steps) {
        vals_.resize(2 * max_lag_ + 1);
        for (int j = 0; j <= max_lag_; ++j) {
            cplx b = bath_correlation(bath, j * grid.dt);
            vals_[max_lag_ + j] = b;
            vals_[max_lag_ - j] = std::conj(b);
        }
        all_zero_ = bath.xi == 0.0;
    }

    // lag in grid units, valid in [-2 n_steps, 2 n_steps]
    cplx operator()(int lag) const { return vals_[max_lag_ + lag]; }

    int max_lag() const { return max_lag_; }
    bool all_zero() const { return all_zero_; }

  private:
    int max_lag_ = 0;
    bool all_zero_ = true;
    std::vector<cplx> vals_;
};

} // namespace spinchain

#endif
