/*
 * Per-spin operator algebra on the unfolded contour.
 *
 * A spin has H = epsilon*sigma_z + delta*sigma_x, bath coupling operator
 * sigma_z and bond operator J*sigma_z.  Because H^2 = omega^2 * Id with
 * omega = sqrt(epsilon^2 + delta^2), the propagator has the closed form
 *   exp(-iHt) = cos(omega t) Id - i sin(omega t)/omega H.
 * Interaction-picture operators at contour time tau depend on |tau| only:
 *   A_I(tau) = exp(-iH|tau|) A exp(+iH|tau|),
 * so everything is tabulated once per absolute grid index.
 */
#ifndef SPINCHAIN_SPIN_ALGEBRA_HPP
#define SPINCHAIN_SPIN_ALGEBRA_HPP

#include <cmath>
#include <cstdlib>
#include <vector>

#include "config.hpp"
#include "mat2.hpp"

namespace spinchain {

// sqrt(i*s) for s = +1 / -1; cross insertions on the contour carry this factor.
inline cplx sqrt_i_sign(int s) {
    const double r = std::sqrt(0.5);
    return s > 0 ? cplx(r, r) : cplx(r, -r);
}

// i*s for s = +1 / -1; bath-coupling insertions carry this factor.
inline cplx i_sign(int s) { return s > 0 ? cplx(0.0, 1.0) : cplx(0.0, -1.0); }

class SpinAlgebra {
  public:
    SpinAlgebra(const SpinParams& p, const TimeGrid& grid)
        : coupling_(p.coupling), dt_(grid.dt), n_(grid.n_steps) {
        h_ = p.epsilon * Mat2::sigma_z() + p.delta * Mat2::sigma_x();
        omega_ = std::sqrt(p.epsilon * p.epsilon + p.delta * p.delta);
        u_.resize(n_ + 1);
        udag_.resize(n_ + 1);
        w_.resize(n_ + 1);
        for (int j = 0; j <= n_; ++j) {
            u_[j] = propagator(j * dt_);
            udag_[j] = adjoint(u_[j]);
            w_[j] = u_[j] * Mat2::sigma_z() * udag_[j];
        }
    }

    // exp(-iHt), exact for this two-level Hamiltonian.
    Mat2 propagator(double t) const {
        if (omega_ == 0.0) return Mat2::identity();
        Mat2 u = std::cos(omega_ * t) * Mat2::identity();
        u += cplx(0.0, -std::sin(omega_ * t) / omega_) * h_;
        return u;
    }

    const Mat2& u_abs(int j) const { return u_[j]; }
    const Mat2& u_abs_dag(int j) const { return udag_[j]; }

    // sigma_z in the interaction picture at contour grid point g (sign irrelevant).
    const Mat2& w_int(int g) const { return w_[std::abs(g)]; }

    // bond operator J*sigma_z in the interaction picture.
    Mat2 v_int(int g) const { return coupling_ * w_[std::abs(g)]; }

    // sqrt(i*sign) * V_I(g); the factor a cross insertion contributes.
    Mat2 cross_event(int g, int sign) const { return sqrt_i_sign(sign) * v_int(g); }

    // Interaction-picture initial state at step l: exp(-iHt) |s><s| exp(+iHt).
    Mat2 rho_int(int l, int initial) const {
        Mat2 rho0 = Mat2::zero();
        rho0(initial > 0 ? 0 : 1, initial > 0 ? 0 : 1) = 1.0;
        return u_[l] * rho0 * udag_[l];
    }

    // Conjugations used when (de)canonicalizing stored propagators:
    // store C = U(j)^dag G U(j), read back G = U(j) C U(j)^dag.
    Mat2 to_canonical(const Mat2& g, int j) const { return udag_[j] * g * u_[j]; }
    Mat2 from_canonical(const Mat2& c, int j) const { return u_[j] * c * udag_[j]; }

    double omega() const { return omega_; }
    double coupling() const { return coupling_; }
    const Mat2& hamiltonian() const { return h_; }
    int n_steps() const { return n_; }
    double dt() const { return dt_; }

  private:
    Mat2 h_;
    double omega_ = 0.0;
    double coupling_ = 0.0;
    double dt_ = 0.0;
    int n_ = 0;
    std::vector<Mat2> u_, udag_, w_;
};

} // namespace spinchain

#endif
