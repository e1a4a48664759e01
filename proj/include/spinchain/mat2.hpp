/*
 * 2x2 complex matrices.
 *
 * Everything the propagator engine manipulates per spin is a 2x2 complex
 * matrix, so this is a fixed-size value type with the handful of operations
 * we actually use.  Row-major storage: a[0]=m00, a[1]=m01, a[2]=m10, a[3]=m11.
 */
#ifndef SPINCHAIN_MAT2_HPP
#define SPINCHAIN_MAT2_HPP

#include <array>
#include <cmath>
#include <complex>

namespace spinchain {

using cplx = std::complex<double>;

struct Mat2 {
    std::array<cplx, 4> a{};

    static Mat2 zero() { return Mat2{}; }
    static Mat2 identity() { return Mat2{{cplx(1.0), cplx(0.0), cplx(0.0), cplx(1.0)}}; }
    static Mat2 sigma_x() { return Mat2{{cplx(0.0), cplx(1.0), cplx(1.0), cplx(0.0)}}; }
    static Mat2 sigma_y() { return Mat2{{cplx(0.0), cplx(0.0, -1.0), cplx(0.0, 1.0), cplx(0.0)}}; }
    static Mat2 sigma_z() { return Mat2{{cplx(1.0), cplx(0.0), cplx(0.0), cplx(-1.0)}}; }

    cplx& operator()(int r, int c) { return a[2 * r + c]; }
    const cplx& operator()(int r, int c) const { return a[2 * r + c]; }

    Mat2& operator+=(const Mat2& o) {
        for (int i = 0; i < 4; ++i) a[i] += o.a[i];
        return *this;
    }
    Mat2& operator-=(const Mat2& o) {
        for (int i = 0; i < 4; ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat2& operator*=(const cplx& c) {
        for (int i = 0; i < 4; ++i) a[i] *= c;
        return *this;
    }
};

inline Mat2 operator+(Mat2 x, const Mat2& y) { return x += y; }
inline Mat2 operator-(Mat2 x, const Mat2& y) { return x -= y; }
inline Mat2 operator*(const cplx& c, Mat2 x) { return x *= c; }
inline Mat2 operator*(Mat2 x, const cplx& c) { return x *= c; }

inline Mat2 operator*(const Mat2& x, const Mat2& y) {
    Mat2 r;
    r.a[0] = x.a[0] * y.a[0] + x.a[1] * y.a[2];
    r.a[1] = x.a[0] * y.a[1] + x.a[1] * y.a[3];
    r.a[2] = x.a[2] * y.a[0] + x.a[3] * y.a[2];
    r.a[3] = x.a[2] * y.a[1] + x.a[3] * y.a[3];
    return r;
}

inline Mat2 adjoint(const Mat2& x) {
    return Mat2{{std::conj(x.a[0]), std::conj(x.a[2]), std::conj(x.a[1]), std::conj(x.a[3])}};
}

inline cplx trace(const Mat2& x) { return x.a[0] + x.a[3]; }

// tr(x*y) without forming the product.
inline cplx trace_of_product(const Mat2& x, const Mat2& y) {
    return x.a[0] * y.a[0] + x.a[1] * y.a[2] + x.a[2] * y.a[1] + x.a[3] * y.a[3];
}

// Largest entry magnitude; good enough as a norm for tolerances.
inline double max_abs(const Mat2& x) {
    double m = 0.0;
    for (const auto& v : x.a) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_finite(const Mat2& x) {
    for (const auto& v : x.a)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

} // namespace spinchain

#endif
