#include "spinchain/mat2.hpp"

#include "test_common.hpp"

using namespace spinchain;

int main() {
    const Mat2 x = Mat2::sigma_x();
    const Mat2 y = Mat2::sigma_y();
    const Mat2 z = Mat2::sigma_z();
    const Mat2 id = Mat2::identity();

    // Pauli algebra: sigma_x sigma_y = i sigma_z and cyclic permutations.
    EXPECT_NEAR(max_abs(x * y - cplx(0.0, 1.0) * z), 0.0, 1e-15);
    EXPECT_NEAR(max_abs(y * z - cplx(0.0, 1.0) * x), 0.0, 1e-15);
    EXPECT_NEAR(max_abs(z * x - cplx(0.0, 1.0) * y), 0.0, 1e-15);
    EXPECT_NEAR(max_abs(x * x - id), 0.0, 1e-15);

    // Traces.
    EXPECT_NEAR(std::abs(trace(z)), 0.0, 1e-15);
    EXPECT_NEAR(trace(id).real(), 2.0, 1e-15);
    const Mat2 a{cplx(1, 2), cplx(3, -1), cplx(0, 1), cplx(2, 2)};
    const Mat2 b{cplx(-1, 0), cplx(2, 1), cplx(4, -3), cplx(0, 5)};
    EXPECT_NEAR(std::abs(trace_of_product(a, b) - trace(a * b)), 0.0, 1e-13);

    // Adjoint of a product reverses order.
    EXPECT_NEAR(max_abs(adjoint(a * b) - adjoint(b) * adjoint(a)), 0.0, 1e-13);

    // Linear operations.
    EXPECT_NEAR(max_abs((a + b) - (b + a)), 0.0, 1e-15);
    EXPECT_NEAR(max_abs(2.0 * a - (a + a)), 0.0, 1e-15);
    EXPECT_NEAR(max_abs((a - b) + b - a), 0.0, 1e-15);

    REQUIRE(all_finite(a));
    Mat2 bad = a;
    bad(1, 1) = cplx(std::nan(""), 0.0);
    REQUIRE(!all_finite(bad));

    TEST_SUMMARY();
}
