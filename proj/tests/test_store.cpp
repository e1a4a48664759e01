#include "spinchain/store.hpp"

#include "test_common.hpp"

using namespace spinchain;

int main() {
    // Canonical store: slab sizes, round trip, completeness scan.
    {
        CanonicalStore store(4, 2);
        Mat2 m = Mat2::sigma_x();
        store.at(3, 2, 5) = m;
        EXPECT_NEAR(max_abs(store.at(3, 2, 5) - m), 0.0, 0.0);
        REQUIRE(!all_finite(store.at(3, 2, 4)));

        std::uint64_t expect_bytes = 0;
        for (int len = 0; len <= 4; ++len)
            for (int n = 0; n <= 2; ++n) expect_bytes += multiset_count(len + 1, n) * sizeof(Mat2);
        REQUIRE(store.bytes() == expect_bytes);

        REQUIRE_THROWS(store.check_complete("canonical"));

        CanonicalStore full(2, 1);
        for (int len = 0; len <= 2; ++len)
            for (int n = 0; n <= 1; ++n)
                for (std::uint64_t r = 0; r < multiset_count(len + 1, n); ++r)
                    full.at(len, n, r) = Mat2::identity();
        full.check_complete("canonical"); // must not throw
    }

    // Straddle store block geometry for L = 3, levels 0..2.
    {
        const int L = 3;
        StraddleStore store(L, 2);

        // Level 0: a single block spanning rows a in [-L,-1], frontiers
        // b in [0,L].
        REQUIRE(!store.zero_block(0, 0));
        REQUIRE(store.amax(0, 0) == -1);
        REQUIRE(store.bmin(0, 0) == 0);
        REQUIRE(store.rows(0, 0) == 3);
        REQUIRE(store.fronts(0, 0) == 4);

        // Level 1: tuple {s} with s = w - L.  Rank is w itself.
        for (int w = 0; w <= 2 * L; ++w) {
            const int s = w - L;
            if (s == 0) {
                REQUIRE(store.zero_block(1, w));
                REQUIRE(store.block(1, w) == nullptr);
                EXPECT_NEAR(max_abs(store.read(1, w, -2, 1)), 0.0, 0.0);
                continue;
            }
            REQUIRE(!store.zero_block(1, w));
            REQUIRE(store.amax(1, w) == std::min(s, -1));
            REQUIRE(store.bmin(1, w) == std::max(s, 0));
        }

        // Writes land where reads look.
        Mat2* blk = store.block(1, 1); // s = -2: rows a in [-3,-2], b in [0,3]
        REQUIRE(store.rows(1, 1) == 2 && store.fronts(1, 1) == 4);
        blk[(-2 + L) * store.fronts(1, 1) + (1 - store.bmin(1, 1))] = Mat2::sigma_y();
        EXPECT_NEAR(max_abs(store.read(1, 1, -2, 1) - Mat2::sigma_y()), 0.0, 0.0);

        // Level 2 tuple {-1, 2}: shifted (2, 5), colex rank = C(2,1) + C(6,2) = 17.
        const int w2[2] = {2, 5};
        const std::uint64_t r2 = multiset_rank(w2, 2);
        REQUIRE(!store.zero_block(2, r2));
        REQUIRE(store.amax(2, r2) == -1);
        REQUIRE(store.bmin(2, r2) == 2);
        // Any tuple containing 0 (shifted value L) is dropped.
        const int wz[2] = {1, 3};
        REQUIRE(store.zero_block(2, multiset_rank(wz, 2)));

        // Completeness scan sees the holes until every allocated slot is
        // written.
        REQUIRE_THROWS(store.check_complete("straddle"));
        for (int n = 0; n <= 2; ++n)
            for (std::uint64_t r = 0; r < multiset_count(2 * L + 1, n); ++r) {
                Mat2* b = store.block(n, r);
                if (!b) continue;
                const std::uint64_t cells =
                    std::uint64_t(store.rows(n, r)) * store.fronts(n, r);
                for (std::uint64_t i = 0; i < cells; ++i) b[i] = Mat2::identity();
            }
        store.check_complete("straddle");

        REQUIRE(StraddleStore::estimate_bytes(L, 2) == store.bytes());
    }

    TEST_SUMMARY();
}
