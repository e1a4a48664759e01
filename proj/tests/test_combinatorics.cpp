#include "spinchain/combinatorics.hpp"

#include <algorithm>
#include <vector>

#include "test_common.hpp"

using namespace spinchain;

// Enumerate all nondecreasing tuples over {0..p-1} of length n in colex
// order by brute force, for rank cross-checks.
static std::vector<std::vector<int>> brute_tuples(int p, int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> v(n, 0);
    if (n == 0) {
        out.push_back(v);
        return out;
    }
    while (true) {
        out.push_back(v);
        int i = 0;
        while (i < n && v[i] == (i + 1 < n ? v[i + 1] : p - 1)) ++i;
        if (i == n) break;
        ++v[i];
        for (int j = 0; j < i; ++j) v[j] = 0;
    }
    return out;
}

int main() {
    EXPECT_NEAR(binom()(5, 2), 10.0, 0.0);
    EXPECT_NEAR(binom()(10, 0), 1.0, 0.0);
    EXPECT_NEAR(binom()(52, 5), 2598960.0, 0.0);
    REQUIRE(binom()(3, 7) == 0);
    REQUIRE_THROWS(binom()(5000, 3));

    // multiset_count(p, n) = C(p + n - 1, n)
    EXPECT_NEAR(multiset_count(4, 0), 1.0, 0.0);
    EXPECT_NEAR(multiset_count(4, 2), 10.0, 0.0);
    EXPECT_NEAR(multiset_count(1, 7), 1.0, 0.0);
    EXPECT_NEAR(multiset_count_upto(3, 2), 1.0 + 3.0 + 6.0, 0.0);

    // Ranks must agree with brute-force colex enumeration, and the
    // odometer must walk tuples in exactly that order.
    for (int p = 1; p <= 5; ++p) {
        for (int n = 0; n <= 4; ++n) {
            const auto all = brute_tuples(p, n);
            REQUIRE(all.size() == multiset_count(p, n));
            std::vector<int> v(std::max(n, 1), 0);
            for (std::size_t r = 0; r < all.size(); ++r) {
                REQUIRE(multiset_rank(all[r].data(), n) == r);
                if (n > 0) {
                    REQUIRE(std::equal(all[r].begin(), all[r].end(), v.begin()));
                    const bool more = next_multiset(v.data(), n, p - 1);
                    REQUIRE(more == (r + 1 < all.size()));
                }
            }
        }
    }

    // multiset_rank_step(v, m): rank increment when appending value v as
    // the m-th (1-based) element of a nondecreasing tuple.
    std::vector<int> tup = {1, 3, 3};
    std::uint64_t acc = 0;
    for (int i = 0; i < 3; ++i) acc += multiset_rank_step(tup[i], i + 1);
    REQUIRE(acc == multiset_rank(tup.data(), 3));

    TEST_SUMMARY();
}
