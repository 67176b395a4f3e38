#include <catch2/catch_amalgamated.hpp>

#include "opcalc/multi_index.hpp"
#include "opcalc/rng.hpp"

using namespace opcalc;

TEST_CASE("factorial of multi-indices") {
    CHECK(factorial(MultiIndex{0, 0}) == 1);
    CHECK(factorial(MultiIndex{3, 2}) == 12);
    CHECK(factorial(MultiIndex{1, 0, 2}) == 2);
    // large degrees stay exact
    CHECK(factorial(MultiIndex{12, 12}) == BigInt("229442532802560000"));
}

TEST_CASE("factorial multiplicative across concatenation") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<int> a, b;
        const int na = 1 + static_cast<int>(rng.raw() % 3);
        const int nb = 1 + static_cast<int>(rng.raw() % 3);
        for (int i = 0; i < na; ++i) a.push_back(static_cast<int>(rng.raw() % 7));
        for (int i = 0; i < nb; ++i) b.push_back(static_cast<int>(rng.raw() % 7));
        std::vector<int> ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        CHECK(factorial(MultiIndex(ab)) ==
              factorial(MultiIndex(a)) * factorial(MultiIndex(b)));
    }
}

TEST_CASE("enumerate_degree fixed order and stars-and-bars counts") {
    const auto e22 = enumerate_degree(2, 2);
    REQUIRE(e22.size() == 3);
    CHECK(e22[0] == MultiIndex{2, 0});
    CHECK(e22[1] == MultiIndex{1, 1});
    CHECK(e22[2] == MultiIndex{0, 2});

    CHECK(enumerate_degree(3, 2).size() == 6);
    const auto e10 = enumerate_degree(1, 0);
    REQUIRE(e10.size() == 1);
    CHECK(e10[0] == MultiIndex{0});

    // C(k + nu - 1, nu - 1) for nu <= 4, k <= 8
    auto binom = [](int n, int k) {
        long r = 1;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return static_cast<std::size_t>(r);
    };
    for (int nu = 1; nu <= 4; ++nu)
        for (int k = 0; k <= 8; ++k) {
            const auto all = enumerate_degree(nu, k);
            CHECK(all.size() == binom(k + nu - 1, nu - 1));
            for (const auto& a : all) CHECK(a.degree() == k);
            // no duplicates: enumeration is strictly ordered
            for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1] > all[i]);
        }
}

TEST_CASE("enumerate_half") {
    const auto h21 = enumerate_half(MultiIndex{2, 1});
    REQUIRE(h21.size() == 2);
    CHECK(h21[0] == MultiIndex{0, 0});
    CHECK(h21[1] == MultiIndex{1, 0});

    const auto h00 = enumerate_half(MultiIndex{0, 0});
    REQUIRE(h00.size() == 1);
    CHECK(h00[0] == MultiIndex{0, 0});

    const auto h4 = enumerate_half(MultiIndex{4});
    REQUIRE(h4.size() == 3);
    CHECK(h4[0] == MultiIndex{0});
    CHECK(h4[1] == MultiIndex{1});
    CHECK(h4[2] == MultiIndex{2});

    // |half(alpha)| = prod_j (floor(alpha_j / 2) + 1)
    for (int k = 0; k <= 6; ++k)
        for (const auto& alpha : enumerate_degree(3, k)) {
            std::size_t expect = 1;
            for (int j = 1; j <= 3; ++j)
                expect *= static_cast<std::size_t>(alpha[j] / 2 + 1);
            CHECK(enumerate_half(alpha).size() == expect);
        }
}

TEST_CASE("shift") {
    CHECK(MultiIndex{1, 0}.shifted(2, +1) == MultiIndex{1, 1});
    CHECK(MultiIndex{1, 0}.shifted(1, -1) == MultiIndex{0, 0});
    CHECK_THROWS_AS((MultiIndex{0, 0}).shifted(1, -1), std::domain_error);
}

TEST_CASE("multi_binomial") {
    CHECK(multi_binomial(MultiIndex{4, 2}, MultiIndex{2, 1}) == 12);
    CHECK(multi_binomial(MultiIndex{3}, MultiIndex{0}) == 1);
}
