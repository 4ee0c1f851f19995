#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "unitroot/ramification.hpp"

using namespace unitroot;

namespace {

std::vector<Rational> rats(std::initializer_list<long long> xs) {
    std::vector<Rational> out;
    for (long long x : xs) out.emplace_back(x);
    return out;
}

BreakSequence seq(std::initializer_list<long long> xs) {
    return BreakSequence(3, 1, rats(xs));
}

}  // namespace

TEST_CASE("numbering conversions") {
    CHECK(lower_from_upper(seq({1, 4, 13})).values == rats({1, 10, 91}));
    CHECK(lower_from_upper(seq({1})).values == rats({1}));
    CHECK(lower_from_upper(seq({1, 4})).values == rats({1, 10}));  // 1 + p^2

    CHECK(upper_from_lower({3, rats({1, 10, 91})}).breaks() == rats({1, 4, 13}));
    CHECK(upper_from_lower({3, rats({1})}).breaks() == rats({1}));
}

TEST_CASE("conversion round trip", "[property]") {
    SplitMix64 rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Rational> s;
        long long cur = rng.range(1, 2);
        for (int k = 0; k < 5; ++k) {
            s.emplace_back(cur);
            cur = 3 * cur + rng.range(1, 4);
        }
        BreakSequence orig(3, 1, s);
        BreakSequence back = upper_from_lower(lower_from_upper(orig));
        CHECK(back.breaks() == orig.breaks());
    }
}

TEST_CASE("differents") {
    CHECK(different_of_level(seq({1}), 1) == 4);
    CHECK(different_of_level(seq({1, 4}), 2) == 34);
    CHECK(different_of_level(seq({1, 4, 13}), 3) == 286);
    CHECK_THROWS_AS(different_of_level(seq({1}), 2), ContractError);
}

TEST_CASE("different matches the order formula", "[property]") {
    // delta == |G| s_n - lambda_n + |G| - 1 with |G| = p^n
    SplitMix64 rng(777);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Rational> s;
        long long cur = rng.range(1, 2);
        for (int k = 0; k < 4; ++k) {
            s.emplace_back(cur);
            cur = 3 * cur + rng.range(1, 4);
        }
        BreakSequence bs(3, 1, s);
        LowerBreaks lam = lower_from_upper(bs);
        for (int n = 1; n <= 4; ++n) {
            Rational pn = rational_pow(BigInt(3), n);
            Rational expected = pn * s[n - 1] - lam.values[n - 1] + pn - 1;
            CHECK(different_of_level(bs, n) == expected);
        }
    }
}

TEST_CASE("herbrand function") {
    BreakSequence s = seq({1, 4});
    CHECK(herbrand_psi(s, Rational(0)) == 0);
    CHECK(herbrand_psi(s, Rational(4)) == 10);
    CHECK(herbrand_psi(s, Rational(2)) == 4);

    // psi(s_n) == lambda_n and phi inverts psi
    BreakSequence s3 = seq({1, 4, 13});
    HerbrandFunction h(s3);
    LowerBreaks lam = lower_from_upper(s3);
    for (int n = 0; n < 3; ++n) CHECK(h.psi(s3.breaks()[n]) == lam.values[n]);
    for (long long y = 0; y <= 20; ++y) {
        Rational yr(y, 2);
        CHECK(h.phi(h.psi(yr)) == yr);
    }
}

TEST_CASE("genus sequences") {
    TowerRamificationData data{Rational(0), 3, {{"infty", seq({1, 4, 13})}}};
    GenusTable g = genus_sequence(data, 3);
    REQUIRE(g.size() == 4);
    CHECK(g[0].g == 0);
    CHECK(g[1].g == 0);
    CHECK(g[2].g == 9);
    CHECK(g[3].g == 117);
    for (const auto& row : g) CHECK(row.integral);

    TowerRamificationData etale{Rational(1), 3, {}};
    for (const auto& row : genus_sequence(etale, 4)) CHECK(row.g == 1);

    TowerRamificationData deep{Rational(0), 3, {{"infty", seq({1, 4, 13, 40, 121})}}};
    CHECK(genus_sequence(deep, 4)[4].g == 1170);

    CHECK_THROWS_AS(genus_sequence(data, 5), ContractError);
}

TEST_CASE("base change up the tower") {
    BreakSequence s = seq({1, 4, 13, 40});
    BreakSequence up = base_change_up_tower(s, 1);
    CHECK(up.breaks() == rats({10, 37, 118}));
    CHECK(base_change_up_tower(s, 0).breaks() == s.breaks());

    // geometric s_k = (3^k - 1)/2 at n = 2: 9 s_{k+2} - 9 s_2 + lambda_2
    std::vector<Rational> geo;
    for (int k = 1; k <= 5; ++k) geo.push_back(Rational((BigInt(243) * 0 + big_pow(BigInt(3), k) - 1), BigInt(2)));
    BreakSequence gs(3, 1, geo);
    LowerBreaks lam = lower_from_upper(gs);
    BreakSequence up2 = base_change_up_tower(gs, 2);
    for (std::size_t k = 0; k < up2.size(); ++k) {
        Rational expected = Rational(9) * geo[k + 2] - Rational(9) * geo[1] + lam.values[1];
        CHECK(up2.breaks()[k] == expected);
    }
}

TEST_CASE("base change along a disjoint degree-p extension") {
    BreakSequence s = seq({2, 7, 22});
    BreakSequence bc = base_change_disjoint_p(s, Rational(5));
    CHECK(bc.breaks() == rats({2, 11, 56}));

    BreakSequence same = base_change_disjoint_p(s, Rational(100));
    CHECK(same.breaks() == s.breaks());

    BreakSequence low = base_change_disjoint_p(s, Rational(1));
    CHECK(low.breaks() == rats({4, 19, 64}));  // 3 s_n - 2
}

TEST_CASE("genus polynomial fitting") {
    TowerRamificationData data{Rational(0), 3, {{"x", seq({1, 4, 13, 40, 121})}}};
    GenusTable g = genus_sequence(data, 4);
    auto fit = fit_genus_polynomials(g, 3, 1, 1, Rational(1));
    REQUIRE(fit.has_value());
    REQUIRE(fit->coeffs.size() == 1);
    const auto& a = fit->coeffs[0];
    REQUIRE(a.size() == 3);
    CHECK(a[0] == Rational(9, 16));
    CHECK(a[1] == Rational(-3, 4));
    CHECK(a[2] == Rational(3, 16));
    CHECK(fit->onset == 0);

    GenusTable constant;
    for (int n = 0; n <= 4; ++n) constant.push_back({n, Rational(7), true});
    auto cfit = fit_genus_polynomials(constant, 3, 1, 1, Rational(1));
    REQUIRE(cfit.has_value());
    CHECK(cfit->coeffs[0][0] == 7);
    CHECK(cfit->coeffs[0][1] == 0);
    CHECK(cfit->coeffs[0][2] == 0);

    GenusTable linear;
    for (int n = 0; n <= 3; ++n) linear.push_back({n, Rational(n), true});
    CHECK(!fit_genus_polynomials(linear, 3, 1, 1, Rational(1)).has_value());
}

TEST_CASE("genus integrality tracks geometric validity") {
    // arbitrary non-geometric break data can give fractional genus values
    TowerRamificationData odd{
        Rational(0), 3,
        {{"x", BreakSequence(3, 2, {Rational(1, 2), Rational(7, 2), Rational(23, 2)})}}};
    GenusTable g = genus_sequence(odd, 3);
    bool any_fractional = false;
    for (const auto& row : g) any_fractional |= !row.integral;
    CHECK(any_fractional);
}
