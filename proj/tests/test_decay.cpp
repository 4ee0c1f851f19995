#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace unitroot;
using testutil::ctx311;

namespace {

DecayProfile profile_from_depths(const CtxPtr& ctx, const std::vector<long long>& depths) {
    std::vector<ProfileEntry> entries;
    for (std::size_t k = 0; k < depths.size(); ++k)
        entries.push_back({Rational(static_cast<long long>(k)), -depths[k]});
    return DecayProfile(ctx, entries);
}

}  // namespace

TEST_CASE("decay profile") {
    auto ctx = ctx311(3);
    LaurentSeries x = LaurentSeries::one(ctx) + LaurentSeries::monomial(ctx, -2, 3) +
                      LaurentSeries::monomial(ctx, -7, 9);
    DecayProfile prof = decay_profile(x, Rational(2));
    REQUIRE(prof.entries().size() == 3);
    CHECK(prof.entries()[0].w == 0);
    CHECK(prof.entries()[1].w == -2);
    CHECK(prof.entries()[2].w == -7);

    DecayProfile ones = decay_profile(LaurentSeries::one(ctx), Rational(2));
    for (const auto& en : ones.entries()) CHECK(en.w == 0);

    DecayProfile zeros = decay_profile(LaurentSeries::zero(ctx), Rational(2));
    for (const auto& en : zeros.entries()) CHECK(!en.w.has_value());

    CHECK_THROWS_AS(decay_profile(x, Rational(4)), ContractError);
}

TEST_CASE("classification of a linear profile") {
    auto ctx = ctx311(1);
    std::vector<long long> depths;
    for (int k = 0; k <= 10; ++k) depths.push_back(2 * k + 1);
    DecayClass dc = decay_classify(profile_from_depths(ctx, depths));
    REQUIRE(dc.kind == DecayClass::Kind::Overconvergent);
    CHECK(dc.m == 2);
    CHECK(dc.c == 1);
}

TEST_CASE("classification of an exact exponential profile") {
    auto ctx = ctx311(1);
    std::vector<long long> depths;
    long long v = 1;
    for (int k = 0; k <= 8; ++k) {
        depths.push_back(v);
        v *= 3;
    }
    DecayClass dc = decay_classify(profile_from_depths(ctx, depths));
    REQUIRE(dc.kind == DecayClass::Kind::LogDecay);
    CHECK(dc.r == 1);
    CHECK(dc.c == 1);
}

TEST_CASE("classification of a half-rate profile") {
    auto ctx = ctx311(1);
    std::vector<long long> depths;
    for (int k = 0; k <= 10; ++k)
        depths.push_back(static_cast<long long>(std::ceil(std::pow(3.0, k / 2.0))));
    DecayClass dc = decay_classify(profile_from_depths(ctx, depths));
    REQUIRE(dc.kind == DecayClass::Kind::LogDecay);
    CHECK(dc.r >= Rational(2, 5));
    CHECK(dc.r <= Rational(3, 5));
}

TEST_CASE("too few finite entries") {
    auto ctx = ctx311(1);
    std::vector<ProfileEntry> entries;
    for (int k = 0; k < 5; ++k) entries.push_back({Rational(k), std::nullopt});
    entries.push_back({Rational(5), -3});
    CHECK_THROWS_AS(decay_classify(DecayProfile(ctx, entries)), ContractError);
}

TEST_CASE("classification recovers synthesized laws", "[property]") {
    auto ctx = ctx311(1);
    SplitMix64 rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        bool linear = rng.below(2) == 0;
        std::vector<long long> depths;
        if (linear) {
            long long m = rng.range(1, 6);
            long long c = rng.range(0, 5);
            for (int k = 0; k <= 10; ++k) depths.push_back(m * k + c);
        } else {
            long long c = rng.range(1, 3);
            int r = static_cast<int>(rng.range(1, 2));
            for (int k = 0; k <= 8; ++k)
                depths.push_back(c * static_cast<long long>(std::pow(3.0, r * k)));
        }
        DecayClass dc = decay_classify(profile_from_depths(ctx, depths));
        if (linear)
            CHECK(dc.kind == DecayClass::Kind::Overconvergent);
        else
            CHECK(dc.kind == DecayClass::Kind::LogDecay);
        // the asserted bound must cover every profiled entry
        for (std::size_t k = 0; k < depths.size(); ++k) {
            bool covered;
            if (dc.kind == DecayClass::Kind::Overconvergent) {
                Rational bound = dc.m * Rational(static_cast<long long>(k)) + dc.c;
                covered = Rational(depths[k]) <= bound;
            } else {
                Rational bound =
                    dc.c * rational_pow(BigInt(3), static_cast<long long>(numerator(
                                                       dc.r * Rational(static_cast<long long>(k)))));
                covered = Rational(depths[k]) <= bound;
            }
            CHECK(covered);
        }
    }
}
