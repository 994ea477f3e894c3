#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rng.hpp"
#include "scorer.hpp"
#include "types.hpp"

#include <cmath>
#include <vector>

using namespace tfms;

TEST_CASE("pctr is deterministic and repeatable") {
    Scorer scorer(42);
    for (UserId u = 1; u <= 50; ++u)
        for (AdId a = 1000; a < 1020; ++a) CHECK(scorer.pctr(u, a) == scorer.pctr(u, a));
}

TEST_CASE("pctr stays inside [0.001, 0.1] across 1e5 random id pairs") {
    Scorer scorer(42);
    Rng rng(7);
    for (int i = 0; i < 100'000; ++i) {
        double p = scorer.pctr(rng.next_u64(), rng.next_u64());
        CHECK(p >= 0.001);
        CHECK(p <= 0.1);
    }
}

TEST_CASE("two scorers with the same seed agree on a 100x100 grid") {
    Scorer a(1234), b(1234);
    for (UserId u = 0; u < 100; ++u)
        for (AdId ad = 0; ad < 100; ++ad) CHECK(a.pctr(u, ad) == b.pctr(u, ad));
}

TEST_CASE("scorers with different seeds actually differ") {
    Scorer a(1), b(2);
    int differing = 0;
    for (UserId u = 0; u < 50; ++u)
        for (AdId ad = 0; ad < 50; ++ad)
            if (a.pctr(u, ad) != b.pctr(u, ad)) ++differing;
    CHECK(differing > 2000);
}

TEST_CASE("ecpm arithmetic") {
    CHECK(ecpm(0.02, 1.5) == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(ecpm(0.5, 0.0) == 0.0);
}

TEST_CASE("value_measure is pctr x bid x 1000") {
    Scorer scorer(42);
    AdCrowdPair pair{77, 5};
    CHECK(scorer.value_measure(3, pair, 0.0) == 0.0);
    CHECK(scorer.value_measure(3, pair, 1.5) ==
          doctest::Approx(scorer.pctr(3, 77) * 1.5 * 1000.0).epsilon(1e-12));
}

TEST_CASE("value_measure is strictly monotone in bid") {
    Scorer scorer(9);
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        UserId u = rng.next_u64();
        AdCrowdPair pair{rng.next_u64(), rng.next_u64()};
        double lo = 0.01 + rng.next_unit();
        double hi = lo + 0.01 + rng.next_unit();
        CHECK(scorer.value_measure(u, pair, lo) < scorer.value_measure(u, pair, hi));
    }
}

TEST_CASE("scaling all bids by a constant keeps the argmax pair") {
    Scorer scorer(11);
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        UserId user = rng.next_u64();
        std::vector<std::pair<AdCrowdPair, Money>> pairs;
        for (int i = 0; i < 20; ++i)
            pairs.push_back({AdCrowdPair{rng.next_u64() % 1000, rng.next_u64() % 100},
                             0.01 + rng.next_unit() * 5.0});
        double scale = 0.5 + rng.next_unit() * 10.0;
        auto argmax = [&](double factor) {
            AdCrowdPair best{};
            double best_score = -1.0;
            for (const auto& [pair, bid] : pairs) {
                double s = scorer.value_measure(user, pair, bid * factor);
                if (s > best_score) {
                    best_score = s;
                    best = pair;
                }
            }
            return best;
        };
        CHECK(argmax(1.0) == argmax(scale));
    }
}

TEST_CASE("crowd_score ignores the user by default") {
    Scorer scorer(42);
    CHECK(scorer.crowd_score(1, 500) == scorer.crowd_score(2, 500));
    CHECK(scorer.crowd_score(1, 500) == scorer.crowd_score(1, 500));
}

TEST_CASE("ad_score is a fixed per-ad draw") {
    Scorer scorer(42);
    CHECK(scorer.ad_score(123) == scorer.ad_score(123));
    int differing = 0;
    for (AdId a = 0; a < 100; ++a)
        if (scorer.ad_score(a) != scorer.ad_score(a + 1)) ++differing;
    CHECK(differing > 90);
}

TEST_CASE("is_valid truth table") {
    Campaign c;
    c.id = 1;
    c.ad = 10;
    c.status = CampaignStatus::Active;
    c.budget_remaining = 10.0;
    c.targetings.push_back({5, TargetingType::Keywords, 1.0});

    AdCrowdPair pair{10, 5};
    CHECK(is_valid(c, pair, 0));

    SUBCASE("paused fails") {
        c.status = CampaignStatus::Paused;
        CHECK_FALSE(is_valid(c, pair, 0));
    }
    SUBCASE("canceled fails") {
        c.status = CampaignStatus::Canceled;
        CHECK_FALSE(is_valid(c, pair, 0));
    }
    SUBCASE("zero budget fails") {
        c.budget_remaining = 0.0;
        CHECK_FALSE(is_valid(c, pair, 0));
    }
    SUBCASE("crowd removed from targetings fails") {
        c.targetings.clear();
        CHECK_FALSE(is_valid(c, pair, 0));
    }
    SUBCASE("mismatched ad id is a contract violation") {
        AdCrowdPair wrong{11, 5};
        CHECK_THROWS_AS((void)is_valid(c, wrong, 0), Error);
    }
}

TEST_CASE("enum string round-trips") {
    for (int i = 0; i < kTargetingTypeCount; ++i) {
        auto t = static_cast<TargetingType>(i);
        CHECK(targeting_type_from_string(to_string(t)) == t);
    }
    for (auto s : {CampaignStatus::Active, CampaignStatus::Paused, CampaignStatus::Canceled})
        CHECK(campaign_status_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(targeting_type_from_string("automatic"), Error);
}
