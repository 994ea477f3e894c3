#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"

using namespace tfms;
using namespace tfms::test;

namespace {

constexpr TruncationConfig unbounded(std::size_t n) {
    return TruncationConfig{TruncationConfig::kUnbounded, TruncationConfig::kUnbounded, n};
}

}  // namespace

TEST_CASE("unbounded m,k degenerates to the optimal matcher") {
    RandomWorld world = build_random_world(41, 300, 30, 80);
    Scorer scorer(42);
    for (UserId user : world.users) {
        CostMeter m1, m2;
        auto truncated = match_truncated(user, world.index, scorer, unbounded(25), m1, 5);
        auto optimal = match_optimal(user, world.index, scorer, 25, m2, 5);
        REQUIRE(truncated.size() == optimal.size());
        CHECK(same_pairs_and_scores(truncated, optimal));
        CHECK(m1.user_ad_pairs_scored == m2.user_ad_pairs_scored);
    }
}

TEST_CASE("user with no crowds matches nothing") {
    TargetingIndex index;
    index.apply(upsert_event(0, 0, make_campaign(1, 100, {{5, 1.0}})));
    Scorer scorer(1);
    CostMeter meter;
    CHECK(match_truncated(7, index, scorer, TruncationConfig{}, meter, 0).empty());
    CHECK(match_optimal(7, index, scorer, 10, meter, 0).empty());
    CHECK(meter.user_crowd_pairs_examined == 0);
    CHECK(meter.user_ad_pairs_scored == 0);
}

TEST_CASE("match_optimal returns all of O(u) sorted when |O(u)| <= n") {
    RandomWorld world = build_random_world(43, 40, 15, 25);
    Scorer scorer(42);
    for (UserId user : world.users) {
        CostMeter meter;
        std::size_t candidate_count = world.index.candidates(user).size();
        auto got = match_optimal(user, world.index, scorer, candidate_count + 10, meter, 0);
        CHECK(got.size() == candidate_count);
        CHECK(std::is_sorted(got.begin(), got.end(), valued_pair_less));
        CHECK(meter.user_ad_pairs_scored == candidate_count);
    }
}

TEST_CASE("match_optimal agrees with an independent quadratic sort oracle on 500 users") {
    RandomWorld world = build_random_world(47, 500, 60, 150);
    Scorer scorer(4242);
    for (UserId user : world.users) {
        CostMeter meter;
        auto got = match_optimal(user, world.index, scorer, 20, meter, 3);
        auto expected = sort_oracle_top_n(user, world.oracle, scorer, 20, 3);
        REQUIRE(got.size() == expected.size());
        CHECK(same_pairs_and_scores(got, expected));
    }
}

TEST_CASE("meters are exact: optimal scores |O(u)|, truncated scores |O1(u)|") {
    RandomWorld world = build_random_world(53, 100, 25, 70);
    Scorer scorer(7);
    TruncationConfig tight{2, 3, 10};
    for (UserId user : world.users) {
        CostMeter opt_meter, trunc_meter;
        (void)match_optimal(user, world.index, scorer, 10, opt_meter, 0);
        CHECK(opt_meter.user_ad_pairs_scored == world.index.candidates(user).size());
        CHECK(opt_meter.user_crowd_pairs_examined == world.index.crowds_of(user).size());

        TruncationBreakdown breakdown;
        (void)match_truncated(user, world.index, scorer, tight, trunc_meter, 0, &breakdown);
        CHECK(trunc_meter.user_ad_pairs_scored == breakdown.ads_kept);
        CHECK(trunc_meter.user_ad_pairs_scored <= opt_meter.user_ad_pairs_scored);
        // per-channel m and per-crowd k bound the scored volume
        CHECK(trunc_meter.user_ad_pairs_scored <=
              static_cast<std::uint64_t>(tight.m) * kTargetingTypeCount * tight.k);
    }
}

TEST_CASE("dominance: optimal total value >= truncated total value") {
    RandomWorld world = build_random_world(59, 200, 40, 90);
    Scorer scorer(11);
    TruncationConfig tight{1, 2, 8};
    for (UserId user : world.users) {
        CostMeter m1, m2;
        auto truncated = match_truncated(user, world.index, scorer, tight, m1, 0);
        auto optimal = match_optimal(user, world.index, scorer, 8, m2, 0);
        double sum_truncated = 0, sum_optimal = 0;
        for (const auto& vp : truncated) sum_truncated += vp.score;
        for (const auto& vp : optimal) sum_optimal += vp.score;
        CHECK(sum_optimal >= sum_truncated);
    }
}

TEST_CASE("truncated output is always a subset of O(u)") {
    RandomWorld world = build_random_world(61, 80, 20, 50);
    Scorer scorer(13);
    TruncationConfig tight{2, 2, 12};
    for (UserId user : world.users) {
        std::set<AdCrowdPair> universe;
        for (const auto& [pair, bid] : world.index.candidates(user)) universe.insert(pair);
        CostMeter meter;
        for (const auto& vp : match_truncated(user, world.index, scorer, tight, meter, 0))
            CHECK(universe.count(vp.pair) == 1);
    }
}

// The adversarial construction the truncation-loss claims rest on: the
// globally best pair hides in a crowd the rule score ranks past m.
struct AdversarialInstance {
    TargetingIndex index;
    Scorer scorer{42};
    UserId user = 1;
    CrowdId hidden_crowd = 0;
    AdId hidden_ad = 0;
    std::size_t m = 3;  // keep the top-3 crowds per channel
};

static AdversarialInstance build_adversarial() {
    AdversarialInstance inst;
    // one channel, m+2 crowds; pick the crowd whose rule score is the lowest
    std::vector<CrowdId> crowds{900, 901, 902, 903, 904};
    CrowdId worst = crowds[0];
    for (CrowdId c : crowds)
        if (inst.scorer.crowd_score(inst.user, c) < inst.scorer.crowd_score(inst.user, worst))
            worst = c;
    inst.hidden_crowd = worst;

    std::vector<std::pair<CrowdId, TargetingType>> memberships;
    for (CrowdId c : crowds) memberships.emplace_back(c, TargetingType::Keywords);
    inst.index.apply(membership_event(0, 0, inst.user, memberships));

    // modest ads everywhere else, one huge-bid ad in the hidden crowd
    std::uint64_t seq = 1;
    CampaignId id = 1;
    AdId ad = 100;
    for (CrowdId c : crowds) {
        if (c == worst) continue;
        for (int i = 0; i < 3; ++i)
            inst.index.apply(upsert_event(seq++, 0, make_campaign(id++, ad++, {{c, 0.5}})));
    }
    inst.hidden_ad = ad;
    inst.index.apply(upsert_event(seq++, 0, make_campaign(id++, ad++, {{worst, 500.0}})));
    return inst;
}

TEST_CASE("adversarial instance: the best pair sits past the m-th crowd") {
    AdversarialInstance inst = build_adversarial();
    TruncationConfig config{inst.m, TruncationConfig::kUnbounded, 5};
    CostMeter m1, m2;
    auto truncated = match_truncated(inst.user, inst.index, inst.scorer, config, m1, 0);
    auto optimal = match_optimal(inst.user, inst.index, inst.scorer, 5, m2, 0);

    // the oracle's head is the hidden pair; the truncated list misses it
    REQUIRE(!optimal.empty());
    CHECK(optimal.front().pair == AdCrowdPair{inst.hidden_ad, inst.hidden_crowd});
    for (const auto& vp : truncated) CHECK(vp.pair.crowd != inst.hidden_crowd);

    double r_truncated = 0, r_optimal = 0;
    for (const auto& vp : truncated) r_truncated += vp.score;
    for (const auto& vp : optimal) r_optimal += vp.score;
    CHECK(r_truncated < r_optimal);  // strict truncation loss
}

TEST_CASE("rule-score rankings can disagree with value rankings") {
    // crowd_score knows nothing about the ads behind a crowd, so a low-rule
    // crowd can carry the top-value pair; ad_score likewise
    AdversarialInstance inst = build_adversarial();
    CostMeter meter;
    auto optimal = match_optimal(inst.user, inst.index, inst.scorer, 1, meter, 0);
    REQUIRE(optimal.size() == 1);
    double best_crowd_rule = inst.scorer.crowd_score(inst.user, optimal[0].pair.crowd);
    bool some_better_rule = false;
    for (const auto& [crowd, type] : inst.index.crowds_of(inst.user))
        if (inst.scorer.crowd_score(inst.user, crowd) > best_crowd_rule) some_better_rule = true;
    CHECK(some_better_rule);
}

TEST_CASE("stage-2 truncation: top-k by ad rule score can hide the top-value ad") {
    // one crowd, k+1 ads; give the huge-bid campaign to the ad with the
    // worst rule score so the k cutoff drops it
    const std::size_t k = 6;
    Scorer scorer(42);
    std::vector<AdId> ads;
    for (AdId a = 300; a < 300 + k + 1; ++a) ads.push_back(a);
    AdId worst = ads[0];
    for (AdId a : ads)
        if (scorer.ad_score(a) < scorer.ad_score(worst)) worst = a;

    TargetingIndex index;
    index.apply(membership_event(0, 0, 1, {{44, TargetingType::Keywords}}));
    std::uint64_t seq = 1;
    CampaignId id = 1;
    for (AdId a : ads)
        index.apply(upsert_event(seq++, 0, make_campaign(id++, a, {{44, a == worst ? 900.0 : 0.5}})));

    TruncationConfig config{TruncationConfig::kUnbounded, k, 3};
    CostMeter m1, m2;
    auto truncated = match_truncated(1, index, scorer, config, m1, 0);
    auto optimal = match_optimal(1, index, scorer, 3, m2, 0);

    REQUIRE(!optimal.empty());
    CHECK(optimal.front().pair.ad == worst);
    for (const auto& vp : truncated) CHECK(vp.pair.ad != worst);
    CHECK(m1.user_ad_pairs_scored == k);
    CHECK(m2.user_ad_pairs_scored == k + 1);
}

TEST_CASE("per-channel truncation keeps m crowds in each channel separately") {
    TargetingIndex index;
    std::vector<std::pair<CrowdId, TargetingType>> memberships;
    for (CrowdId c = 0; c < 6; ++c) memberships.emplace_back(100 + c, TargetingType::Retargeting);
    for (CrowdId c = 0; c < 6; ++c) memberships.emplace_back(200 + c, TargetingType::Demographic);
    index.apply(membership_event(0, 0, 1, memberships));
    std::uint64_t seq = 1;
    CampaignId id = 1;
    AdId ad = 1000;
    for (CrowdId c = 0; c < 6; ++c) {
        index.apply(upsert_event(seq++, 0, make_campaign(id++, ad++, {{100 + c, 1.0}})));
        index.apply(upsert_event(seq++, 0, make_campaign(id++, ad++, {{200 + c, 1.0}})));
    }

    Scorer scorer(5);
    TruncationConfig config{2, TruncationConfig::kUnbounded, 100};
    CostMeter meter;
    TruncationBreakdown breakdown;
    auto out = match_truncated(1, index, scorer, config, meter, 0, &breakdown);
    CHECK(breakdown.crowds_total == 12);
    CHECK(breakdown.crowds_kept == 4);  // 2 per populated channel
    std::set<CrowdId> kept;
    for (const auto& vp : out) kept.insert(vp.pair.crowd);
    int retargeting = 0, demographic = 0;
    for (CrowdId c : kept) (c < 200 ? retargeting : demographic)++;
    CHECK(retargeting == 2);
    CHECK(demographic == 2);
}

TEST_CASE("deterministic tie-break orders by score desc, ad asc, crowd asc") {
    std::vector<ValuedPair> pairs{
        {{5, 2}, 1.0, 0}, {{5, 1}, 1.0, 0}, {{3, 9}, 1.0, 0}, {{7, 1}, 2.0, 0}};
    take_top_n(pairs, 4);
    CHECK(pairs[0].pair == AdCrowdPair{7, 1});
    CHECK(pairs[1].pair == AdCrowdPair{3, 9});
    CHECK(pairs[2].pair == AdCrowdPair{5, 1});
    CHECK(pairs[3].pair == AdCrowdPair{5, 2});
}

TEST_CASE("matchers are deterministic across repeated runs") {
    RandomWorld world = build_random_world(67, 50, 20, 40);
    Scorer scorer(3);
    TruncationConfig config{2, 5, 10};
    for (UserId user : world.users) {
        CostMeter m1, m2;
        auto a = match_truncated(user, world.index, scorer, config, m1, 9);
        auto b = match_truncated(user, world.index, scorer, config, m2, 9);
        CHECK(a == b);
        CHECK(m1.user_ad_pairs_scored == m2.user_ad_pairs_scored);
    }
}
