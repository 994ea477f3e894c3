#include "workload.hpp"

#include "rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace tfms {

namespace {

using json = nlohmann::ordered_json;

double round_cents(double v) { return std::round(v * 100.0) / 100.0; }

// Crowd channel is a property of the crowd itself, fixed for the world.
TargetingType crowd_type(std::uint64_t seed, CrowdId crowd) {
    double u = to_unit(mix64(seed ^ 0x5bd1e995u, crowd));
    if (u < 0.35) return TargetingType::Retargeting;
    if (u < 0.75) return TargetingType::Keywords;
    return TargetingType::Demographic;
}

// Generator-side world state, kept so every emitted event is applicable.
struct WorldState {
    struct CampaignState {
        Campaign campaign;
    };
    std::map<CampaignId, CampaignState> campaigns;
    std::map<UserId, std::set<CrowdId>> memberships;
    std::vector<CampaignId> cancelable;  // not yet canceled
    AdId next_ad;
    CampaignId next_campaign;
};

std::size_t bounded_zipf_count(Rng& rng, const ZipfSampler& sampler, std::size_t lo) {
    return lo + sampler.sample(rng);
}

std::vector<CrowdId> sample_crowds(Rng& rng, const ZipfSampler& popularity, std::size_t want,
                                   const std::set<CrowdId>& exclude) {
    std::set<CrowdId> picked;
    std::size_t attempts = 0;
    const std::size_t max_attempts = want * 30 + 64;
    while (picked.size() < want && attempts < max_attempts) {
        ++attempts;
        CrowdId crowd = kCrowdIdBase + popularity.sample(rng);
        if (exclude.count(crowd)) continue;
        picked.insert(crowd);
    }
    // fill from the head of the popularity order if the draw kept colliding
    for (std::size_t rank = 0; picked.size() < want && rank < popularity.size(); ++rank) {
        CrowdId crowd = kCrowdIdBase + rank;
        if (!exclude.count(crowd)) picked.insert(crowd);
    }
    return {picked.begin(), picked.end()};
}

Campaign make_campaign(Rng& rng, const WorkloadSpec& spec, const ZipfSampler& popularity,
                       const ZipfSampler& targeting_count, WorldState& world) {
    Campaign c;
    c.id = world.next_campaign++;
    c.ad = world.next_ad++;
    c.status = CampaignStatus::Active;
    c.budget_remaining = round_cents(50.0 + rng.next_unit() * 450.0);
    std::size_t want = std::min(spec.targetings_per_campaign_max,
                                bounded_zipf_count(rng, targeting_count,
                                                   spec.targetings_per_campaign_min));
    for (CrowdId crowd : sample_crowds(rng, popularity, want, {})) {
        Targeting t;
        t.crowd = crowd;
        t.type = crowd_type(spec.seed, crowd);
        t.bid = std::max(0.01, round_cents(0.10 * std::pow(10.0, 2.0 * rng.next_unit())));
        c.targetings.push_back(t);
    }
    return c;
}

}  // namespace

void WorkloadSpec::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::BadSpec, "workload spec: " + msg); };
    if (users == 0) fail("users must be positive");
    if (crowds == 0 && (campaigns > 0 || users > 0)) fail("zero crowds cannot support targetings or memberships");
    if (campaigns == 0) fail("campaigns must be positive");
    if (horizon_days == 0) fail("horizon_days must be positive");
    if (mean_visits_per_user_per_day < 1.0) fail("mean_visits_per_user_per_day must be >= 1");
    if (crowds_per_user_min == 0) fail("crowds_per_user_min must be >= 1");
    if (crowds_per_user_min > crowds_per_user_max) fail("crowds_per_user_min > max");
    if (crowds_per_user_max > crowds) fail("crowds_per_user_max exceeds crowd count");
    if (targetings_per_campaign_min == 0) fail("targetings_per_campaign_min must be >= 1");
    if (targetings_per_campaign_min > targetings_per_campaign_max) fail("targetings_per_campaign_min > max");
    if (targetings_per_campaign_max > crowds) fail("targetings_per_campaign_max exceeds crowd count");
    if (zipf_crowd_popularity < 0 || zipf_crowds_per_user < 0 || zipf_targetings_per_campaign < 0 ||
        zipf_visits_per_user < 0)
        fail("zipf exponents must be non-negative");
}

Workload generate(const WorkloadSpec& spec) {
    spec.validate();
    Rng rng(mix64(spec.seed, 0x776f726bULL));  // dedicated generator stream

    WorldState world;
    world.next_ad = kAdIdBase;
    world.next_campaign = kCampaignIdBase;

    ZipfSampler crowd_popularity(spec.crowds, spec.zipf_crowd_popularity);
    ZipfSampler membership_count(spec.crowds_per_user_max - spec.crowds_per_user_min + 1,
                                 spec.zipf_crowds_per_user);
    ZipfSampler targeting_count(spec.targetings_per_campaign_max - spec.targetings_per_campaign_min + 1,
                                spec.zipf_targetings_per_campaign);
    ZipfSampler visit_assignment(spec.users, spec.zipf_visits_per_user);

    std::vector<MutationEvent> mutations;
    std::vector<MutationEvent> visits;

    // --- t = 0 setup: campaigns, then crowd memberships ---
    for (std::size_t i = 0; i < spec.campaigns; ++i) {
        Campaign c = make_campaign(rng, spec, crowd_popularity, targeting_count, world);
        world.cancelable.push_back(c.id);
        world.campaigns[c.id].campaign = c;
        mutations.push_back(MutationEvent{0, 0, CampaignUpserted{std::move(c)}});
    }
    for (std::size_t i = 0; i < spec.users; ++i) {
        UserId user = kUserIdBase + i;
        std::size_t want = std::min(spec.crowds_per_user_max,
                                    bounded_zipf_count(rng, membership_count, spec.crowds_per_user_min));
        UserCrowdsChanged body;
        body.user = user;
        for (CrowdId crowd : sample_crowds(rng, crowd_popularity, want, {})) {
            body.added.emplace_back(crowd, crowd_type(spec.seed, crowd));
            world.memberships[user].insert(crowd);
        }
        mutations.push_back(MutationEvent{0, 0, std::move(body)});
    }

    // --- per-day advertiser/user activity and traffic ---
    auto pick_campaign = [&](auto pred) -> Campaign* {
        if (world.cancelable.empty()) return nullptr;
        for (int tries = 0; tries < 64; ++tries) {
            CampaignId id = world.cancelable[rng.next_below(world.cancelable.size())];
            auto& st = world.campaigns.at(id);
            if (pred(st.campaign)) return &st.campaign;
        }
        return nullptr;
    };

    enum class Slot : std::uint8_t {
        NewCampaign, BidUp, BidDown, Join, Leave, Pause, Resume, Cancel, BudgetZero, BudgetRefill
    };

    for (std::uint32_t day = 0; day < spec.horizon_days; ++day) {
        const TimePoint day_start = static_cast<TimePoint>(day) * kMillisPerDay;

        // mutation slots get a shuffled kind deck over sorted timestamps, so
        // emission order always agrees with replay order; a follow-up event
        // can never land before the campaign it references
        std::vector<Slot> deck;
        auto deal = [&](Slot slot, std::uint32_t count) {
            for (std::uint32_t i = 0; i < count; ++i) deck.push_back(slot);
        };
        deal(Slot::NewCampaign, spec.new_campaigns_per_day);
        deal(Slot::BidUp, spec.bid_increases_per_day);
        deal(Slot::BidDown, spec.bid_decreases_per_day);
        deal(Slot::Join, spec.crowd_joins_per_day);
        deal(Slot::Leave, spec.crowd_leaves_per_day);
        deal(Slot::Pause, spec.pauses_per_day);
        deal(Slot::Resume, spec.resumes_per_day);
        deal(Slot::Cancel, spec.cancels_per_day);
        deal(Slot::BudgetZero, spec.budget_zero_per_day);
        deal(Slot::BudgetRefill, spec.budget_refill_per_day);
        for (std::size_t i = deck.size(); i > 1; --i)
            std::swap(deck[i - 1], deck[rng.next_below(i)]);
        std::vector<TimePoint> slot_times(deck.size());
        for (auto& t : slot_times)
            t = day_start + 1 + static_cast<TimePoint>(rng.next_below(kMillisPerDay - 1));
        std::sort(slot_times.begin(), slot_times.end());

        auto bid_change = [&](TimePoint at, bool increase) {
            Campaign* c = pick_campaign([](const Campaign& campaign) {
                return campaign.status != CampaignStatus::Canceled && !campaign.targetings.empty();
            });
            if (!c) return;
            auto& t = c->targetings[rng.next_below(c->targetings.size())];
            double factor = increase ? 1.05 + 0.45 * rng.next_unit() : 0.50 + 0.45 * rng.next_unit();
            double next = round_cents(t.bid * factor);
            if (increase)
                next = std::max(next, round_cents(t.bid + 0.01));
            else
                next = std::max(0.01, std::min(next, round_cents(t.bid - 0.01)));
            if (next == t.bid) return;
            t.bid = next;
            mutations.push_back(MutationEvent{0, at, BidChanged{c->id, t.crowd, next}});
        };

        for (std::size_t slot = 0; slot < deck.size(); ++slot) {
            const TimePoint at = slot_times[slot];
            switch (deck[slot]) {
                case Slot::NewCampaign: {
                    Campaign c = make_campaign(rng, spec, crowd_popularity, targeting_count, world);
                    world.cancelable.push_back(c.id);
                    world.campaigns[c.id].campaign = c;
                    mutations.push_back(MutationEvent{0, at, CampaignUpserted{std::move(c)}});
                    break;
                }
                case Slot::BidUp: bid_change(at, true); break;
                case Slot::BidDown: bid_change(at, false); break;
                case Slot::Join: {
                    UserId user = kUserIdBase + rng.next_below(spec.users);
                    auto& member = world.memberships[user];
                    auto joined = sample_crowds(rng, crowd_popularity, 1 + rng.next_below(3),
                                                std::set<CrowdId>(member.begin(), member.end()));
                    if (joined.empty()) break;
                    UserCrowdsChanged body;
                    body.user = user;
                    for (CrowdId crowd : joined) {
                        body.added.emplace_back(crowd, crowd_type(spec.seed, crowd));
                        member.insert(crowd);
                    }
                    mutations.push_back(MutationEvent{0, at, std::move(body)});
                    break;
                }
                case Slot::Leave: {
                    UserId user = kUserIdBase + rng.next_below(spec.users);
                    auto& member = world.memberships[user];
                    if (member.empty()) break;
                    auto it = member.begin();
                    std::advance(it, static_cast<long>(rng.next_below(member.size())));
                    UserCrowdsChanged body;
                    body.user = user;
                    body.removed.push_back(*it);
                    member.erase(it);
                    mutations.push_back(MutationEvent{0, at, std::move(body)});
                    break;
                }
                case Slot::Pause: {
                    Campaign* c = pick_campaign(
                        [](const Campaign& campaign) { return campaign.status == CampaignStatus::Active; });
                    if (!c) break;
                    c->status = CampaignStatus::Paused;
                    mutations.push_back(
                        MutationEvent{0, at, CampaignStatusChanged{c->id, CampaignStatus::Paused}});
                    break;
                }
                case Slot::Resume: {
                    Campaign* c = pick_campaign(
                        [](const Campaign& campaign) { return campaign.status == CampaignStatus::Paused; });
                    if (!c) break;
                    c->status = CampaignStatus::Active;
                    mutations.push_back(
                        MutationEvent{0, at, CampaignStatusChanged{c->id, CampaignStatus::Active}});
                    break;
                }
                case Slot::Cancel: {
                    Campaign* c = pick_campaign(
                        [](const Campaign& campaign) { return campaign.status != CampaignStatus::Canceled; });
                    if (!c) break;
                    c->status = CampaignStatus::Canceled;
                    std::erase(world.cancelable, c->id);
                    mutations.push_back(
                        MutationEvent{0, at, CampaignStatusChanged{c->id, CampaignStatus::Canceled}});
                    break;
                }
                case Slot::BudgetZero: {
                    Campaign* c = pick_campaign([](const Campaign& campaign) {
                        return campaign.status != CampaignStatus::Canceled &&
                               campaign.budget_remaining > 0.0;
                    });
                    if (!c) break;
                    c->budget_remaining = 0.0;
                    mutations.push_back(MutationEvent{0, at, BudgetChanged{c->id, 0.0}});
                    break;
                }
                case Slot::BudgetRefill: {
                    Campaign* c = pick_campaign([](const Campaign& campaign) {
                        return campaign.status != CampaignStatus::Canceled &&
                               campaign.budget_remaining == 0.0;
                    });
                    if (!c) break;
                    c->budget_remaining = round_cents(50.0 + rng.next_unit() * 450.0);
                    mutations.push_back(
                        MutationEvent{0, at, BudgetChanged{c->id, c->budget_remaining}});
                    break;
                }
            }
        }

        // traffic: one guaranteed visit per user per day keeps the measured
        // visits-per-active-user exactly at the configured mean; the rest of
        // the volume lands long-tail
        auto visit_time = [&] {
            return day_start + 1 + static_cast<TimePoint>(rng.next_below(kMillisPerDay - 1));
        };
        const std::uint64_t total =
            static_cast<std::uint64_t>(std::llround(spec.mean_visits_per_user_per_day *
                                                    static_cast<double>(spec.users)));
        for (std::size_t i = 0; i < spec.users; ++i)
            visits.push_back(MutationEvent{0, visit_time(), Visit{kUserIdBase + i}});
        for (std::uint64_t i = spec.users; i < total; ++i) {
            UserId user = kUserIdBase + visit_assignment.sample(rng);
            visits.push_back(MutationEvent{0, visit_time(), Visit{user}});
        }
    }

    // global order: (at, construction order), then one seq stream over both logs
    std::vector<MutationEvent*> all;
    all.reserve(mutations.size() + visits.size());
    for (auto& e : mutations) all.push_back(&e);
    for (auto& e : visits) all.push_back(&e);
    std::stable_sort(all.begin(), all.end(),
                     [](const MutationEvent* a, const MutationEvent* b) { return a->at < b->at; });
    std::uint64_t seq = 0;
    for (auto* e : all) e->seq = seq++;

    auto by_seq = [](const MutationEvent& a, const MutationEvent& b) { return a.seq < b.seq; };
    std::sort(mutations.begin(), mutations.end(), by_seq);
    std::sort(visits.begin(), visits.end(), by_seq);
    return Workload{std::move(mutations), std::move(visits)};
}

namespace {

template <typename T>
void take(json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    out = it->get<T>();
    j.erase(it);
}

void parse_fields(json& j, WorkloadSpec& s) {
    take(j, "seed", s.seed);
    take(j, "users", s.users);
    take(j, "crowds", s.crowds);
    take(j, "campaigns", s.campaigns);
    take(j, "horizon_days", s.horizon_days);
    take(j, "mean_visits_per_user_per_day", s.mean_visits_per_user_per_day);
    take(j, "zipf_crowd_popularity", s.zipf_crowd_popularity);
    take(j, "zipf_crowds_per_user", s.zipf_crowds_per_user);
    take(j, "zipf_targetings_per_campaign", s.zipf_targetings_per_campaign);
    take(j, "zipf_visits_per_user", s.zipf_visits_per_user);
    take(j, "crowds_per_user_min", s.crowds_per_user_min);
    take(j, "crowds_per_user_max", s.crowds_per_user_max);
    take(j, "targetings_per_campaign_min", s.targetings_per_campaign_min);
    take(j, "targetings_per_campaign_max", s.targetings_per_campaign_max);
    take(j, "new_campaigns_per_day", s.new_campaigns_per_day);
    take(j, "bid_increases_per_day", s.bid_increases_per_day);
    take(j, "bid_decreases_per_day", s.bid_decreases_per_day);
    take(j, "crowd_joins_per_day", s.crowd_joins_per_day);
    take(j, "crowd_leaves_per_day", s.crowd_leaves_per_day);
    take(j, "cancels_per_day", s.cancels_per_day);
    take(j, "pauses_per_day", s.pauses_per_day);
    take(j, "resumes_per_day", s.resumes_per_day);
    take(j, "budget_zero_per_day", s.budget_zero_per_day);
    take(j, "budget_refill_per_day", s.budget_refill_per_day);
}

}  // namespace

WorkloadSpec WorkloadSpec::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadSpec, std::string("workload spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::BadSpec, "workload spec must be a JSON object");

    WorkloadSpec s;
    try {
        parse_fields(j, s);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadSpec, std::string("workload spec: ") + e.what());
    }
    if (!j.empty())
        throw Error(ErrorCode::BadSpec, "workload spec: unknown key '" + j.begin().key() + "'");
    s.validate();
    return s;
}

WorkloadSpec WorkloadSpec::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open workload spec: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string WorkloadSpec::to_json_text() const {
    json j;
    j["seed"] = seed;
    j["users"] = users;
    j["crowds"] = crowds;
    j["campaigns"] = campaigns;
    j["horizon_days"] = horizon_days;
    j["mean_visits_per_user_per_day"] = mean_visits_per_user_per_day;
    j["zipf_crowd_popularity"] = zipf_crowd_popularity;
    j["zipf_crowds_per_user"] = zipf_crowds_per_user;
    j["zipf_targetings_per_campaign"] = zipf_targetings_per_campaign;
    j["zipf_visits_per_user"] = zipf_visits_per_user;
    j["crowds_per_user_min"] = crowds_per_user_min;
    j["crowds_per_user_max"] = crowds_per_user_max;
    j["targetings_per_campaign_min"] = targetings_per_campaign_min;
    j["targetings_per_campaign_max"] = targetings_per_campaign_max;
    j["new_campaigns_per_day"] = new_campaigns_per_day;
    j["bid_increases_per_day"] = bid_increases_per_day;
    j["bid_decreases_per_day"] = bid_decreases_per_day;
    j["crowd_joins_per_day"] = crowd_joins_per_day;
    j["crowd_leaves_per_day"] = crowd_leaves_per_day;
    j["cancels_per_day"] = cancels_per_day;
    j["pauses_per_day"] = pauses_per_day;
    j["resumes_per_day"] = resumes_per_day;
    j["budget_zero_per_day"] = budget_zero_per_day;
    j["budget_refill_per_day"] = budget_refill_per_day;
    return j.dump(2);
}

}  // namespace tfms
