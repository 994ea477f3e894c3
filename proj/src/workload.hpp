#pragma once

#include "events.hpp"
#include "types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tfms {

// Synthetic long-tail world. Identical spec + seed give byte-identical logs.
struct WorkloadSpec {
    std::uint64_t seed = 42;

    std::size_t users = 10'000;
    std::size_t crowds = 2'000;
    std::size_t campaigns = 4'000;
    std::uint32_t horizon_days = 2;

    double mean_visits_per_user_per_day = 8.2;

    // rank-weight exponents
    double zipf_crowd_popularity = 0.8;     // membership + targeting crowd choice
    double zipf_crowds_per_user = 1.1;      // membership count draw
    double zipf_targetings_per_campaign = 1.1;
    double zipf_visits_per_user = 0.7;      // extra-visit assignment

    std::size_t crowds_per_user_min = 3;
    std::size_t crowds_per_user_max = 120;
    std::size_t targetings_per_campaign_min = 1;
    std::size_t targetings_per_campaign_max = 80;

    // advertiser / user activity over the horizon (per simulated day)
    std::uint32_t new_campaigns_per_day = 40;
    std::uint32_t bid_increases_per_day = 200;
    std::uint32_t bid_decreases_per_day = 0;
    std::uint32_t crowd_joins_per_day = 120;
    std::uint32_t crowd_leaves_per_day = 0;
    std::uint32_t cancels_per_day = 0;
    std::uint32_t pauses_per_day = 0;
    std::uint32_t resumes_per_day = 0;
    std::uint32_t budget_zero_per_day = 0;
    std::uint32_t budget_refill_per_day = 0;

    void validate() const;  // throws Error(BadSpec)

    static WorkloadSpec from_json_text(const std::string& text);
    static WorkloadSpec from_json_file(const std::string& path);
    std::string to_json_text() const;
};

struct Workload {
    std::vector<MutationEvent> events;   // setup + advertiser/user mutations
    std::vector<MutationEvent> traffic;  // visit records
};

Workload generate(const WorkloadSpec& spec);

// id namespaces, offset so logs stay greppable
constexpr UserId kUserIdBase = 100'000;
constexpr CrowdId kCrowdIdBase = 200'000;
constexpr CampaignId kCampaignIdBase = 300'000;
constexpr AdId kAdIdBase = 400'000;

}  // namespace tfms
