#pragma once

#include "types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace tfms {

// Mutation bodies. Events are totally ordered by (at, seq); replaying the
// same log from an empty index reproduces the index byte for byte.

struct UserCrowdsChanged {
    UserId user = 0;
    std::vector<std::pair<CrowdId, TargetingType>> added;
    std::vector<CrowdId> removed;
};

struct CampaignUpserted {
    Campaign campaign;
};

struct CampaignStatusChanged {
    CampaignId campaign = 0;
    CampaignStatus status = CampaignStatus::Active;
};

struct BidChanged {
    CampaignId campaign = 0;
    CrowdId crowd = 0;
    Money bid = 0.0;
};

struct BudgetChanged {
    CampaignId campaign = 0;
    Money remaining = 0.0;
};

// Traffic record; lives in the same line format so the harness can merge
// mutation and traffic streams by (at, seq).
struct Visit {
    UserId user = 0;
};

using EventBody = std::variant<UserCrowdsChanged, CampaignUpserted, CampaignStatusChanged,
                               BidChanged, BudgetChanged, Visit>;

struct MutationEvent {
    std::uint64_t seq = 0;
    TimePoint at = 0;
    EventBody body;

    bool is_visit() const { return std::holds_alternative<Visit>(body); }
};

std::string event_to_json_line(const MutationEvent& event);
MutationEvent event_from_json_line(const std::string& line);

void write_event_log(const std::string& path, const std::vector<MutationEvent>& events);
std::vector<MutationEvent> read_event_log(const std::string& path);

}  // namespace tfms
