#include "types.hpp"

namespace tfms {

const char* to_string(TargetingType t) {
    switch (t) {
        case TargetingType::Retargeting: return "retargeting";
        case TargetingType::Keywords: return "keywords";
        case TargetingType::Demographic: return "demographic";
    }
    return "?";
}

const char* to_string(CampaignStatus s) {
    switch (s) {
        case CampaignStatus::Active: return "active";
        case CampaignStatus::Paused: return "paused";
        case CampaignStatus::Canceled: return "canceled";
    }
    return "?";
}

TargetingType targeting_type_from_string(const std::string& s) {
    if (s == "retargeting") return TargetingType::Retargeting;
    if (s == "keywords") return TargetingType::Keywords;
    if (s == "demographic") return TargetingType::Demographic;
    throw Error(ErrorCode::BadEvent, "unknown targeting type: " + s);
}

CampaignStatus campaign_status_from_string(const std::string& s) {
    if (s == "active") return CampaignStatus::Active;
    if (s == "paused") return CampaignStatus::Paused;
    if (s == "canceled") return CampaignStatus::Canceled;
    throw Error(ErrorCode::BadEvent, "unknown campaign status: " + s);
}

bool is_valid(const Campaign& campaign, const AdCrowdPair& pair, TimePoint) {
    if (pair.ad != campaign.ad)
        throw Error(ErrorCode::InvalidArgument,
                    "is_valid: pair.ad " + std::to_string(pair.ad) +
                        " does not belong to campaign " + std::to_string(campaign.id));
    if (campaign.status != CampaignStatus::Active) return false;
    if (campaign.budget_remaining <= 0.0) return false;
    return campaign.find_targeting(pair.crowd) != nullptr;
}

}  // namespace tfms
