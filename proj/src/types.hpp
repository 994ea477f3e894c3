#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfms {

using UserId = std::uint64_t;
using CrowdId = std::uint64_t;
using AdId = std::uint64_t;
using CampaignId = std::uint64_t;

// Simulated clock, milliseconds from the start of the run.
using TimePoint = std::int64_t;
using Duration = std::int64_t;

constexpr Duration kMillisPerMinute = 60'000;
constexpr Duration kMillisPerDay = 86'400'000;

using Money = double;  // currency units; eCPM scores are money per mille

enum class TargetingType : std::uint8_t {
    Retargeting = 0,
    Keywords = 1,
    Demographic = 2,
};
constexpr int kTargetingTypeCount = 3;

enum class CampaignStatus : std::uint8_t {
    Active = 0,
    Paused = 1,
    Canceled = 2,
};

const char* to_string(TargetingType t);
const char* to_string(CampaignStatus s);
TargetingType targeting_type_from_string(const std::string& s);
CampaignStatus campaign_status_from_string(const std::string& s);

enum class ErrorCode : int {
    InvalidArgument = -1,
    Io = -2,
    Corrupt = -3,
    BadEvent = -4,
    BadSpec = -5,
    Mismatch = -6,
    Internal = -99,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// The atomic matchable unit. An ad targeting two crowds yields two pairs,
// each with its own bid.
struct AdCrowdPair {
    AdId ad = 0;
    CrowdId crowd = 0;

    friend bool operator==(const AdCrowdPair&, const AdCrowdPair&) = default;
    friend auto operator<=>(const AdCrowdPair&, const AdCrowdPair&) = default;
};

struct ValuedPair {
    AdCrowdPair pair;
    double score = 0.0;  // eCPM units
    TimePoint scored_at = 0;

    friend bool operator==(const ValuedPair&, const ValuedPair&) = default;
};

// Global tie-break: score desc, then AdId asc, then CrowdId asc.
inline bool valued_pair_less(const ValuedPair& a, const ValuedPair& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pair < b.pair;
}

struct Targeting {
    CrowdId crowd = 0;
    TargetingType type = TargetingType::Retargeting;
    Money bid = 0.0;  // per click, > 0

    friend bool operator==(const Targeting&, const Targeting&) = default;
};

struct Campaign {
    CampaignId id = 0;
    AdId ad = 0;
    CampaignStatus status = CampaignStatus::Active;
    Money budget_remaining = 0.0;
    std::vector<Targeting> targetings;  // at most one entry per crowd

    const Targeting* find_targeting(CrowdId crowd) const {
        for (const auto& t : targetings)
            if (t.crowd == crowd) return &t;
        return nullptr;
    }

    friend bool operator==(const Campaign&, const Campaign&) = default;
};

// Serving-time validity. Canceled/paused campaigns, exhausted budgets and
// removed targetings all invalidate a cached pair without touching the cache.
bool is_valid(const Campaign& campaign, const AdCrowdPair& pair, TimePoint at);

}  // namespace tfms
