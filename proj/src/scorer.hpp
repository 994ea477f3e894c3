#pragma once

#include "rng.hpp"
#include "types.hpp"

#include <cmath>

namespace tfms {

inline double ecpm(double pctr, Money bid) { return pctr * bid * 1000.0; }

// Deterministic synthetic stand-in for the production prediction models.
// All three score families hang off one seed but use distinct salts, so
// crowd_score and ad_score are deliberately decorrelated from pctr: the
// rule scores must be able to rank a high-value pair poorly, otherwise
// truncation loss could never be exhibited.
class Scorer {
public:
    explicit Scorer(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Pure function of (seed, user, ad), squashed into [0.001, 0.1].
    double pctr(UserId user, AdId ad) const {
        double t = to_unit(mix64(seed_ ^ kPctrSalt, user, ad));
        double z = 1.0 / (1.0 + std::exp(-12.0 * (t - 0.5)));
        return 0.001 + 0.099 * z;
    }

    double value_measure(UserId user, const AdCrowdPair& pair, Money bid) const {
        return ecpm(pctr(user, pair.ad), bid);
    }

    // Rule score for the user->crowd truncation stage. The default is a
    // per-crowd quality draw that ignores the user entirely, mirroring a
    // crowd-side statistic with no knowledge of the ads behind the crowd.
    double crowd_score(UserId /*user*/, CrowdId crowd) const {
        return to_unit(mix64(seed_ ^ kCrowdSalt, crowd));
    }

    // Rule score for the crowd->ad truncation stage (7-day-CTR stand-in).
    double ad_score(AdId ad) const {
        return to_unit(mix64(seed_ ^ kAdSalt, ad));
    }

private:
    static constexpr std::uint64_t kPctrSalt = 0x7c7d3a5b1fc94e21ULL;
    static constexpr std::uint64_t kCrowdSalt = 0x1b4f0e9851971998ULL;
    static constexpr std::uint64_t kAdSalt = 0xd2c5f6a8b3e19c04ULL;

    std::uint64_t seed_;
};

}  // namespace tfms
