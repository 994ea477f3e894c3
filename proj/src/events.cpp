#include "events.hpp"

#include "json.hpp"

#include <fstream>

namespace tfms {

namespace {

using json = nlohmann::ordered_json;

json campaign_to_json(const Campaign& c) {
    json t = json::array();
    for (const auto& tg : c.targetings)
        t.push_back({tg.crowd, to_string(tg.type), tg.bid});
    return json{{"id", c.id},
                {"ad", c.ad},
                {"status", to_string(c.status)},
                {"budget", c.budget_remaining},
                {"targetings", std::move(t)}};
}

Campaign campaign_from_json(const json& j) {
    Campaign c;
    c.id = j.at("id").get<CampaignId>();
    c.ad = j.at("ad").get<AdId>();
    c.status = campaign_status_from_string(j.at("status").get<std::string>());
    c.budget_remaining = j.at("budget").get<Money>();
    for (const auto& tg : j.at("targetings")) {
        c.targetings.push_back(Targeting{tg.at(0).get<CrowdId>(),
                                         targeting_type_from_string(tg.at(1).get<std::string>()),
                                         tg.at(2).get<Money>()});
    }
    return c;
}

}  // namespace

std::string event_to_json_line(const MutationEvent& event) {
    json j;
    j["seq"] = event.seq;
    j["at"] = event.at;
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, UserCrowdsChanged>) {
                j["kind"] = "user_crowds_changed";
                json add = json::array();
                for (const auto& [crowd, type] : body.added)
                    add.push_back({crowd, to_string(type)});
                j["payload"] = {{"user", body.user}, {"add", std::move(add)}, {"remove", body.removed}};
            } else if constexpr (std::is_same_v<T, CampaignUpserted>) {
                j["kind"] = "campaign_upserted";
                j["payload"] = {{"campaign", campaign_to_json(body.campaign)}};
            } else if constexpr (std::is_same_v<T, CampaignStatusChanged>) {
                j["kind"] = "campaign_status_changed";
                j["payload"] = {{"campaign", body.campaign}, {"status", to_string(body.status)}};
            } else if constexpr (std::is_same_v<T, BidChanged>) {
                j["kind"] = "bid_changed";
                j["payload"] = {{"campaign", body.campaign}, {"crowd", body.crowd}, {"bid", body.bid}};
            } else if constexpr (std::is_same_v<T, BudgetChanged>) {
                j["kind"] = "budget_changed";
                j["payload"] = {{"campaign", body.campaign}, {"budget", body.remaining}};
            } else if constexpr (std::is_same_v<T, Visit>) {
                j["kind"] = "visit";
                j["payload"] = {{"user", body.user}};
            }
        },
        event.body);
    return j.dump();
}

MutationEvent event_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadEvent, std::string("malformed event line: ") + e.what());
    }
    try {
        MutationEvent ev;
        ev.seq = j.at("seq").get<std::uint64_t>();
        ev.at = j.at("at").get<TimePoint>();
        const std::string kind = j.at("kind").get<std::string>();
        const json& p = j.at("payload");
        if (kind == "user_crowds_changed") {
            UserCrowdsChanged b;
            b.user = p.at("user").get<UserId>();
            for (const auto& a : p.at("add"))
                b.added.emplace_back(a.at(0).get<CrowdId>(),
                                     targeting_type_from_string(a.at(1).get<std::string>()));
            b.removed = p.at("remove").get<std::vector<CrowdId>>();
            ev.body = std::move(b);
        } else if (kind == "campaign_upserted") {
            ev.body = CampaignUpserted{campaign_from_json(p.at("campaign"))};
        } else if (kind == "campaign_status_changed") {
            ev.body = CampaignStatusChanged{
                p.at("campaign").get<CampaignId>(),
                campaign_status_from_string(p.at("status").get<std::string>())};
        } else if (kind == "bid_changed") {
            ev.body = BidChanged{p.at("campaign").get<CampaignId>(), p.at("crowd").get<CrowdId>(),
                                 p.at("bid").get<Money>()};
        } else if (kind == "budget_changed") {
            ev.body = BudgetChanged{p.at("campaign").get<CampaignId>(), p.at("budget").get<Money>()};
        } else if (kind == "visit") {
            ev.body = Visit{p.at("user").get<UserId>()};
        } else {
            throw Error(ErrorCode::BadEvent, "unknown event kind: " + kind);
        }
        return ev;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadEvent, std::string("bad event payload: ") + e.what());
    }
}

void write_event_log(const std::string& path, const std::vector<MutationEvent>& events) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + path);
    for (const auto& ev : events)
        out << event_to_json_line(ev) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

std::vector<MutationEvent> read_event_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open: " + path);
    std::vector<MutationEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        events.push_back(event_from_json_line(line));
    }
    return events;
}

}  // namespace tfms
