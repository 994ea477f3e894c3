#include "tfms/tfms.h"

#include "engine.hpp"
#include "events.hpp"
#include "index.hpp"
#include "sim.hpp"
#include "workload.hpp"

#include "json.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

using json = nlohmann::ordered_json;

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

tfms_rc code_of(tfms::ErrorCode code) {
    switch (code) {
        case tfms::ErrorCode::InvalidArgument: return TFMS_ERR_INVALID_ARGUMENT;
        case tfms::ErrorCode::Io: return TFMS_ERR_IO;
        case tfms::ErrorCode::Corrupt: return TFMS_ERR_CORRUPT;
        case tfms::ErrorCode::BadEvent: return TFMS_ERR_BAD_EVENT;
        case tfms::ErrorCode::BadSpec: return TFMS_ERR_BAD_SPEC;
        case tfms::ErrorCode::Mismatch: return TFMS_ERR_MISMATCH;
        case tfms::ErrorCode::Internal: return TFMS_ERR_INTERNAL;
    }
    return TFMS_ERR_INTERNAL;
}

template <typename F>
tfms_rc guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const tfms::Error& e) {
        g_last_error = e.what();
        return code_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TFMS_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return TFMS_ERR_INTERNAL;
    }
}

tfms_rc invalid_arg(const char* msg) {
    g_last_error = msg;
    return TFMS_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct tfms_index_t {
    tfms::TargetingIndex index;
};

struct tfms_engine_t {
    tfms::Engine engine;
    explicit tfms_engine_t(std::uint64_t seed, tfms::Engine::Config config)
        : engine(seed, config) {}
};

extern "C" {

const char* tfms_version(void) { return "1.0.0"; }

const char* tfms_last_error(void) { return g_last_error.c_str(); }

void tfms_string_free(char* s) { std::free(s); }

tfms_rc tfms_index_create(tfms_index_t** out) {
    if (!out) return invalid_arg("tfms_index_create: out is NULL");
    return guarded([&] {
        *out = new tfms_index_t{};
        return TFMS_OK;
    });
}

void tfms_index_destroy(tfms_index_t* index) { delete index; }

tfms_rc tfms_index_apply_json(tfms_index_t* index, const char* event_json, uint64_t* version_out) {
    if (!index) return invalid_arg("tfms_index_apply_json: index is NULL");
    if (!event_json) return invalid_arg("tfms_index_apply_json: event_json is NULL");
    return guarded([&] {
        auto event = tfms::event_from_json_line(event_json);
        auto applied = index->index.apply(event);
        if (version_out) *version_out = applied.version;
        return TFMS_OK;
    });
}

tfms_rc tfms_index_stats_json(const tfms_index_t* index, char** json_out) {
    if (!index) return invalid_arg("tfms_index_stats_json: index is NULL");
    if (!json_out) return invalid_arg("tfms_index_stats_json: json_out is NULL");
    return guarded([&] {
        auto stats = index->index.stats();
        json j;
        j["version"] = stats.version;
        j["users"] = stats.users;
        j["crowds_with_ads"] = stats.crowds_with_ads;
        j["campaigns"] = stats.campaigns;
        j["membership_entries"] = stats.membership_entries;
        j["targeting_entries"] = stats.targeting_entries;
        *json_out = dup_string(j.dump());
        return TFMS_OK;
    });
}

tfms_rc tfms_index_candidate_count(const tfms_index_t* index, uint64_t user, uint64_t* count_out) {
    if (!index) return invalid_arg("tfms_index_candidate_count: index is NULL");
    if (!count_out) return invalid_arg("tfms_index_candidate_count: count_out is NULL");
    return guarded([&] {
        *count_out = index->index.candidates(user).size();
        return TFMS_OK;
    });
}

tfms_rc tfms_index_save(const tfms_index_t* index, const char* path) {
    if (!index) return invalid_arg("tfms_index_save: index is NULL");
    if (!path) return invalid_arg("tfms_index_save: path is NULL");
    return guarded([&] {
        index->index.save(path);
        return TFMS_OK;
    });
}

tfms_rc tfms_index_open(const char* path, tfms_index_t** out) {
    if (!path) return invalid_arg("tfms_index_open: path is NULL");
    if (!out) return invalid_arg("tfms_index_open: out is NULL");
    return guarded([&] {
        auto loaded = new tfms_index_t{};
        try {
            loaded->index = tfms::TargetingIndex::load(path);
        } catch (...) {
            delete loaded;
            throw;
        }
        *out = loaded;
        return TFMS_OK;
    });
}

tfms_rc tfms_engine_create(uint64_t seed, uint32_t top_n, int64_t window_minutes,
                           uint32_t parallelism, tfms_engine_t** out) {
    if (!out) return invalid_arg("tfms_engine_create: out is NULL");
    if (top_n == 0) return invalid_arg("tfms_engine_create: top_n must be >= 1");
    if (window_minutes < 0) return invalid_arg("tfms_engine_create: window_minutes must be >= 0");
    return guarded([&] {
        tfms::Engine::Config config;
        config.top_n = top_n;
        config.window_length = window_minutes * tfms::kMillisPerMinute;
        config.parallelism = parallelism == 0 ? 1 : parallelism;
        *out = new tfms_engine_t(seed, config);
        return TFMS_OK;
    });
}

void tfms_engine_destroy(tfms_engine_t* engine) { delete engine; }

tfms_rc tfms_engine_apply_json(tfms_engine_t* engine, const char* event_json) {
    if (!engine) return invalid_arg("tfms_engine_apply_json: engine is NULL");
    if (!event_json) return invalid_arg("tfms_engine_apply_json: event_json is NULL");
    return guarded([&] {
        engine->engine.apply_event(tfms::event_from_json_line(event_json));
        return TFMS_OK;
    });
}

tfms_rc tfms_engine_full_refresh(tfms_engine_t* engine, const uint64_t* users, size_t user_count,
                                 int64_t at_ms) {
    if (!engine) return invalid_arg("tfms_engine_full_refresh: engine is NULL");
    if (!users && user_count > 0) return invalid_arg("tfms_engine_full_refresh: users is NULL");
    return guarded([&] {
        std::set<tfms::UserId> active(users, users + user_count);
        engine->engine.full_refresh(active, at_ms);
        return TFMS_OK;
    });
}

tfms_rc tfms_engine_advance(tfms_engine_t* engine, int64_t now_ms) {
    if (!engine) return invalid_arg("tfms_engine_advance: engine is NULL");
    return guarded([&] {
        engine->engine.advance_to(now_ms);
        return TFMS_OK;
    });
}

tfms_rc tfms_engine_fetch_json(tfms_engine_t* engine, uint64_t user, int64_t at_ms,
                               char** result_json) {
    if (!engine) return invalid_arg("tfms_engine_fetch_json: engine is NULL");
    if (!result_json) return invalid_arg("tfms_engine_fetch_json: result_json is NULL");
    return guarded([&] {
        tfms::FetchResult fr = engine->engine.fetch_for(user, at_ms);
        json j;
        j["cache_miss"] = fr.cache_miss;
        j["staleness_ms"] = fr.staleness;
        j["dropped_invalid"] = fr.dropped_invalid;
        j["cached_length"] = fr.cached_length;
        json served = json::array();
        for (const auto& vp : fr.served)
            served.push_back({{"ad", vp.pair.ad}, {"crowd", vp.pair.crowd}, {"score", vp.score}});
        j["served"] = std::move(served);
        *result_json = dup_string(j.dump());
        return TFMS_OK;
    });
}

tfms_rc tfms_generate(const char* spec_json_path, const char* out_dir,
                      const char* spec_overrides_json, char** summary_json) {
    if (!spec_json_path) return invalid_arg("tfms_generate: spec_json_path is NULL");
    if (!out_dir) return invalid_arg("tfms_generate: out_dir is NULL");
    return guarded([&] {
        std::ifstream in(spec_json_path, std::ios::binary);
        if (!in) throw tfms::Error(tfms::ErrorCode::Io,
                                   std::string("cannot open workload spec: ") + spec_json_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

        if (spec_overrides_json && *spec_overrides_json) {
            json base, overrides;
            try {
                base = json::parse(text);
                overrides = json::parse(spec_overrides_json);
            } catch (const json::exception& e) {
                throw tfms::Error(tfms::ErrorCode::BadSpec,
                                  std::string("spec override merge failed: ") + e.what());
            }
            for (const auto& [key, value] : overrides.items()) base[key] = value;
            text = base.dump();
        }

        tfms::WorkloadSpec spec = tfms::WorkloadSpec::from_json_text(text);
        tfms::Workload workload = tfms::generate(spec);

        std::filesystem::create_directories(out_dir);
        const std::string events_path = std::string(out_dir) + "/events.jsonl";
        const std::string traffic_path = std::string(out_dir) + "/traffic.jsonl";
        tfms::write_event_log(events_path, workload.events);
        tfms::write_event_log(traffic_path, workload.traffic);

        if (summary_json) {
            json j;
            j["events"] = events_path;
            j["traffic"] = traffic_path;
            j["event_records"] = workload.events.size();
            j["traffic_records"] = workload.traffic.size();
            j["events_checksum"] = tfms::file_checksum(events_path);
            j["traffic_checksum"] = tfms::file_checksum(traffic_path);
            j["seed"] = spec.seed;
            *summary_json = dup_string(j.dump(2));
        }
        return TFMS_OK;
    });
}

tfms_rc tfms_simulate(const char* config_path, const char* overrides, char** report_json_out) {
    if (!config_path) return invalid_arg("tfms_simulate: config_path is NULL");
    return guarded([&] {
        tfms::RunConfig config = tfms::RunConfig::from_file(config_path);
        if (overrides && *overrides) config.apply_overrides(overrides);
        tfms::SimReport report = tfms::run_simulation(config);
        if (!config.out_dir.empty()) tfms::write_report_files(report, config.out_dir);
        if (report_json_out) *report_json_out = dup_string(tfms::report_to_json(report).dump(2));
        return TFMS_OK;
    });
}

tfms_rc tfms_compare(const char* report_path_a, const char* report_path_b, char** delta_json_out) {
    if (!report_path_a || !report_path_b)
        return invalid_arg("tfms_compare: report paths must not be NULL");
    if (!delta_json_out) return invalid_arg("tfms_compare: delta_json_out is NULL");
    return guarded([&] {
        auto load = [](const char* path) {
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw tfms::Error(tfms::ErrorCode::Io, std::string("cannot open report: ") + path);
            try {
                json j;
                in >> j;
                return j;
            } catch (const json::exception& e) {
                throw tfms::Error(tfms::ErrorCode::Corrupt,
                                  std::string(path) + " is not a report: " + e.what());
            }
        };
        json delta = tfms::compare_reports(load(report_path_a), load(report_path_b));
        *delta_json_out = dup_string(delta.dump(2));
        return TFMS_OK;
    });
}

}  // extern "C"
