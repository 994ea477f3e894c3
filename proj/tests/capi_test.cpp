#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tfms/tfms.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

std::string temp_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::string upsert_line(std::uint64_t seq, long long at, std::uint64_t campaign,
                        std::uint64_t ad, std::uint64_t crowd, double bid) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  R"({"seq":%llu,"at":%lld,"kind":"campaign_upserted","payload":{"campaign":)"
                  R"({"id":%llu,"ad":%llu,"status":"active","budget":100.0,)"
                  R"("targetings":[[%llu,"keywords",%.2f]]}}})",
                  static_cast<unsigned long long>(seq), at,
                  static_cast<unsigned long long>(campaign), static_cast<unsigned long long>(ad),
                  static_cast<unsigned long long>(crowd), bid);
    return buf;
}

std::string membership_line(std::uint64_t seq, long long at, std::uint64_t user,
                            std::uint64_t crowd) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  R"({"seq":%llu,"at":%lld,"kind":"user_crowds_changed","payload":)"
                  R"({"user":%llu,"add":[[%llu,"keywords"]],"remove":[]}})",
                  static_cast<unsigned long long>(seq), at, static_cast<unsigned long long>(user),
                  static_cast<unsigned long long>(crowd));
    return buf;
}

}  // namespace

TEST_CASE("version and error surface") {
    CHECK(tfms_version() != nullptr);
    CHECK(std::string(tfms_last_error()).empty());
    CHECK(tfms_index_create(nullptr) == TFMS_ERR_INVALID_ARGUMENT);
    CHECK(std::string(tfms_last_error()).find("out is NULL") != std::string::npos);
}

TEST_CASE("index handle lifecycle, apply, stats, candidates") {
    tfms_index_t* index = nullptr;
    REQUIRE(tfms_index_create(&index) == TFMS_OK);

    uint64_t version = 0;
    CHECK(tfms_index_apply_json(index, membership_line(0, 0, 1, 10).c_str(), &version) == TFMS_OK);
    CHECK(version == 1);
    CHECK(tfms_index_apply_json(index, upsert_line(1, 0, 500, 900, 10, 1.5).c_str(), &version) ==
          TFMS_OK);
    CHECK(version == 2);

    // bad events are rejected with TFMS_ERR_BAD_EVENT and do not bump version
    CHECK(tfms_index_apply_json(index, "garbage", &version) == TFMS_ERR_BAD_EVENT);
    CHECK(tfms_index_apply_json(
              index, R"({"seq":9,"at":1,"kind":"bid_changed","payload":{"campaign":404,"crowd":1,"bid":2.0}})",
              &version) == TFMS_ERR_BAD_EVENT);
    CHECK(std::string(tfms_last_error()).find("404") != std::string::npos);

    uint64_t count = 0;
    CHECK(tfms_index_candidate_count(index, 1, &count) == TFMS_OK);
    CHECK(count == 1);
    CHECK(tfms_index_candidate_count(index, 42, &count) == TFMS_OK);
    CHECK(count == 0);

    char* stats = nullptr;
    CHECK(tfms_index_stats_json(index, &stats) == TFMS_OK);
    REQUIRE(stats != nullptr);
    CHECK(std::string(stats).find("\"version\":2") != std::string::npos);
    tfms_string_free(stats);

    tfms_index_destroy(index);
}

TEST_CASE("index snapshot round-trip and corruption through the C surface") {
    const std::string dir = temp_dir("tfms_capi_snap");
    const std::string path = dir + "/index.bin";

    tfms_index_t* index = nullptr;
    REQUIRE(tfms_index_create(&index) == TFMS_OK);
    CHECK(tfms_index_apply_json(index, membership_line(0, 0, 7, 20).c_str(), nullptr) == TFMS_OK);
    CHECK(tfms_index_apply_json(index, upsert_line(1, 0, 600, 901, 20, 2.0).c_str(), nullptr) ==
          TFMS_OK);
    REQUIRE(tfms_index_save(index, path.c_str()) == TFMS_OK);

    tfms_index_t* loaded = nullptr;
    REQUIRE(tfms_index_open(path.c_str(), &loaded) == TFMS_OK);
    uint64_t count = 0;
    CHECK(tfms_index_candidate_count(loaded, 7, &count) == TFMS_OK);
    CHECK(count == 1);
    tfms_index_destroy(loaded);

    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(24);
        char b = 0x55;
        f.write(&b, 1);
    }
    tfms_index_t* corrupt = nullptr;
    CHECK(tfms_index_open(path.c_str(), &corrupt) == TFMS_ERR_CORRUPT);
    CHECK(corrupt == nullptr);
    CHECK(tfms_index_open((dir + "/missing.bin").c_str(), &corrupt) == TFMS_ERR_IO);

    tfms_index_destroy(index);
}

TEST_CASE("engine handle: refresh, events, advance, fetch") {
    tfms_engine_t* engine = nullptr;
    REQUIRE(tfms_engine_create(42, 10, 0, 2, &engine) == TFMS_OK);

    CHECK(tfms_engine_apply_json(engine, membership_line(0, 0, 1, 10).c_str()) == TFMS_OK);
    CHECK(tfms_engine_apply_json(engine, upsert_line(1, 0, 500, 900, 10, 1.5).c_str()) == TFMS_OK);

    uint64_t users[] = {1};
    REQUIRE(tfms_engine_full_refresh(engine, users, 1, 0) == TFMS_OK);

    char* fetched = nullptr;
    REQUIRE(tfms_engine_fetch_json(engine, 1, 1000, &fetched) == TFMS_OK);
    std::string json = fetched;
    tfms_string_free(fetched);
    CHECK(json.find("\"cache_miss\":false") != std::string::npos);
    CHECK(json.find("\"ad\":900") != std::string::npos);

    // a new campaign flows through the per-event delta pipeline
    CHECK(tfms_engine_apply_json(engine, upsert_line(2, 2000, 501, 901, 10, 9.0).c_str()) ==
          TFMS_OK);
    CHECK(tfms_engine_advance(engine, 3000) == TFMS_OK);
    REQUIRE(tfms_engine_fetch_json(engine, 1, 3000, &fetched) == TFMS_OK);
    json = fetched;
    tfms_string_free(fetched);
    CHECK(json.find("\"ad\":901") != std::string::npos);

    // unknown user misses
    REQUIRE(tfms_engine_fetch_json(engine, 99, 3000, &fetched) == TFMS_OK);
    json = fetched;
    tfms_string_free(fetched);
    CHECK(json.find("\"cache_miss\":true") != std::string::npos);

    CHECK(tfms_engine_create(1, 0, 0, 1, &engine) == TFMS_ERR_INVALID_ARGUMENT);
    tfms_engine_destroy(engine);
}

TEST_CASE("generate / simulate / compare command layer") {
    const std::string dir = temp_dir("tfms_capi_cmd");
    const std::string spec_path = dir + "/spec.json";
    {
        std::ofstream spec(spec_path);
        spec << R"({"seed": 5, "users": 60, "crowds": 30, "campaigns": 80, "horizon_days": 1,
                    "crowds_per_user_min": 2, "crowds_per_user_max": 10,
                    "targetings_per_campaign_min": 1, "targetings_per_campaign_max": 8})";
    }

    char* summary = nullptr;
    REQUIRE(tfms_generate(spec_path.c_str(), (dir + "/wl").c_str(), nullptr, &summary) == TFMS_OK);
    REQUIRE(summary != nullptr);
    std::string summary_a = summary;
    tfms_string_free(summary);

    // regenerating with the same seed gives identical checksums
    REQUIRE(tfms_generate(spec_path.c_str(), (dir + "/wl2").c_str(), nullptr, &summary) == TFMS_OK);
    std::string summary_b = summary;
    tfms_string_free(summary);
    auto checksum_of = [](const std::string& s) {
        auto pos = s.find("events_checksum");
        return s.substr(pos, s.find(',', pos) - pos);
    };
    CHECK(checksum_of(summary_a) == checksum_of(summary_b));

    // a seed override changes the logs
    REQUIRE(tfms_generate(spec_path.c_str(), (dir + "/wl3").c_str(), "{\"seed\": 6}", &summary) ==
            TFMS_OK);
    std::string summary_c = summary;
    tfms_string_free(summary);
    CHECK(checksum_of(summary_c) != checksum_of(summary_a));

    CHECK(tfms_generate((dir + "/nope.json").c_str(), dir.c_str(), nullptr, nullptr) == TFMS_ERR_IO);
    CHECK(tfms_generate(spec_path.c_str(), (dir + "/wl4").c_str(), "{\"users\": 0}", nullptr) ==
          TFMS_ERR_BAD_SPEC);

    const std::string config_path = dir + "/run.ini";
    {
        std::ofstream config(config_path);
        config << "[paths]\nevents = " << dir << "/wl/events.jsonl\ntraffic = " << dir
               << "/wl/traffic.jsonl\nout_dir = " << dir << "/out_a\n"
               << "[run]\nmatchers = oracle,truncated,tfms\nseed = 5\n"
               << "[truncation]\nm = 2\nk = 10\nn = 10\n[tfms]\ntopn = 10\nwindow_mins = 5\n";
    }
    char* report = nullptr;
    REQUIRE(tfms_simulate(config_path.c_str(), nullptr, &report) == TFMS_OK);
    std::string report_a = report;
    tfms_string_free(report);
    CHECK(std::filesystem::exists(dir + "/out_a/report.json"));
    CHECK(std::filesystem::exists(dir + "/out_a/report.csv"));

    REQUIRE(tfms_simulate(config_path.c_str(), nullptr, &report) == TFMS_OK);
    std::string report_b = report;
    tfms_string_free(report);
    CHECK(report_a == report_b);  // deterministic rerun

    // compare a report with itself: identical workload, zero deltas
    char* delta = nullptr;
    REQUIRE(tfms_compare((dir + "/out_a/report.json").c_str(),
                         (dir + "/out_a/report.json").c_str(), &delta) == TFMS_OK);
    std::string delta_text = delta;
    tfms_string_free(delta);
    CHECK(delta_text.find("\"rpm_pct\": 0.0") != std::string::npos);

    // a report from different logs is rejected
    const std::string config2 = dir + "/run2.ini";
    {
        std::ofstream config(config2);
        config << "[paths]\nevents = " << dir << "/wl3/events.jsonl\ntraffic = " << dir
               << "/wl3/traffic.jsonl\nout_dir = " << dir << "/out_c\n"
               << "[run]\nmatchers = oracle,truncated\nseed = 5\n"
               << "[truncation]\nm = 2\nk = 10\nn = 10\n";
    }
    REQUIRE(tfms_simulate(config2.c_str(), nullptr, nullptr) == TFMS_OK);
    CHECK(tfms_compare((dir + "/out_a/report.json").c_str(), (dir + "/out_c/report.json").c_str(),
                       &delta) == TFMS_ERR_MISMATCH);

    CHECK(tfms_simulate((dir + "/missing.ini").c_str(), nullptr, nullptr) == TFMS_ERR_IO);
    CHECK(tfms_simulate(config_path.c_str(), "run.matchers = bogus\n", nullptr) ==
          TFMS_ERR_BAD_SPEC);

    // a malformed event log is rejected, not half-replayed
    {
        std::ofstream bad(dir + "/bad.jsonl");
        bad << "{\"seq\":0,\"at\":0,\"kind\":\"visit\",\"payload\":{\"user\":1}}\n";
        bad << "this line is not an event\n";
    }
    CHECK(tfms_simulate(config_path.c_str(), ("paths.events = " + dir + "/bad.jsonl\n").c_str(),
                        nullptr) == TFMS_ERR_BAD_EVENT);
}
