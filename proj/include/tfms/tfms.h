/*
 * C interface to the truncation-free ad-matching engine.
 *
 * All handles are opaque; every function returns a tfms_rc and reports
 * details through tfms_last_error(). Strings returned through char** out
 * parameters are heap-allocated and must be released with tfms_string_free.
 *
 * Events use the line-delimited JSON record format shared with the CLI and
 * the simulation harness: {"seq":N,"at":MS,"kind":"...","payload":{...}}.
 */
#ifndef TFMS_H
#define TFMS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TFMS_API __declspec(dllexport)
#else
#define TFMS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tfms_rc {
    TFMS_OK = 0,
    TFMS_ERR_INVALID_ARGUMENT = -1,
    TFMS_ERR_IO = -2,
    TFMS_ERR_CORRUPT = -3,
    TFMS_ERR_BAD_EVENT = -4,
    TFMS_ERR_BAD_SPEC = -5,
    TFMS_ERR_MISMATCH = -6,
    TFMS_ERR_INTERNAL = -99
} tfms_rc;

TFMS_API const char* tfms_version(void);

/* Message for the most recent failure on this thread; empty if none. */
TFMS_API const char* tfms_last_error(void);

TFMS_API void tfms_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Targeting index: the three maps (user->crowd, crowd->ad, crowd->user) */

typedef struct tfms_index_t tfms_index_t;

TFMS_API tfms_rc tfms_index_create(tfms_index_t** out);
TFMS_API void tfms_index_destroy(tfms_index_t* index);

/* Applies one mutation record; rejected events leave the index unchanged.
 * version_out (optional) receives the new index version. */
TFMS_API tfms_rc tfms_index_apply_json(tfms_index_t* index, const char* event_json,
                                       uint64_t* version_out);

TFMS_API tfms_rc tfms_index_stats_json(const tfms_index_t* index, char** json_out);

/* |O(u)|: size of the untruncated candidate pair set. */
TFMS_API tfms_rc tfms_index_candidate_count(const tfms_index_t* index, uint64_t user,
                                            uint64_t* count_out);

/* Checksummed binary snapshot; open fails with TFMS_ERR_CORRUPT on any
 * bit damage. */
TFMS_API tfms_rc tfms_index_save(const tfms_index_t* index, const char* path);
TFMS_API tfms_rc tfms_index_open(const char* path, tfms_index_t** out);

/* ------------------------------------------------------------------ */
/* Near-line engine: index + top-n cache + delta window + online fetch */

typedef struct tfms_engine_t tfms_engine_t;

/* window_minutes = 0 flushes the delta pipeline after every event. */
TFMS_API tfms_rc tfms_engine_create(uint64_t seed, uint32_t top_n, int64_t window_minutes,
                                    uint32_t parallelism, tfms_engine_t** out);
TFMS_API void tfms_engine_destroy(tfms_engine_t* engine);

/* Applies the event to the engine's index and delta window. */
TFMS_API tfms_rc tfms_engine_apply_json(tfms_engine_t* engine, const char* event_json);

/* Daily fully-update over the given users at simulated time at_ms. */
TFMS_API tfms_rc tfms_engine_full_refresh(tfms_engine_t* engine, const uint64_t* users,
                                          size_t user_count, int64_t at_ms);

/* Flushes delta windows that have elapsed by now_ms. */
TFMS_API tfms_rc tfms_engine_advance(tfms_engine_t* engine, int64_t now_ms);

/* Online fetch with validity filtering. Result JSON:
 * {"cache_miss":bool,"staleness_ms":N,"dropped_invalid":N,
 *  "served":[{"ad":A,"crowd":C,"score":S},...]} */
TFMS_API tfms_rc tfms_engine_fetch_json(tfms_engine_t* engine, uint64_t user, int64_t at_ms,
                                        char** result_json);

/* ------------------------------------------------------------------ */
/* Command layer: what the CLI wraps */

/* Generates events.jsonl and traffic.jsonl under out_dir from a workload spec
 * (JSON file). spec_overrides_json, if non-NULL, is a JSON object merged
 * over the spec file. summary_json (optional) describes the written logs. */
TFMS_API tfms_rc tfms_generate(const char* spec_json_path, const char* out_dir,
                               const char* spec_overrides_json, char** summary_json);

/* Runs the simulation described by a run-config file (plain-text key=value
 * with [sections]). overrides, if non-NULL, uses the same syntax and wins.
 * Writes report.json / report.csv when the config names an out_dir;
 * report_json_out (optional) receives the full report document. */
TFMS_API tfms_rc tfms_simulate(const char* config_path, const char* overrides,
                               char** report_json_out);

/* Relative deltas between two report.json files from the same workload. */
TFMS_API tfms_rc tfms_compare(const char* report_path_a, const char* report_path_b,
                              char** delta_json_out);

#ifdef __cplusplus
}
#endif

#endif /* TFMS_H */
