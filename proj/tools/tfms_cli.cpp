// tfms command-line driver: generate workloads, replay them against the
// matchers, and diff the resulting reports. Everything goes through the
// public C API in tfms/tfms.h.

#include "tfms/tfms.h"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int fail(const char* what) {
    std::cerr << what << ": " << tfms_last_error() << "\n";
    return 1;
}

void print_and_free(char* s) {
    if (!s) return;
    std::cout << s << "\n";
    tfms_string_free(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"truncation-free matching simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tfms_version()));

    // gen
    std::string gen_spec, gen_out = ".";
    std::int64_t gen_seed = -1;
    auto* gen = app.add_subcommand("gen", "generate a synthetic workload (events + traffic logs)");
    gen->add_option("--spec", gen_spec, "workload spec JSON file")->required();
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "override the spec's seed");

    // run
    std::string run_config, run_out, run_matchers;
    std::int64_t run_seed = -1, run_topn = -1, run_m = -1, run_k = -1, run_window = -1;
    auto* run = app.add_subcommand("run", "replay a workload against the selected matchers");
    run->add_option("--config", run_config, "run config file (key=value with [sections])")->required();
    run->add_option("--out", run_out, "override paths.out_dir");
    run->add_option("--matchers", run_matchers, "comma list: oracle,truncated,tfms");
    run->add_option("--seed", run_seed, "override run.seed");
    run->add_option("--topn", run_topn, "override truncation.n and tfms.topn");
    run->add_option("--m", run_m, "override truncation.m (crowds per channel)");
    run->add_option("--k", run_k, "override truncation.k (ads per crowd)");
    run->add_option("--window-mins", run_window, "override tfms.window_mins");

    // compare
    std::string cmp_a, cmp_b;
    auto* cmp = app.add_subcommand("compare", "relative deltas between two report.json files");
    cmp->add_option("report_a", cmp_a, "baseline report.json")->required();
    cmp->add_option("report_b", cmp_b, "candidate report.json")->required();

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        std::string overrides;
        if (gen_seed >= 0) overrides = "{\"seed\": " + std::to_string(gen_seed) + "}";
        char* summary = nullptr;
        if (tfms_generate(gen_spec.c_str(), gen_out.c_str(),
                          overrides.empty() ? nullptr : overrides.c_str(), &summary) != TFMS_OK)
            return fail("gen failed");
        print_and_free(summary);
        return 0;
    }

    if (run->parsed()) {
        std::ostringstream overrides;
        if (!run_out.empty()) overrides << "paths.out_dir = " << run_out << "\n";
        if (!run_matchers.empty()) overrides << "run.matchers = " << run_matchers << "\n";
        if (run_seed >= 0) overrides << "run.seed = " << run_seed << "\n";
        if (run_topn >= 0) {
            overrides << "truncation.n = " << run_topn << "\n";
            overrides << "tfms.topn = " << run_topn << "\n";
        }
        if (run_m >= 0) overrides << "truncation.m = " << run_m << "\n";
        if (run_k >= 0) overrides << "truncation.k = " << run_k << "\n";
        if (run_window >= 0) overrides << "tfms.window_mins = " << run_window << "\n";
        char* report = nullptr;
        const std::string o = overrides.str();
        if (tfms_simulate(run_config.c_str(), o.empty() ? nullptr : o.c_str(), &report) != TFMS_OK)
            return fail("run failed");
        print_and_free(report);
        return 0;
    }

    if (cmp->parsed()) {
        char* delta = nullptr;
        if (tfms_compare(cmp_a.c_str(), cmp_b.c_str(), &delta) != TFMS_OK)
            return fail("compare failed");
        print_and_free(delta);
        return 0;
    }

    return 1;
}
