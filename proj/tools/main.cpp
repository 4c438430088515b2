#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include "CLI11.hpp"

#include "atmcast/error.hpp"
#include "atmcast/kernels.hpp"
#include "atmcast/pipeline.hpp"

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override base_seed");
    cmd->add_option("--out", c.out, "Override output_dir");
    cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Chaos-aware ATM cash demand forecasting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("atmcast ") + atmcast::kToolVersion);

    Common common;
    using Verb = void (*)(const atmcast::RunConfig&);
    const std::pair<const char*, std::pair<const char*, Verb>> verbs[] = {
        {"synth", {"Generate the synthetic corpus named in the config", atmcast::cmd_synth}},
        {"analyze", {"Preprocess and run the chaos tests per series", atmcast::cmd_analyze}},
        {"forecast", {"Grid-search, refit and forecast every (series, family, arm)", atmcast::cmd_forecast}},
        {"evaluate", {"Score forecasts and aggregate metrics", atmcast::cmd_evaluate}},
        {"report", {"Assemble the consolidated run report", atmcast::cmd_report}},
        {"run", {"analyze, forecast, evaluate and report in sequence", atmcast::cmd_run}},
    };
    Verb chosen = nullptr;
    for (const auto& [name, info] : verbs) {
        auto* cmd = app.add_subcommand(name, info.first);
        add_common(cmd, common);
        const Verb fn = info.second;
        cmd->callback([&chosen, fn] { chosen = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        atmcast::RunConfig cfg = atmcast::load_config(common.config);
        if (common.seed) cfg.base_seed = *common.seed;
        if (common.out) cfg.output_dir = std::filesystem::absolute(*common.out);
        if (common.threads) cfg.threads = *common.threads;
        if (cfg.threads > 0) {
            omp_set_num_threads(cfg.threads);
            atmcast::kernels::set_threads(cfg.threads);
        }
        chosen(cfg);
    } catch (const atmcast::Error& e) {
        std::cerr << e.what() << "\n";
        return atmcast::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
