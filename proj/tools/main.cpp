#include "chaosrates/cli.hpp"

#include <CLI11.hpp>

#include <string>

int main(int argc, char** argv) {
    CLI::App app{"chaosrates: arbitrage-free interest-rate markets built from "
                 "square-integrable Wiener functionals"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 1;

    const char* verbs[] = {"simulate", "curve", "validate", "price", "calibrate"};
    const char* descs[] = {
        "simulate kernel paths and write summary statistics",
        "write the initial discount curve and forward rates",
        "run the full martingale/potential test battery",
        "price discount-bond options and single cash flows",
        "fit a first-chaos spec to a discount curve file",
    };
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(verbs[i], descs[i]);
        sub->add_option("--config", config_path, "path to the JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config 'outputs')");
        sub->add_option("--threads", threads, "worker threads for path streaming");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // bad invocation is a config error
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    return chaosrates::run_command(verb, config_path, out_dir, threads);
}
