// bcsgap: simple | certify | solve | thermo | gcheck

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>

#include "bcsgap/pipeline.hpp"

namespace {

int run(const std::function<int()>& body) {
    try {
        return body();
    } catch (const bcsgap::InvalidParameter& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return bcsgap::exit_config;
    } catch (const bcsgap::ConvergenceError& e) {
        std::fprintf(stderr, "no convergence: %s\n", e.what());
        return bcsgap::exit_convergence;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return bcsgap::exit_error;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BCS-Bogoliubov gap equation solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output;
    std::optional<unsigned> threads;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "key = value configuration file")->required();
        sub->add_option("-o,--output", output, "output directory (overrides output.dir)");
        sub->add_option("-j,--threads", threads, "worker threads (0: all cores)");
    };
    auto* simple = app.add_subcommand("simple", "constant-coupling envelopes and closed forms");
    auto* certify = app.add_subcommand("certify", "search for a contraction certificate");
    auto* solve = app.add_subcommand("solve", "transition temperature and gap surface");
    auto* thermo = app.add_subcommand("thermo", "solve, then the thermodynamic checks");
    for (auto* s : {simple, certify, solve, thermo}) add_common(s);
    auto* gcheck = app.add_subcommand("gcheck", "tabulate g and its integral");
    std::string gcheck_dir = "out";
    gcheck->add_option("-o,--output", gcheck_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (gcheck->parsed()) return run([&] { return bcsgap::cmd_gcheck(gcheck_dir); });

    return run([&] {
        auto cfg = bcsgap::load_config(config_path);
        if (output) cfg.output_dir = *output;
        if (threads) cfg.threads = *threads;
        if (simple->parsed()) return bcsgap::cmd_simple(cfg);
        if (certify->parsed()) return bcsgap::cmd_certify(cfg);
        if (solve->parsed()) return bcsgap::cmd_solve(cfg);
        return bcsgap::cmd_thermo(cfg);
    });
}
