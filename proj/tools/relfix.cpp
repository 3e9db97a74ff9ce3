#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "relfix/runner.hpp"

int main(int argc, char** argv) {
    using namespace relfix::cli;
    CLI::App app{"relfix: relational fixed-point checks and a fractional boundary-value solver"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string example_id;
    std::string config_path;
    double step = 0.0;

    auto* verify = app.add_subcommand("verify-example", "run the check battery of one worked example");
    verify->add_option("id", example_id, "Ex1_7 | Ex1_13 | Ex1_14 | Ex2_3 | Ex2_4")->required();
    verify->add_option("--step", step, "lattice step for interval samples");
    verify->add_option("--seed", cfg.seed, "sampling seed");
    verify->add_option("--out", cfg.output_dir, "output directory");

    auto* solve = app.add_subcommand("solve-fbvp", "solve the fractional boundary-value problem");
    solve->add_option("--config", config_path, "key = value problem file")->required();
    solve->add_option("--out", cfg.output_dir, "output directory");

    auto* report = app.add_subcommand("report", "summarize a report.json");
    report->add_option("--in", cfg.input_dir, "directory holding report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (verify->parsed()) {
            cfg.command = Command::VerifyExample;
            cfg.example = relfix::fixtures::parse_example_id(example_id);
            if (!cfg.example) throw relfix::ConfigError("id: unknown example '" + example_id + "'");
            if (verify->count("--step") > 0) cfg.step = step;
        } else if (solve->parsed()) {
            cfg.command = Command::SolveFbvp;
            cfg.problem = parse_fbvp_config_file(config_path);
        } else {
            cfg.command = Command::Report;
        }
    } catch (const relfix::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    return run(cfg, std::cout, std::cerr);
}
