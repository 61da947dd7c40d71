#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "oscint/parallel.hpp"
#include "oscint/runner.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"bilinear oscillatory integral experiments"};
    app.require_subcommand(1);

    std::string config, out = "results";
    int threads = 0;
    auto* run = app.add_subcommand("run", "run one experiment config and write <name>.csv and <name>.json");
    run->add_option("config", config, "JSON experiment config")->required();
    run->add_option("--out", out, "output directory");
    run->add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_subcommand("list", "describe the experiment kinds, their required fields and default tolerances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : oscint::kExitError;
    }

    if (app.got_subcommand("list")) {
        std::cout << oscint::list_experiments();
        return 0;
    }

    oscint::set_num_threads(threads);
    oscint::RunResult r = oscint::run_config_file(config);
    if (r.exit_code == oscint::kExitError) {
        std::cerr << "oscint: " << r.error << '\n';
        return r.exit_code;
    }
    try {
        oscint::write_results(r, out, std::filesystem::path(config).stem().string());
    } catch (const std::exception& e) {
        std::cerr << "oscint: " << e.what() << '\n';
        return oscint::kExitError;
    }
    for (const auto& c : r.report["checks"]) {
        std::cout << (c["pass"].get<bool>() ? "pass  " : "FAIL  ") << c["name"].get<std::string>() << ": " << c["value"].dump()
                  << '\n';
    }
    std::cout << (r.passed ? "PASS" : "FAIL") << '\n';
    return r.exit_code;
}
