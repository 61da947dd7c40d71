#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oscint/runner.hpp"

using namespace oscint;

namespace {

struct Criterion {
    const char* id;
    const char* file;
    const char* title;
    std::optional<double> max_seconds;
    bool informational = false;
};

const std::vector<Criterion> kCriteria{
    {"1", "c01_dispersive.json", "dispersive decay slope -1/2", 5.0},
    {"2", "c02_oracle.json", "direct vs factored oracle", 30.0},
    {"3", "c03_product_identity.json", "lambda = 0 product identity", {}},
    {"4", "c04_sweep_l1l1linf.json", "L1 x L1 -> Linf slope", 120.0},
    {"5", "c05_sweep_l2l1l2.json", "L2 x L1 -> L2 slope", {}},
    {"6", "c06_sweep_interpolated.json", "interpolated exponent (2,2,inf)", {}},
    {"7", "c07_admissibility.json", "admissibility truth table", {}},
    {"8", "c08_sweep_weighted.json", "weighted decay b = 1", {}},
    {"9", "c09_kernel_decay.json", "TT* kernel decay and collapse", {}},
    {"10", "c10_counterexample1.json", "counterexample 1 flat compensated ratio (n = 2048)", {}},
    {"10i", "c10_info_n8192.json", "counterexample 1 at n = 8192 and box divergence", {}, true},
    {"11", "c11_counterexample2.json", "counterexample 2 identity and tail", {}},
    {"12", "c12_finite_part.json", "finite part pairings", {}},
    {"13", "c13_fp_multiplier.json", "finite-part bilinear multiplier", 600.0},
    {"14", "c14_scatter.json", "second Born lambda vs time", 600.0},
};

std::string summary(const Json& report)
{
    std::string s;
    if (!report.contains("checks")) return s;
    for (const auto& c : report["checks"]) {
        if (!s.empty()) s += "; ";
        s += c["name"].get<std::string>() + "=" + (c["value"].is_number() ? format_number(c["value"].get<double>()) : c["value"].dump());
        if (!c["pass"].get<bool>()) s += " (violated)";
    }
    return s;
}

}

int main(int argc, char** argv)
{
    const std::filesystem::path dir = argc > 1 ? argv[1] : OSCINT_CONFIG_DIR;
    int failures = 0;
    for (const auto& c : kCriteria) {
        const auto t0 = std::chrono::steady_clock::now();
        RunResult r = run_config_file((dir / c.file).string());
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        bool pass = r.exit_code == kExitPass;
        std::string detail = r.exit_code == kExitError ? "error: " + r.error : summary(r.report);
        char timing[96];
        if (c.max_seconds) {
            std::snprintf(timing, sizeof timing, "%.1f s of %.0f s", secs, *c.max_seconds);
            pass = pass && secs < *c.max_seconds;
        } else {
            std::snprintf(timing, sizeof timing, "%.1f s", secs);
        }
        const char* tag = c.informational ? (pass ? "INFO-PASS" : "INFO-FAIL") : (pass ? "PASS" : "FAIL");
        std::printf("%s criterion %s: %s [%s] %s\n", tag, c.id, c.title, timing, detail.c_str());
        std::fflush(stdout);
        if (!pass && !c.informational) ++failures;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
