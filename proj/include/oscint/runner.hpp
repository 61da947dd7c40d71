#pragma once
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace oscint {

using Json = nlohmann::ordered_json;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentInfo {
    std::string kind;
    std::string summary;
    std::vector<std::string> required;
    std::vector<std::pair<std::string, double>> tolerances;  // defaults
};

// Deterministic catalogue: the nine core kinds first, then the auxiliary checks.
const std::vector<ExperimentInfo>& experiment_catalogue();
std::string list_experiments();

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string str() const;  // header row, '.' decimals, '\n' line endings
};

enum ExitCode { kExitPass = 0, kExitError = 1, kExitToleranceFail = 2 };

struct RunResult {
    int exit_code = kExitError;
    bool passed = false;
    Json report;
    CsvTable csv;
    std::string error;
};

// Line/column diagnostics on malformed text.
Json parse_config_text(const std::string& text);
RunResult run_experiment(const Json& config);
RunResult run_config_file(const std::string& path);
// Writes <stem>.csv and <stem>.json into dir (created if needed).
void write_results(const RunResult& r, const std::string& dir, const std::string& stem);

std::string format_number(double v);

}
