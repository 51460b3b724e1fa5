#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fracwave::scenario {

/// One declared numeric check: value must satisfy (value relation threshold),
/// where relation is "<=" or ">=".
struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation = "<=";
    bool pass = false;
};

/// Outcome of one scenario run.  CSV outputs are byte-identical across runs
/// of the same config; wall_ms is informational and lives only in the report.
struct RunReport {
    std::string name;
    std::string task;
    std::vector<Check> checks;
    std::vector<std::string> outputs;  // file names written under the output dir
    std::string out_dir;
    double wall_ms = 0.0;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Loads the JSON config at config_path, applies dotted-path overrides
/// ("problem.M=512"), runs the task and writes report.json plus the task's
/// CSV files into the output directory (config output.dir, overridden by
/// out_override).  expected_task, when nonempty, must agree with the config.
///
/// Throws ConfigError for malformed configs and propagates the numeric
/// modules' errors with scenario context.
RunReport run(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_override, const std::string& expected_task);

/// Human-readable per-check summary (one line per check plus a status line).
void print_report(std::ostream& os, const RunReport& r);

}  // namespace fracwave::scenario
