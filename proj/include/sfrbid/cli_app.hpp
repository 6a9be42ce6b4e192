#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sfrbid/config.hpp"
#include "sfrbid/robust_lp.hpp"
#include "sfrbid/verify_sim.hpp"

namespace sfrbid {

namespace exit_code {
constexpr int ok = 0;
constexpr int infeasible = 2;
constexpr int unbounded = 3;
constexpr int backend_failure = 4;
constexpr int verification_failure = 5;
constexpr int usage = 64;
}  // namespace exit_code

int exit_code_for(LpStatus status);

struct ScenarioResult {
    std::string label;
    ScenarioConfig config;
    LpStatus status = LpStatus::Error;
    double gamma = 0.0;          // kW
    double gamma_pct = 0.0;      // % of rated power
    double ramp = 0.0;           // kW/s
    double ramp_pct = 0.0;       // (% of rated power)/s
    double objective = 0.0;
    double seconds = 0.0;        // assembly + solve
    std::int64_t iterations = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t nonzeros = 0;
    std::string message;
    Solution solution;
};

/// Assembles and solves one configuration. Never throws for solver
/// outcomes; input errors propagate as exceptions.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

void print_solve_report(const ScenarioResult& r, std::ostream& out, bool machine);

/// Line-oriented solution file; values printed with 17 significant digits.
void write_solution(const ScenarioResult& r, std::ostream& out);

struct SolutionFile {
    std::string label;
    LpStatus status = LpStatus::Error;
    double objective = 0.0;
    AffinePolicy policy;
};

/// Throws std::runtime_error on malformed input or dimension mismatch.
SolutionFile read_solution(std::istream& in, const IndexCounts& counts);
SolutionFile read_solution_file(const std::string& path, const IndexCounts& counts);

struct SuiteEntry {
    std::string label;
    std::string config;
    bool extended = false;
};

/// Suite file: one "label config-path [extended]" entry per line.
std::vector<SuiteEntry> load_suite(const std::string& path);

struct SuiteRow {
    SuiteEntry entry;
    bool ran = false;
    std::string error;
    ScenarioResult result;
};

std::vector<SuiteRow> run_suite(const std::vector<SuiteEntry>& entries, bool include_extended,
                                int jobs);
void print_suite_table(const std::vector<SuiteRow>& rows, std::ostream& out, bool machine);

/// Signal selection for verification: standard | zero | up | down |
/// square:<steps> | random | walk.
std::vector<SignalSpec> parse_signal_spec(const std::string& spec, std::uint64_t seed, int count);

int cmd_solve(const std::string& config, const std::string& out_path, bool machine,
              std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& config, const std::string& solution, const std::string& signals,
               std::uint64_t seed, int count, const std::string& report_path, double gamma_scale,
               std::ostream& out, std::ostream& err);
int cmd_suite(const std::string& suite, bool include_extended, bool machine, int jobs,
              std::ostream& out, std::ostream& err);
int cmd_export(const std::string& config, const std::string& path, std::ostream& out,
               std::ostream& err);

/// Entry point of the command-line tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sfrbid
