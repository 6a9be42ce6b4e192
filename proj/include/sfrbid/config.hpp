#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfrbid/lp_model.hpp"
#include "sfrbid/robust_lp.hpp"

namespace sfrbid {

/// Schema or parse errors, each prefixed with "file:line:" where a line applies.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// A scalar or per-interval quantity, converted to canonical units.
struct Quantity {
    double scalar = 0.0;
    VectorXd values;  // set when read from a file
    bool from_file = false;

    VectorXd expand(std::int64_t n) const;
};

struct ScenarioConfig {
    std::string label;
    std::string source;  // path of the config file
    bool extended = false;

    Timescales ts;

    double a = 0.0;  // 1/h
    double b = 1.0;
    double c = 1.0;
    Quantity u;     // kW
    Quantity p_lo, p_hi;  // kW
    Quantity r_lo, r_hi;  // kW/s
    Quantity x_lo, x_hi;  // kWh
    double x0_min = 0.0;  // kWh
    double x0_max = 0.0;
    double rated_power = 0.0;  // kW, reporting reference

    std::int64_t n_da_lb = 0;
    std::int64_t n_id_lb = 0;

    ObjectiveSpec objective;
    double gamma_min = 0.0;

    std::string backend = "highs";
    SolverOptions solver;
    bool minimize_ramp = false;

    std::string solution_path;
    std::string report_path;
};

/// Parses the key = value format documented in the README. Relative file
/// references resolve against `base_dir`.
ScenarioConfig parse_config(std::istream& in, const std::string& name,
                            const std::filesystem::path& base_dir);
ScenarioConfig load_config(const std::string& path);

/// Price or profile file: one "index,value" row per slot, indices 1..expected
/// in order. Blank lines and lines starting with '#' are ignored.
VectorXd load_prices(const std::string& path, std::int64_t expected);

BiddingProblem make_problem(const ScenarioConfig& cfg);

}  // namespace sfrbid
