#include "sfrbid/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace sfrbid {
namespace {

std::string join(const std::vector<std::string>& errors) {
    std::string s;
    for (const auto& e : errors) {
        if (!s.empty()) s += '\n';
        s += e;
    }
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& tok, double& out) {
    if (tok == "inf" || tok == "+inf") return out = kInf, true;
    if (tok == "-inf") return out = -kInf, true;
    if (tok.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(tok.c_str(), &end);
    return errno == 0 && end == tok.c_str() + tok.size() && std::isfinite(out);
}

enum class Kind { Duration, Power, Energy, Ramp, Rate, Number, Count, Bool, Word, Path };

struct KeySpec {
    Kind kind;
    bool vector;  // may be given as file:<path>
};

// Accepted unit suffixes and their factor to the canonical unit.
const std::map<Kind, std::map<std::string, double>>& unit_table() {
    static const std::map<Kind, std::map<std::string, double>> t = {
        {Kind::Duration, {{"s", 1.0}, {"min", 60.0}, {"h", 3600.0}, {"d", 86400.0}}},
        {Kind::Power, {{"W", 1e-3}, {"kW", 1.0}, {"MW", 1e3}}},
        {Kind::Energy, {{"Wh", 1e-3}, {"kWh", 1.0}, {"MWh", 1e3}}},
        {Kind::Ramp, {{"kW/s", 1.0}, {"kW/min", 1.0 / 60.0}, {"MW/s", 1e3}}},
        {Kind::Rate, {{"1/h", 1.0}, {"1/s", 3600.0}}},
    };
    return t;
}

const std::map<std::string, KeySpec>& schema() {
    static const std::map<std::string, KeySpec> s = {
        {"time.horizon", {Kind::Duration, false}},
        {"time.reserve_period", {Kind::Duration, false}},
        {"time.day_ahead", {Kind::Duration, false}},
        {"time.intraday", {Kind::Duration, false}},
        {"time.system", {Kind::Duration, false}},
        {"time.control", {Kind::Duration, false}},
        {"time.ramp", {Kind::Duration, false}},
        {"time.intraday_lead", {Kind::Duration, false}},
        {"time.da_gate", {Kind::Duration, false}},
        {"time.day_aligned", {Kind::Bool, false}},
        {"system.a", {Kind::Rate, false}},
        {"system.b", {Kind::Number, false}},
        {"system.c", {Kind::Number, false}},
        {"system.u", {Kind::Power, true}},
        {"system.p_lo", {Kind::Power, true}},
        {"system.p_hi", {Kind::Power, true}},
        {"system.r_lo", {Kind::Ramp, true}},
        {"system.r_hi", {Kind::Ramp, true}},
        {"system.x_lo", {Kind::Energy, true}},
        {"system.x_hi", {Kind::Energy, true}},
        {"system.x0", {Kind::Energy, false}},
        {"system.x0_min", {Kind::Energy, false}},
        {"system.x0_max", {Kind::Energy, false}},
        {"system.rated_power", {Kind::Power, false}},
        {"policy.n_da_lb", {Kind::Count, false}},
        {"policy.n_id_lb", {Kind::Count, false}},
        {"objective.kind", {Kind::Word, false}},
        {"objective.c_res", {Kind::Number, false}},
        {"objective.c_da", {Kind::Number, true}},
        {"objective.c_id", {Kind::Number, true}},
        {"objective.c_up", {Kind::Number, true}},
        {"objective.c_dn", {Kind::Number, true}},
        {"objective.rho_up", {Kind::Number, true}},
        {"objective.rho_dn", {Kind::Number, true}},
        {"objective.mu", {Kind::Number, true}},
        {"objective.gamma_min", {Kind::Power, false}},
        {"solver.backend", {Kind::Word, false}},
        {"solver.feasibility_tol", {Kind::Number, false}},
        {"solver.optimality_tol", {Kind::Number, false}},
        {"solver.deterministic", {Kind::Bool, false}},
        {"solver.verbose", {Kind::Bool, false}},
        {"solver.method", {Kind::Word, false}},
        {"solver.time_limit", {Kind::Duration, false}},
        {"solver.minimize_ramp", {Kind::Bool, false}},
        {"output.label", {Kind::Word, false}},
        {"output.extended", {Kind::Bool, false}},
        {"output.solution", {Kind::Path, false}},
        {"output.report", {Kind::Path, false}},
    };
    return s;
}

struct Entry {
    std::string value;
    int line;
};

class Reader {
public:
    Reader(std::string name, std::filesystem::path base) : name_(std::move(name)), base_(std::move(base)) {}

    std::vector<std::string> errors;
    std::map<std::string, Entry> entries;

    void error(int line, const std::string& msg) {
        errors.push_back(name_ + ":" + std::to_string(line) + ": " + msg);
    }
    void error(const std::string& msg) { errors.push_back(name_ + ": " + msg); }

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    /// Number with the unit required by the key's kind, converted to canonical units.
    bool scalar(const std::string& key, double& out) {
        auto it = entries.find(key);
        if (it == entries.end()) return false;
        const Kind kind = schema().at(key).kind;
        std::istringstream ss(it->second.value);
        std::string num, unit, extra;
        ss >> num >> unit >> extra;
        if (!extra.empty()) {
            error(it->second.line, key + ": unexpected text '" + extra + "'");
            return false;
        }
        double v = 0.0;
        if (!parse_number(num, v)) {
            error(it->second.line, key + ": '" + num + "' is not a number");
            return false;
        }
        auto units = unit_table().find(kind);
        if (units == unit_table().end()) {
            if (!unit.empty()) {
                error(it->second.line, key + ": takes no unit, got '" + unit + "'");
                return false;
            }
            out = v;
            return true;
        }
        if (unit.empty()) {
            error(it->second.line, key + ": missing unit (expected one of " + unit_list(units->second) + ")");
            return false;
        }
        auto f = units->second.find(unit);
        if (f == units->second.end()) {
            error(it->second.line, key + ": unit '" + unit + "' does not fit (expected one of " +
                                       unit_list(units->second) + ")");
            return false;
        }
        out = v * f->second;
        return true;
    }

    void duration(const std::string& key, Seconds& out) {
        double v = 0.0;
        if (!scalar(key, v)) return;
        if (!std::isfinite(v) || v < 0.0 || std::floor(v) != v) {
            error(entries.at(key).line, key + ": must be a whole number of seconds");
            return;
        }
        out = static_cast<Seconds>(v);
    }

    void number(const std::string& key, double& out) {
        double v = 0.0;
        if (scalar(key, v)) out = v;
    }

    void count(const std::string& key, std::int64_t& out) {
        double v = 0.0;
        if (!scalar(key, v)) return;
        if (!std::isfinite(v) || v < 0.0 || std::floor(v) != v) {
            error(entries.at(key).line, key + ": must be a non-negative integer");
            return;
        }
        out = static_cast<std::int64_t>(v);
    }

    void boolean(const std::string& key, bool& out) {
        auto it = entries.find(key);
        if (it == entries.end()) return;
        const auto& v = it->second.value;
        if (v == "true" || v == "yes" || v == "1") out = true;
        else if (v == "false" || v == "no" || v == "0") out = false;
        else error(it->second.line, key + ": expected true or false, got '" + v + "'");
    }

    void word(const std::string& key, std::string& out) {
        auto it = entries.find(key);
        if (it != entries.end()) out = it->second.value;
    }

    void path(const std::string& key, std::string& out) {
        auto it = entries.find(key);
        if (it != entries.end()) out = resolve(it->second.value);
    }

    /// Scalar with unit, or file:<path> holding values in the canonical unit.
    void quantity(const std::string& key, Quantity& out) {
        auto it = entries.find(key);
        if (it == entries.end()) return;
        const auto& v = it->second.value;
        if (v.rfind("file:", 0) == 0) {
            files_.push_back({key, resolve(trim(v.substr(5))), it->second.line});
            out.from_file = true;
            return;
        }
        double s = 0.0;
        if (scalar(key, s)) out.scalar = s;
    }

    /// Loads file-backed quantities once the lengths are known.
    void load_files(const std::map<std::string, std::pair<Quantity*, std::int64_t>>& targets) {
        for (const auto& f : files_) {
            auto t = targets.find(f.key);
            if (t == targets.end()) continue;
            try {
                t->second.first->values = load_prices(f.path, t->second.second);
            } catch (const std::exception& e) {
                error(f.line, f.key + ": " + e.what());
            }
        }
    }

    std::string resolve(const std::string& p) const {
        std::filesystem::path fp(p);
        if (fp.is_relative()) fp = base_ / fp;
        return fp.lexically_normal().string();
    }

private:
    static std::string unit_list(const std::map<std::string, double>& units) {
        std::string s;
        for (const auto& [u, f] : units) s += (s.empty() ? "" : ", ") + u;
        return s;
    }

    struct FileRef {
        std::string key;
        std::string path;
        int line;
    };

    std::string name_;
    std::filesystem::path base_;
    std::vector<FileRef> files_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

VectorXd Quantity::expand(std::int64_t n) const {
    if (from_file) {
        if (values.size() != n)
            throw std::invalid_argument("profile has " + std::to_string(values.size()) +
                                        " entries, expected " + std::to_string(n));
        return values;
    }
    return VectorXd::Constant(n, scalar);
}

VectorXd load_prices(const std::string& path, std::int64_t expected) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        const std::string where = path + ":" + std::to_string(lineno);
        if (comma == std::string::npos)
            throw std::runtime_error(where + ": expected 'index,value'");
        double idx = 0.0, val = 0.0;
        if (!parse_number(trim(line.substr(0, comma)), idx) || !parse_number(trim(line.substr(comma + 1)), val))
            throw std::runtime_error(where + ": non-numeric entry");
        if (idx != static_cast<double>(values.size() + 1))
            throw std::runtime_error(where + ": expected index " + std::to_string(values.size() + 1));
        values.push_back(val);
    }
    if (static_cast<std::int64_t>(values.size()) != expected)
        throw std::runtime_error(path + ": has " + std::to_string(values.size()) + " rows, expected " +
                                 std::to_string(expected));
    return Eigen::Map<VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

ScenarioConfig parse_config(std::istream& in, const std::string& name,
                            const std::filesystem::path& base_dir) {
    Reader r(name, base_dir);
    std::string section;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                r.error(lineno, "malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            r.error(lineno, "expected 'key = value'");
            continue;
        }
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!schema().count(key)) {
            r.error(lineno, "unknown key '" + key + "'");
            continue;
        }
        if (r.has(key)) {
            r.error(lineno, "duplicate key '" + key + "' (first on line " +
                                std::to_string(r.entries.at(key).line) + ")");
            continue;
        }
        if (value.empty()) {
            r.error(lineno, key + ": empty value");
            continue;
        }
        r.entries[key] = {value, lineno};
    }

    ScenarioConfig cfg;
    cfg.source = name;
    cfg.label = std::filesystem::path(name).stem().string();
    cfg.ts = Timescales::swiss();

    auto& ts = cfg.ts;
    for (const char* req : {"time.horizon", "system.p_lo", "system.p_hi", "system.x_lo", "system.x_hi"})
        if (!r.has(req)) r.error(std::string("missing required field '") + req + "'");
    r.duration("time.horizon", ts.horizon);
    ts.reserve_period = ts.horizon;
    r.duration("time.reserve_period", ts.reserve_period);
    r.duration("time.day_ahead", ts.day_ahead);
    r.duration("time.intraday", ts.intraday);
    r.duration("time.system", ts.system);
    r.duration("time.control", ts.control);
    r.duration("time.ramp", ts.ramp);
    r.duration("time.intraday_lead", ts.intraday_lead);
    r.duration("time.da_gate", ts.da_gate_offset);
    r.boolean("time.day_aligned", ts.day_aligned);

    r.number("system.a", cfg.a);
    r.number("system.b", cfg.b);
    r.number("system.c", cfg.c);
    r.quantity("system.u", cfg.u);
    r.quantity("system.p_lo", cfg.p_lo);
    r.quantity("system.p_hi", cfg.p_hi);
    cfg.r_lo.scalar = -kInf;
    cfg.r_hi.scalar = kInf;
    r.quantity("system.r_lo", cfg.r_lo);
    r.quantity("system.r_hi", cfg.r_hi);
    r.quantity("system.x_lo", cfg.x_lo);
    r.quantity("system.x_hi", cfg.x_hi);
    if (r.has("system.x0")) {
        if (r.has("system.x0_min") || r.has("system.x0_max"))
            r.error(r.entries.at("system.x0").line, "give either x0 or x0_min/x0_max, not both");
        r.number("system.x0", cfg.x0_min);
        cfg.x0_max = cfg.x0_min;
    } else if (r.has("system.x0_min") && r.has("system.x0_max")) {
        r.number("system.x0_min", cfg.x0_min);
        r.number("system.x0_max", cfg.x0_max);
    } else {
        r.error("missing required field 'system.x0' (or both 'system.x0_min' and 'system.x0_max')");
    }

    r.count("policy.n_da_lb", cfg.n_da_lb);
    r.count("policy.n_id_lb", cfg.n_id_lb);

    std::string kind = "max_capacity";
    r.word("objective.kind", kind);
    if (kind == "max_capacity") cfg.objective.kind = ObjectiveKind::MaxCapacity;
    else if (kind == "expected_profit") cfg.objective.kind = ObjectiveKind::ExpectedProfit;
    else r.error(r.entries.at("objective.kind").line, "objective.kind must be max_capacity or expected_profit");
    r.number("objective.c_res", cfg.objective.c_res);
    Quantity c_da, c_id, c_up, c_dn, rho_up, rho_dn, mu;
    r.quantity("objective.c_da", c_da);
    r.quantity("objective.c_id", c_id);
    r.quantity("objective.c_up", c_up);
    r.quantity("objective.c_dn", c_dn);
    r.quantity("objective.rho_up", rho_up);
    r.quantity("objective.rho_dn", rho_dn);
    r.quantity("objective.mu", mu);
    r.number("objective.gamma_min", cfg.gamma_min);
    if (r.has("objective.gamma_min") && !(cfg.gamma_min >= 0.0 && std::isfinite(cfg.gamma_min)))
        r.error(r.entries.at("objective.gamma_min").line, "objective.gamma_min must be a finite value >= 0");

    r.word("solver.backend", cfg.backend);
    r.number("solver.feasibility_tol", cfg.solver.feasibility_tol);
    r.number("solver.optimality_tol", cfg.solver.optimality_tol);
    r.boolean("solver.deterministic", cfg.solver.deterministic);
    r.boolean("solver.verbose", cfg.solver.verbose);
    r.word("solver.method", cfg.solver.method);
    if (r.has("solver.time_limit")) {
        double t = 0.0;
        if (r.scalar("solver.time_limit", t)) cfg.solver.time_limit = t;
    }
    r.boolean("solver.minimize_ramp", cfg.minimize_ramp);

    r.word("output.label", cfg.label);
    r.boolean("output.extended", cfg.extended);
    r.path("output.solution", cfg.solution_path);
    r.path("output.report", cfg.report_path);

    if (!r.errors.empty()) throw ConfigError(r.errors);

    for (const auto& v : validate(ts)) r.error("timescales: " + v);
    if (!r.errors.empty()) throw ConfigError(r.errors);
    const IndexCounts counts = derive_counts(ts);

    r.load_files({{"system.u", {&cfg.u, counts.n_s}},
                  {"system.p_lo", {&cfg.p_lo, counts.n_s}},
                  {"system.p_hi", {&cfg.p_hi, counts.n_s}},
                  {"system.r_lo", {&cfg.r_lo, counts.n_s}},
                  {"system.r_hi", {&cfg.r_hi, counts.n_s}},
                  {"system.x_lo", {&cfg.x_lo, counts.n_s}},
                  {"system.x_hi", {&cfg.x_hi, counts.n_s}},
                  {"objective.c_da", {&c_da, counts.n_da}},
                  {"objective.c_id", {&c_id, counts.n_id}},
                  {"objective.c_up", {&c_up, counts.n_id}},
                  {"objective.c_dn", {&c_dn, counts.n_id}},
                  {"objective.rho_up", {&rho_up, counts.n_id}},
                  {"objective.rho_dn", {&rho_dn, counts.n_id}},
                  {"objective.mu", {&mu, counts.n_s}}});
    if (!r.errors.empty()) throw ConfigError(r.errors);

    auto fill = [&](const char* key, const Quantity& q, std::int64_t n, VectorXd& out) {
        if (r.has(key)) out = q.expand(n);
    };
    fill("objective.c_da", c_da, counts.n_da, cfg.objective.c_da);
    fill("objective.c_id", c_id, counts.n_id, cfg.objective.c_id);
    fill("objective.c_up", c_up, counts.n_id, cfg.objective.c_up);
    fill("objective.c_dn", c_dn, counts.n_id, cfg.objective.c_dn);
    fill("objective.rho_up", rho_up, counts.n_id, cfg.objective.rho_up);
    fill("objective.rho_dn", rho_dn, counts.n_id, cfg.objective.rho_dn);
    fill("objective.mu", mu, counts.n_s, cfg.objective.mu);

    if (r.has("system.rated_power")) r.number("system.rated_power", cfg.rated_power);
    else cfg.rated_power = std::max(cfg.p_hi.expand(counts.n_s).cwiseAbs().maxCoeff(),
                                    cfg.p_lo.expand(counts.n_s).cwiseAbs().maxCoeff());
    if (!(cfg.rated_power > 0.0)) r.error("rated power must be positive");

    try {
        const BiddingProblem problem = make_problem(cfg);
        const ProblemData data = ProblemData::build(problem);
        ObjectiveSpec spec = problem.objective;
        spec.normalize(data.counts, data.avg);
    } catch (const std::exception& e) {
        r.error(e.what());
    }
    if (!r.errors.empty()) throw ConfigError(r.errors);
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open"});
    return parse_config(in, path, std::filesystem::path(path).parent_path());
}

BiddingProblem make_problem(const ScenarioConfig& cfg) {
    BiddingProblem p;
    p.ts = cfg.ts;
    const IndexCounts counts = derive_counts(cfg.ts);
    const auto n = counts.n_s;
    auto& s = p.system;
    s.a = cfg.a;
    s.b = cfg.b;
    s.c = cfg.c;
    s.u = cfg.u.expand(n);
    s.p_lo = cfg.p_lo.expand(n);
    s.p_hi = cfg.p_hi.expand(n);
    s.r_lo = cfg.r_lo.expand(n);
    s.r_hi = cfg.r_hi.expand(n);
    s.x_lo = cfg.x_lo.expand(n);
    s.x_hi = cfg.x_hi.expand(n);
    s.x0_min = cfg.x0_min;
    s.x0_max = cfg.x0_max;
    s.validate(n);
    p.structure = make_structure(counts, cfg.ts, cfg.n_da_lb, cfg.n_id_lb);
    p.objective = cfg.objective;
    p.gamma_min = cfg.gamma_min;
    return p;
}

}  // namespace sfrbid
