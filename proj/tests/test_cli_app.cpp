#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sfrbid/cli_app.hpp"

using namespace sfrbid;
namespace fs = std::filesystem;

namespace {

const char* kTwoHour = R"(# two hour ideal battery
[time]
horizon = 2 h
intraday_lead = 15 min

[system]
p_lo = -5 kW
p_hi = 5000 W
x_lo = 0 kWh
x_hi = 15 kWh
x0 = 7.5 kWh
r_lo = -600 kW/min
r_hi = 10 kW/s

[policy]
n_id_lb = 1

[output]
label = two_hour
)";

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sfrbid_cli_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return (path / name).string();
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> config_errors(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_config(in, "case.cfg", ".");
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& what) {
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "sfrbid");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str() + err.str();
    return code;
}

}  // namespace

TEST_CASE("config values are converted to canonical units") {
    std::istringstream in(kTwoHour);
    const ScenarioConfig cfg = parse_config(in, "two.cfg", ".");
    CHECK(cfg.label == "two_hour");
    CHECK(cfg.ts.horizon == 2 * kHour);
    CHECK(cfg.ts.reserve_period == 2 * kHour);
    CHECK(cfg.ts.intraday_lead == 15 * kMinute);
    CHECK(cfg.p_hi.scalar == 5.0);
    CHECK(cfg.r_lo.scalar == -10.0);
    CHECK(cfg.x0_min == 7.5);
    CHECK(cfg.x0_max == 7.5);
    CHECK(cfg.n_id_lb == 1);
    CHECK(cfg.rated_power == 5.0);
    const BiddingProblem pb = make_problem(cfg);
    CHECK(pb.system.p_hi.size() == 24);
    CHECK(pb.structure.mask_id.population() == 8 - 2);
}

TEST_CASE("config errors name the file and line") {
    auto missing = config_errors(replace(kTwoHour, "p_hi = 5000 W\n", ""));
    CHECK(any_contains(missing, "p_hi"));

    auto negative = config_errors(replace(kTwoHour, "[output]", "[objective]\ngamma_min = -1 kW\n[output]"));
    CHECK(any_contains(negative, "gamma_min"));
    CHECK(any_contains(negative, "case.cfg:"));

    auto units = config_errors(replace(kTwoHour, "p_hi = 5000 W", "p_hi = 5 kWh"));
    CHECK(any_contains(units, "case.cfg:8:"));

    auto unknown = config_errors(replace(kTwoHour, "[policy]", "[policy]\nlookahead = 3"));
    CHECK(any_contains(unknown, "lookahead"));

    auto several = config_errors(replace(replace(kTwoHour, "p_hi = 5000 W", "p_hi = 5 kWh"), "x_lo = 0 kWh",
                                         "x_lo = zero"));
    CHECK(several.size() >= 2);
    CHECK(config_errors(kTwoHour).empty());
}

TEST_CASE("price files must list every slot in order") {
    TempDir dir;
    std::string good = "# slot,price\n";
    for (int k = 1; k <= 8; ++k) good += std::to_string(k) + "," + std::to_string(0.1 * k) + "\n";
    const VectorXd v = load_prices(dir.write("good.csv", good), 8);
    CHECK(v.size() == 8);
    CHECK(v[7] == doctest::Approx(0.8));
    CHECK_THROWS(load_prices(dir.file("good.csv"), 9));
    CHECK_THROWS(load_prices(dir.write("order.csv", "1,0.1\n3,0.2\n2,0.3\n"), 3));
    CHECK_THROWS(load_prices(dir.file("absent.csv"), 3));

    std::string cfg = replace(kTwoHour, "[output]", "[objective]\nkind = expected_profit\nc_da = file:good.csv\n[output]");
    const std::string path = dir.write("prices.cfg", cfg);
    CHECK_THROWS_AS(load_config(path), ConfigError);  // 8 rows for 2 day-ahead slots
}

TEST_CASE("solve exit codes and byte-identical solution files") {
    TempDir dir;
    const std::string cfg = dir.write("two.cfg", kTwoHour);
    std::string text;
    CHECK(cli({"solve", cfg, "-o", dir.file("a.sol")}, &text) == exit_code::ok);
    CHECK(text.find("two_hour") != std::string::npos);
    CHECK(cli({"solve", cfg, "-o", dir.file("b.sol")}) == exit_code::ok);
    const std::string a = slurp(dir.file("a.sol"));
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(dir.file("b.sol")));

    const auto counts = derive_counts(load_config(cfg).ts);
    const SolutionFile sol = read_solution_file(dir.file("a.sol"), counts);
    CHECK(sol.status == LpStatus::Optimal);
    const ScenarioResult direct = run_scenario(load_config(cfg));
    CHECK(sol.policy.gamma == direct.gamma);
    CHECK(sol.objective == direct.objective);
    // the 15 min lead lets the intra-day trades recover energy: more than the 3.75 kW of a fixed schedule
    CHECK(sol.policy.gamma > 3.75);
    CHECK((MatrixXd(sol.policy.Q_id) - MatrixXd(direct.solution.policy.Q_id)).cwiseAbs().maxCoeff() == 0.0);
    IndexCounts other = counts;
    other.n_id += 1;
    CHECK_THROWS_AS(read_solution_file(dir.file("a.sol"), other), std::runtime_error);

    const std::string tight = dir.write(
        "tight.cfg", replace(kTwoHour, "[output]", "[objective]\ngamma_min = 6 kW\n[output]"));
    CHECK(cli({"solve", tight}) == exit_code::infeasible);
    CHECK(cli({"solve", dir.file("missing.cfg")}) == exit_code::usage);
    CHECK(cli({"solve"}) == exit_code::usage);
    CHECK(cli({"frobnicate"}) == exit_code::usage);
    CHECK(cli({"--help"}) == exit_code::ok);
}

TEST_CASE("verify passes the solution and fails an inflated one") {
    TempDir dir;
    const std::string cfg = dir.write("two.cfg", kTwoHour);
    REQUIRE(cli({"solve", cfg, "-o", dir.file("a.sol")}) == exit_code::ok);
    std::string text;
    CHECK(cli({"verify", cfg, dir.file("a.sol"), "--count", "20", "--report", dir.file("r.txt")}, &text) ==
          exit_code::ok);
    CHECK(text.find("result    pass") != std::string::npos);
    CHECK(slurp(dir.file("r.txt")).find("sustained_up") != std::string::npos);
    CHECK(cli({"verify", cfg, dir.file("a.sol"), "--signals", "up", "--gamma-scale", "1.01"}, &text) ==
          exit_code::verification_failure);
    CHECK(text.find("violation state") != std::string::npos);
    CHECK(cli({"verify", cfg, dir.file("a.sol"), "--signals", "sideways"}) == exit_code::usage);
}

TEST_CASE("signal selections") {
    CHECK(parse_signal_spec("standard", 1, 10).size() == 10);
    CHECK(parse_signal_spec("zero", 1, 10).size() == 1);
    const auto sq = parse_signal_spec("square:4", 1, 10);
    REQUIRE(sq.size() == 1);
    CHECK(sq[0].period_steps == 4);
    CHECK(parse_signal_spec("random", 1, 5).size() == 5);
    CHECK_THROWS(parse_signal_spec("square:x", 1, 1));
}

TEST_CASE("suites") {
    TempDir dir;
    dir.write("two.cfg", kTwoHour);
    dir.write("empty.suite", "# nothing here\n");
    std::string text;
    CHECK(cli({"suite", dir.file("empty.suite")}, &text) == exit_code::ok);

    dir.write("s.suite", "first two.cfg\nlong two.cfg extended\nbroken nowhere.cfg\n");
    const auto entries = load_suite(dir.file("s.suite"));
    REQUIRE(entries.size() == 3);
    CHECK(entries[1].extended);
    CHECK(fs::path(entries[0].config).parent_path() == dir.path);
    const auto rows = run_suite(entries, false, 2);
    REQUIRE(rows.size() == 2);  // the extended entry is skipped
    CHECK(rows[0].ran);
    CHECK(rows[0].result.gamma > 3.75);
    CHECK(rows[1].entry.label == "broken");
    CHECK_FALSE(rows[1].ran);
    CHECK_FALSE(rows[1].error.empty());
    CHECK(run_suite(entries, true, 1).size() == 3);
    std::ostringstream table;
    print_suite_table(rows, table, true);
    CHECK(table.str().find("first") != std::string::npos);
    CHECK(cli({"suite", dir.file("s.suite"), "--machine"}) == exit_code::ok);
}

TEST_CASE("export writes an MPS file") {
    TempDir dir;
    const std::string cfg = dir.write("two.cfg", kTwoHour);
    CHECK(cli({"export", cfg, dir.file("p.mps")}) == exit_code::ok);
    const std::string mps = slurp(dir.file("p.mps"));
    CHECK(mps.find("ROWS") != std::string::npos);
    CHECK(mps.find("gamma") != std::string::npos);
    CHECK(cli({"export", cfg, dir.file("q.mps")}) == exit_code::ok);
    CHECK(slurp(dir.file("q.mps")) == mps);
}
