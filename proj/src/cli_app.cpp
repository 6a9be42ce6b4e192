#include "sfrbid/cli_app.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

namespace sfrbid {
namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string exact(double v) { return fmt("%.17g", v); }

LpStatus parse_status(const std::string& s) {
    for (LpStatus st : {LpStatus::Optimal, LpStatus::Infeasible, LpStatus::Unbounded, LpStatus::Error})
        if (s == status_name(st)) return st;
    throw std::runtime_error("unknown status '" + s + "'");
}

std::string days(Seconds s) { return fmt("%g", static_cast<double>(s) / 86400.0); }
std::string hours(Seconds s) { return fmt("%g", to_hours(s)); }

}  // namespace

int exit_code_for(LpStatus status) {
    switch (status) {
    case LpStatus::Optimal: return exit_code::ok;
    case LpStatus::Infeasible: return exit_code::infeasible;
    case LpStatus::Unbounded: return exit_code::unbounded;
    case LpStatus::Error: return exit_code::backend_failure;
    }
    return exit_code::backend_failure;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult r;
    r.label = cfg.label;
    r.config = cfg;
    const BiddingProblem problem = make_problem(cfg);
    const ProblemData data = ProblemData::build(problem);
    const RobustProgram prog = assemble(problem, data);
    r.rows = prog.lp.num_rows();
    r.cols = prog.lp.num_variables();
    r.nonzeros = prog.lp.num_nonzeros();

    const auto backend = make_backend(cfg.backend);
    SolveOptions opts;
    opts.lp = cfg.solver;
    opts.minimize_ramp = cfg.minimize_ramp;
    r.solution = solve(prog, data, *backend, opts);
    r.status = r.solution.status;
    r.iterations = r.solution.iterations;
    r.message = r.solution.message;
    if (r.status == LpStatus::Optimal) {
        r.gamma = r.solution.policy.gamma;
        r.gamma_pct = 100.0 * r.gamma / cfg.rated_power;
        r.ramp = required_ramp(r.solution.policy, data);
        r.ramp_pct = 100.0 * r.ramp / cfg.rated_power;
        r.objective = r.solution.objective;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void print_solve_report(const ScenarioResult& r, std::ostream& out, bool machine) {
    if (machine) {
        out << "label=" << r.label << '\n'
            << "status=" << status_name(r.status) << '\n'
            << "gamma_kw=" << exact(r.gamma) << '\n'
            << "gamma_pct=" << exact(r.gamma_pct) << '\n'
            << "required_ramp_kw_per_s=" << exact(r.ramp) << '\n'
            << "required_ramp_pct_per_s=" << exact(r.ramp_pct) << '\n'
            << "objective=" << exact(r.objective) << '\n'
            << "iterations=" << r.iterations << '\n'
            << "rows=" << r.rows << '\n'
            << "cols=" << r.cols << '\n'
            << "nonzeros=" << r.nonzeros << '\n'
            << "seconds=" << fmt("%.3f", r.seconds) << '\n';
        return;
    }
    out << "scenario       " << r.label << '\n';
    out << "status         " << status_name(r.status);
    if (r.status != LpStatus::Optimal && !r.message.empty()) out << " (" << r.message << ')';
    out << '\n';
    if (r.status == LpStatus::Optimal) {
        out << "gamma          " << fmt("%.6f", r.gamma) << " kW (" << fmt("%.2f", r.gamma_pct)
            << " % of rated power)\n";
        out << "required ramp  " << fmt("%.6f", r.ramp) << " kW/s (" << fmt("%.2f", r.ramp_pct)
            << " %/s)\n";
        out << "objective      " << fmt("%.9g", r.objective) << '\n';
    }
    out << "program        " << r.rows << " rows, " << r.cols << " columns, " << r.nonzeros
        << " nonzeros\n";
    out << "solver         " << r.iterations << " iterations, " << fmt("%.2f", r.seconds) << " s\n";
}

void write_solution(const ScenarioResult& r, std::ostream& out) {
    const auto& p = r.solution.policy;
    out << "sfrbid-solution 1\n";
    out << "label " << r.label << '\n';
    out << "status " << status_name(r.status) << '\n';
    out << "objective " << exact(r.objective) << '\n';
    out << "gamma " << exact(p.gamma) << '\n';
    out << "q_da " << p.q_da.size();
    for (Eigen::Index i = 0; i < p.q_da.size(); ++i) out << ' ' << exact(p.q_da[i]);
    out << "\nq_id " << p.q_id.size();
    for (Eigen::Index i = 0; i < p.q_id.size(); ++i) out << ' ' << exact(p.q_id[i]);
    out << '\n';
    for (const auto* m : {&p.Q_da, &p.Q_id}) {
        out << (m == &p.Q_da ? "Q_da " : "Q_id ") << m->rows() << ' ' << m->cols() << ' ' << m->nonZeros()
            << '\n';
        for (Eigen::Index i = 0; i < m->outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(*m, i); it; ++it)
                out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << exact(it.value()) << '\n';
    }
    out << "end\n";
}

SolutionFile read_solution(std::istream& in, const IndexCounts& counts) {
    SolutionFile s;
    s.policy = AffinePolicy::zero(counts);
    std::string word;
    auto expect = [&](const char* w) {
        if (!(in >> word) || word != w) throw std::runtime_error(std::string("solution file: expected '") + w + "'");
    };
    int version = 0;
    expect("sfrbid-solution");
    in >> version;
    if (version != 1) throw std::runtime_error("solution file: unsupported version");
    expect("label");
    in >> s.label;
    expect("status");
    in >> word;
    s.status = parse_status(word);
    expect("objective");
    in >> s.objective;
    expect("gamma");
    in >> s.policy.gamma;
    auto read_vec = [&](const char* name, VectorXd& v, std::int64_t n) {
        expect(name);
        std::int64_t len = -1;
        in >> len;
        if (len != n)
            throw std::runtime_error(std::string("solution file: ") + name + " has length " +
                                     std::to_string(len) + ", configuration expects " + std::to_string(n));
        for (std::int64_t i = 0; i < n; ++i) in >> v[i];
    };
    read_vec("q_da", s.policy.q_da, counts.n_da);
    read_vec("q_id", s.policy.q_id, counts.n_id);
    auto read_mat = [&](const char* name, SparseMatrix& m, std::int64_t n) {
        expect(name);
        std::int64_t rows = -1, cols = -1, nnz = -1;
        in >> rows >> cols >> nnz;
        if (rows != n || cols != n || nnz < 0)
            throw std::runtime_error(std::string("solution file: ") + name + " has the wrong shape");
        std::vector<Eigen::Triplet<double>> t;
        for (std::int64_t k = 0; k < nnz; ++k) {
            std::int64_t i = 0, j = 0;
            double v = 0.0;
            in >> i >> j >> v;
            if (i < 1 || i > n || j < 1 || j > n) throw std::runtime_error("solution file: index out of range");
            t.emplace_back(i - 1, j - 1, v);
        }
        m.setFromTriplets(t.begin(), t.end());
    };
    read_mat("Q_da", s.policy.Q_da, counts.n_da);
    read_mat("Q_id", s.policy.Q_id, counts.n_id);
    expect("end");
    if (!in) throw std::runtime_error("solution file: truncated");
    return s;
}

SolutionFile read_solution_file(const std::string& path, const IndexCounts& counts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_solution(in, counts);
}

std::vector<SuiteEntry> load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    const auto base = std::filesystem::path(path).parent_path();
    std::vector<SuiteEntry> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ss(line);
        SuiteEntry e;
        std::string flag;
        if (!(ss >> e.label)) continue;
        if (!(ss >> e.config))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'label config [extended]'");
        if (ss >> flag) {
            if (flag != "extended")
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown flag '" + flag + "'");
            e.extended = true;
        }
        std::filesystem::path cp(e.config);
        if (cp.is_relative()) e.config = (base / cp).lexically_normal().string();
        out.push_back(e);
    }
    return out;
}

std::vector<SuiteRow> run_suite(const std::vector<SuiteEntry>& entries, bool include_extended,
                                int jobs) {
    std::vector<SuiteRow> rows;
    for (const auto& e : entries)
        if (include_extended || !e.extended) rows.push_back({e, false, {}, {}});

    auto run_one = [](SuiteRow& row) {
        try {
            ScenarioConfig cfg = load_config(row.entry.config);
            cfg.label = row.entry.label;
            row.result = run_scenario(cfg);
            row.ran = true;
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
    };
    if (jobs <= 1) {
        for (auto& row : rows) run_one(row);
    } else {
        for (std::size_t begin = 0; begin < rows.size(); begin += static_cast<std::size_t>(jobs)) {
            std::vector<std::future<void>> pending;
            const std::size_t end = std::min(rows.size(), begin + static_cast<std::size_t>(jobs));
            for (std::size_t i = begin; i < end; ++i)
                pending.push_back(std::async(std::launch::async, run_one, std::ref(rows[i])));
            for (auto& f : pending) f.get();
        }
    }
    return rows;
}

void print_suite_table(const std::vector<SuiteRow>& rows, std::ostream& out, bool machine) {
    if (machine) {
        out << "label\tt_res_d\tlead_h\tn_da_lb\tn_id_lb\tgamma_pct\tramp_pct_per_s\tseconds\tstatus\n";
        for (const auto& row : rows) {
            if (!row.ran) {
                out << row.entry.label << "\t\t\t\t\t\t\t\terror: " << row.error << '\n';
                continue;
            }
            const auto& r = row.result;
            const auto& ts = r.config.ts;
            out << r.label << '\t' << days(ts.reserve_period) << '\t' << hours(ts.intraday_lead) << '\t'
                << r.config.n_da_lb << '\t' << r.config.n_id_lb << '\t' << exact(r.gamma_pct) << '\t'
                << exact(r.ramp_pct) << '\t' << fmt("%.3f", r.seconds) << '\t' << status_name(r.status)
                << '\n';
        }
        return;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %7s %7s %8s %8s %10s %14s %9s  %s\n", "label", "T_RES", "lead",
                  "N_DA_lb", "N_ID_lb", "gamma", "ramp", "time", "status");
    out << buf;
    std::snprintf(buf, sizeof buf, "%-12s %7s %7s %8s %8s %10s %14s %9s\n", "", "[d]", "[h]", "", "",
                  "[% p]", "[(% p)/s]", "[s]");
    out << buf;
    for (const auto& row : rows) {
        if (!row.ran) {
            out << row.entry.label << "  error: " << row.error << '\n';
            continue;
        }
        const auto& r = row.result;
        const auto& ts = r.config.ts;
        std::snprintf(buf, sizeof buf, "%-12s %7s %7s %8lld %8lld %10.2f %14.2f %9.2f  %s\n", r.label.c_str(),
                      days(ts.reserve_period).c_str(), hours(ts.intraday_lead).c_str(),
                      static_cast<long long>(r.config.n_da_lb), static_cast<long long>(r.config.n_id_lb),
                      r.gamma_pct, r.ramp_pct, r.seconds, status_name(r.status));
        out << buf;
    }
}

std::vector<SignalSpec> parse_signal_spec(const std::string& spec, std::uint64_t seed, int count) {
    if (count < 1) throw std::invalid_argument("signal count must be positive");
    if (spec == "standard") {
        const int random = std::max(0, (count - 6) / 2);
        auto out = standard_signals(seed, random);
        if (static_cast<int>(out.size()) < count) {
            SignalSpec extra{SignalKind::UniformRandom};
            extra.seed = seed + static_cast<std::uint64_t>(random);
            out.push_back(extra);
        }
        if (static_cast<int>(out.size()) > count) out.resize(static_cast<std::size_t>(count));
        return out;
    }
    if (spec == "zero") return {SignalSpec{SignalKind::Zero}};
    if (spec == "up") return {SignalSpec{SignalKind::Sustained, 1.0}};
    if (spec == "down") return {SignalSpec{SignalKind::Sustained, -1.0}};
    if (spec.rfind("square:", 0) == 0) {
        SignalSpec s{SignalKind::SquareWave};
        try {
            s.period_steps = std::stoll(spec.substr(7));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad square wave period in '" + spec + "'");
        }
        return {s};
    }
    if (spec == "random" || spec == "walk") {
        std::vector<SignalSpec> out;
        for (int i = 0; i < count; ++i) {
            SignalSpec s{spec == "random" ? SignalKind::UniformRandom : SignalKind::RandomWalk};
            s.seed = seed + static_cast<std::uint64_t>(i);
            out.push_back(s);
        }
        return out;
    }
    throw std::invalid_argument("unknown signal spec '" + spec +
                                "' (standard, zero, up, down, square:<steps>, random, walk)");
}

int cmd_solve(const std::string& config, const std::string& out_path, bool machine,
              std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg;
    try {
        cfg = load_config(config);
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return exit_code::usage;
    }
    ScenarioResult r;
    try {
        r = run_scenario(cfg);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::backend_failure;
    }
    print_solve_report(r, out, machine);
    if (r.status != LpStatus::Optimal) return exit_code_for(r.status);

    std::string path = out_path;
    if (path.empty()) path = cfg.solution_path;
    if (path.empty()) path = cfg.label + ".solution";
    std::ofstream f(path);
    if (!f) {
        err << "cannot write solution to '" << path << "'\n";
        return exit_code::usage;
    }
    write_solution(r, f);
    if (!machine) out << "solution       " << path << '\n';
    return exit_code::ok;
}

int cmd_verify(const std::string& config, const std::string& solution, const std::string& signals,
               std::uint64_t seed, int count, const std::string& report_path, double gamma_scale,
               std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg;
    BiddingProblem problem;
    ProblemData data;
    SolutionFile sol;
    std::vector<SignalSpec> specs;
    try {
        cfg = load_config(config);
        problem = make_problem(cfg);
        data = ProblemData::build(problem);
        sol = read_solution_file(solution, data.counts);
        check_policy(sol.policy, problem.structure);
        specs = parse_signal_spec(signals, seed, count);
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return exit_code::usage;
    }
    sol.policy.gamma *= gamma_scale;

    std::ofstream report_file;
    std::string rpath = report_path.empty() ? cfg.report_path : report_path;
    if (!rpath.empty()) {
        report_file.open(rpath);
        if (!report_file) {
            err << "cannot write report to '" << rpath << "'\n";
            return exit_code::usage;
        }
    }

    std::size_t passed = 0;
    VerificationReport worst;
    double worst_score = -1.0;
    for (const auto& spec : specs) {
        VerificationReport rep =
            check_feasibility(sol.policy, problem.system, data, make_signal(spec, cfg.ts));
        rep.signal = spec.label();
        if (rep.feasible) ++passed;
        const double score = std::max({rep.power_violation, rep.ramp_violation, rep.state_violation});
        if (score > worst_score) {
            worst_score = score;
            worst = rep;
        }
        if (report_file.is_open()) {
            write_report(rep, report_file);
            report_file << '\n';
        }
    }
    const bool ok = passed == specs.size();
    out << "signals   " << specs.size() << '\n';
    out << "passed    " << passed << '\n';
    out << "result    " << (ok ? "pass" : "fail") << '\n';
    out << "worst     " << worst.signal << " (power " << worst.power_violation << ", ramp "
        << worst.ramp_violation << ", state " << worst.state_violation << ")\n";
    for (const auto& v : worst.worst)
        out << "violation " << v.family << " at t=" << v.time_s << " s: value " << v.value << ", bound "
            << v.bound << '\n';
    return ok ? exit_code::ok : exit_code::verification_failure;
}

int cmd_suite(const std::string& suite, bool include_extended, bool machine, int jobs,
              std::ostream& out, std::ostream& err) {
    std::vector<SuiteEntry> entries;
    try {
        entries = load_suite(suite);
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return exit_code::usage;
    }
    const auto rows = run_suite(entries, include_extended, jobs);
    print_suite_table(rows, out, machine);
    for (const auto& r : rows)
        if (!r.ran) err << r.entry.label << ": " << r.error << '\n';
    return exit_code::ok;
}

int cmd_export(const std::string& config, const std::string& path, std::ostream& out,
               std::ostream& err) {
    try {
        const ScenarioConfig cfg = load_config(config);
        const BiddingProblem problem = make_problem(cfg);
        RobustProgram prog = assemble(problem);
        prog.lp.name = cfg.label;
        write_mps_file(prog.lp, path);
        out << "wrote " << path << " (" << prog.lp.num_rows() << " rows, " << prog.lp.num_variables()
            << " columns)\n";
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::backend_failure;
    }
    return exit_code::ok;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust energy and reserve bidding for flexible systems"};
    app.require_subcommand(1);

    std::string config, solution, out_path, suite, signals = "standard", report, mps;
    bool machine = false, extended = false;
    int jobs = 1, count = 1000;
    std::uint64_t seed = 1;
    double gamma_scale = 1.0;

    auto* solve_cmd = app.add_subcommand("solve", "Solve one scenario and write its solution file");
    solve_cmd->add_option("config", config, "Scenario configuration")->required();
    solve_cmd->add_option("-o,--out", out_path, "Solution file");
    solve_cmd->add_flag("--machine", machine, "key=value output");

    auto* verify_cmd = app.add_subcommand("verify", "Simulate a solution under activation signals");
    verify_cmd->add_option("config", config, "Scenario configuration")->required();
    verify_cmd->add_option("solution", solution, "Solution file")->required();
    verify_cmd->add_option("--signals", signals, "standard | zero | up | down | square:<steps> | random | walk");
    verify_cmd->add_option("--count", count, "Number of signals");
    verify_cmd->add_option("--seed", seed, "Random seed");
    verify_cmd->add_option("--report", report, "Per-signal report file");
    verify_cmd->add_option("--gamma-scale", gamma_scale, "Multiply the capacity before checking");

    auto* suite_cmd = app.add_subcommand("suite", "Solve every scenario listed in a suite file");
    suite_cmd->add_option("suite", suite, "Suite file")->required();
    suite_cmd->add_flag("--extended", extended, "Include scenarios flagged extended");
    suite_cmd->add_flag("--machine", machine, "Tab-separated output");
    suite_cmd->add_option("-j,--jobs", jobs, "Scenarios solved in parallel");

    auto* export_cmd = app.add_subcommand("export", "Write the assembled program as MPS");
    export_cmd->add_option("config", config, "Scenario configuration")->required();
    export_cmd->add_option("path", mps, "Output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }

    if (*solve_cmd) return cmd_solve(config, out_path, machine, out, err);
    if (*verify_cmd)
        return cmd_verify(config, solution, signals, seed, count, report, gamma_scale, out, err);
    if (*suite_cmd) return cmd_suite(suite, extended, machine, jobs, out, err);
    if (*export_cmd) return cmd_export(config, mps, out, err);
    return exit_code::usage;
}

}  // namespace sfrbid
