#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Highs.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "sfrbid/lp_model.hpp"

using namespace sfrbid;

namespace {

// max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  0 <= x <= 3,  y >= 0  ->  x = 3, y = 1, obj 11
LinearProgram small_lp() {
    LinearProgram lp;
    lp.sense = ObjectiveSense::Maximize;
    const int x = lp.add_variable("x", 0.0, 3.0, 3.0);
    const int y = lp.add_variable("y", 0.0, kInf, 2.0);
    LinearExpr r1 = LinearExpr::variable(x);
    r1.add_term(y, 1.0);
    lp.add_row("c1", r1, -kInf, 4.0);
    LinearExpr r2 = LinearExpr::variable(x);
    r2.add_term(y, 3.0);
    lp.add_row("c2", r2, -kInf, 6.0);
    return lp;
}

LinearProgram random_lp(std::mt19937_64& rng, int n, int m) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    LinearProgram lp;
    lp.sense = ObjectiveSense::Minimize;
    for (int j = 0; j < n; ++j) lp.add_variable("v" + std::to_string(j), -5.0, 5.0, U(rng));
    for (int i = 0; i < m; ++i) {
        LinearExpr e;
        for (int j = 0; j < n; ++j)
            if (U(rng) > 0.3) e.add_term(j, U(rng));
        const double lo = U(rng) > 0.5 ? -kInf : -2.0 + U(rng);
        lp.add_row("r" + std::to_string(i), e, lo, 2.0 + U(rng));
    }
    return lp;
}

std::string mps_text(const LinearProgram& lp) {
    std::ostringstream out;
    write_mps(lp, out);
    return out.str();
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("sfrbid_test_" + name);
}

}  // namespace

TEST_CASE("linear expressions stay sorted and merged") {
    LinearExpr e;
    e.add_term(5, 1.0);
    e.add_term(2, 2.0);
    e.add_term(5, -1.0);
    e.add_term(7, 1e-15);
    e.add_constant(3.0);
    REQUIRE(e.terms().size() == 2);
    CHECK(e.terms()[0] == Term{2, 2.0});
    e.prune(1e-12);
    REQUIRE(e.terms().size() == 1);
    CHECK(e.evaluate({0, 0, 4.0}) == 11.0);
    LinearExpr f = e.scaled(-2.0);
    f.add(e, 2.0);
    CHECK(f.terms().empty());
    CHECK(f.constant() == 0.0);
}

TEST_CASE("row constants move into the bounds") {
    LinearProgram lp;
    const int x = lp.add_variable("x");
    LinearExpr e = LinearExpr::variable(x, 2.0);
    e.add_constant(1.0);
    lp.add_row("r", e, -kInf, 5.0);
    CHECK(lp.rows()[0].upper == 4.0);
    CHECK(lp.max_violation({2.0}) == 0.0);
    CHECK(lp.max_violation({3.0}) == doctest::Approx(2.0));
}

TEST_CASE("HiGHS backend solves a small LP") {
    const auto backend = make_backend("highs");
    const LpResult r = backend->solve(small_lp(), {});
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(r.x[0] == doctest::Approx(3.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_backend("cplex"), std::invalid_argument);
}

TEST_CASE("infeasible and unbounded programs are reported") {
    const auto backend = make_backend("highs");
    LinearProgram bad;
    bad.sense = ObjectiveSense::Maximize;
    const int g = bad.add_variable("gamma", 1.0, kInf, 1.0);
    LinearExpr e = LinearExpr::variable(g);
    bad.add_row("p_hi", e, -kInf, 0.0);
    CHECK(backend->solve(bad, {}).status == LpStatus::Infeasible);

    LinearProgram open;
    open.sense = ObjectiveSense::Maximize;
    open.add_variable("x", 0.0, kInf, 1.0);
    CHECK(open.num_rows() == 0);
    CHECK(backend->solve(open, {}).status == LpStatus::Unbounded);
}

TEST_CASE("MPS export is byte-stable") {
    std::mt19937_64 rng(31);
    const LinearProgram lp = random_lp(rng, 12, 9);
    const std::string a = mps_text(lp);
    const std::string b = mps_text(lp);
    CHECK(a == b);
    std::mt19937_64 rng2(31);
    CHECK(mps_text(random_lp(rng2, 12, 9)) == a);
}

TEST_CASE("MPS round trip through an independent reader") {
    std::mt19937_64 rng(37);
    const auto backend = make_backend("highs");
    int compared = 0;
    for (int trial = 0; trial < 10; ++trial) {
        LinearProgram lp = random_lp(rng, 8 + trial, 6 + trial);
        if (trial % 2) lp.sense = ObjectiveSense::Maximize;
        const auto path = temp_file("roundtrip_" + std::to_string(trial) + ".mps");
        write_mps_file(lp, path.string());

        Highs reader;
        reader.setOptionValue("output_flag", false);
        REQUIRE(reader.readModel(path.string()) == HighsStatus::kOk);
        CHECK(reader.getNumRow() == static_cast<int>(lp.num_rows()));
        CHECK(reader.getNumCol() == static_cast<int>(lp.num_variables()));
        CHECK(reader.getNumNz() == static_cast<int>(lp.num_nonzeros()));
        REQUIRE(reader.run() == HighsStatus::kOk);

        const LpResult ours = backend->solve(lp, {});
        const bool reader_optimal = reader.getModelStatus() == HighsModelStatus::kOptimal;
        CHECK(reader_optimal == (ours.status == LpStatus::Optimal));
        if (reader_optimal && ours.status == LpStatus::Optimal) {
            const double theirs = reader.getInfo().objective_function_value;
            CHECK(std::abs(theirs - ours.objective) <= 1e-6 * std::max(1.0, std::abs(theirs)));
            ++compared;
        }
        std::filesystem::remove(path);
    }
    CHECK(compared > 0);
}
