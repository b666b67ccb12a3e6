#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lp_oracle.hpp"
#include "setplan/bip.hpp"
#include "test_support.hpp"

using namespace setplan;
using namespace setplan::bip;
using testsupport::CounterRng;
using testsupport::random_program;

namespace {

BinaryProgram two_var_budget() {
    BinaryProgram p;
    int a = p.add_variable("x1");
    int b = p.add_variable("x2");
    p.set_objective(a, Rational(1));
    p.set_objective(b, Rational(1));
    p.add_constraint({"budget", {{a, Rational(1)}, {b, Rational(1)}}, Relation::LessEq,
                      Rational(1)});
    return p;
}

}  // namespace

TEST_CASE("maximize two variables under a unit budget") {
    BinaryProgram p = two_var_budget();
    Assignment a = solve_exact(p);
    CHECK(a.status == SolveStatus::Optimal);
    CHECK(a.proven);
    CHECK(a.objective == Rational(1));
    // exactly one variable set, tie broken to the lowest index
    CHECK(a.values[0] == 1);
    CHECK(a.values[1] == 0);
}

TEST_CASE("all-negative objective stays at zero") {
    BinaryProgram p;
    for (int i = 0; i < 4; ++i) p.add_variable("n" + std::to_string(i));
    for (int i = 0; i < 4; ++i) p.set_objective(i, Rational(-1, i + 1));
    Assignment a = solve_exact(p);
    CHECK(a.status == SolveStatus::Optimal);
    CHECK(a.objective == Rational(0));
    for (int i = 0; i < 4; ++i) CHECK(a.values[static_cast<std::size_t>(i)] == 0);
}

TEST_CASE("infeasible pair is detected") {
    BinaryProgram p;
    int x = p.add_variable("x");
    p.add_constraint({"one", {{x, Rational(1)}}, Relation::GreaterEq, Rational(1)});
    p.add_constraint({"zero", {{x, Rational(1)}}, Relation::LessEq, Rational(0)});
    Assignment exact = solve_exact(p);
    CHECK(exact.status == SolveStatus::Infeasible);
    Assignment brute = solve_bruteforce(p);
    CHECK(brute.status == SolveStatus::Infeasible);
}

TEST_CASE("brute force basics") {
    BinaryProgram p;
    int x = p.add_variable("x");
    p.set_objective(x, Rational(1));
    Assignment a = solve_bruteforce(p);
    CHECK(a.status == SolveStatus::Optimal);
    CHECK(a.objective == Rational(1));
    CHECK(a.values[0] == 1);
}

TEST_CASE("brute force breaks ties to the lexicographically smallest assignment") {
    BinaryProgram p = two_var_budget();
    Assignment a = solve_bruteforce(p);
    CHECK(a.objective == Rational(1));
    CHECK(a.values == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("brute force refuses oversized programs") {
    BinaryProgram p;
    for (int i = 0; i < 21; ++i) p.add_variable("v" + std::to_string(i));
    CHECK_THROWS_AS(solve_bruteforce(p), Error);
}

TEST_CASE("equality constraints are honored") {
    BinaryProgram p;
    int x = p.add_variable("x");
    int y = p.add_variable("y");
    p.set_objective(x, Rational(3));
    p.set_objective(y, Rational(2));
    p.add_constraint({"eq", {{x, Rational(1)}, {y, Rational(1)}}, Relation::Equal, Rational(1)});
    Assignment a = solve_exact(p);
    CHECK(a.objective == Rational(3));
    CHECK(p.satisfies(a.values));
}

TEST_CASE("random programs: exact solver agrees with brute force") {
    for (int trial = 0; trial < 80; ++trial) {
        CounterRng rng(2024, static_cast<std::uint64_t>(trial), 0);
        int nvars = rng.next_int(1, 12);
        int ncons = rng.next_int(0, 8);
        BinaryProgram p = random_program(rng, nvars, ncons);
        Assignment exact = solve_exact(p);
        Assignment brute = solve_bruteforce(p);
        REQUIRE(exact.status == brute.status);
        if (exact.status == SolveStatus::Optimal) {
            CHECK(exact.objective == brute.objective);
            CHECK(p.satisfies(exact.values));
            CHECK(p.satisfies(brute.values));
        }
        // incumbent trace is non-decreasing
        for (std::size_t j = 1; j < exact.incumbent_trace.size(); ++j)
            CHECK(exact.incumbent_trace[j - 1] <= exact.incumbent_trace[j]);
    }
}

TEST_CASE("node budget yields a flagged result") {
    CounterRng rng(99, 0, 0);
    BinaryProgram p = random_program(rng, 12, 2);
    SolveLimits limits;
    limits.max_nodes = 3;
    Assignment a = solve_exact(p, limits);
    CHECK_FALSE(a.proven);
    CHECK((a.status == SolveStatus::Feasible || a.status == SolveStatus::NoSolution));
}

TEST_CASE("LP export lists every variable in the Binary section") {
    BinaryProgram p = two_var_budget();
    std::string text = export_lp(p);
    CHECK(text.find("Maximize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    auto binary_at = text.find("Binary");
    REQUIRE(binary_at != std::string::npos);
    CHECK(text.find("x1", binary_at) != std::string::npos);
    CHECK(text.find("x2", binary_at) != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("LP export renders rationals with 12+ significant digits") {
    BinaryProgram p;
    int x = p.add_variable("x");
    p.set_objective(x, Rational(1, 3));
    std::string text = export_lp(p);
    CHECK(text.find("0.333333333333") != std::string::npos);
}

TEST_CASE("LP text round-trips through the external-style oracle") {
    for (int trial = 0; trial < 30; ++trial) {
        CounterRng rng(555, static_cast<std::uint64_t>(trial), 0);
        BinaryProgram p = random_program(rng, rng.next_int(1, 10), rng.next_int(0, 6));
        Assignment exact = solve_exact(p);
        lporacle::LpModel parsed = lporacle::parse_lp(export_lp(p));
        lporacle::LpSolveResult ext = lporacle::lp_enumerate_max(parsed);
        REQUIRE(ext.feasible == (exact.status == SolveStatus::Optimal));
        if (ext.feasible)
            CHECK(std::abs(ext.objective - exact.objective.to_double()) < 1e-6);
    }
}

TEST_CASE("returned assignments are feasible when rechecked") {
    for (int trial = 0; trial < 20; ++trial) {
        CounterRng rng(31337, static_cast<std::uint64_t>(trial), 0);
        BinaryProgram p = random_program(rng, rng.next_int(2, 14), rng.next_int(1, 10));
        Assignment a = solve_exact(p);
        if (a.status == SolveStatus::Optimal || a.status == SolveStatus::Feasible)
            CHECK(p.satisfies(a.values));
    }
}
