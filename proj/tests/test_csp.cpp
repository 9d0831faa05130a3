#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "aqs/csp.hpp"
#include "aqs/io.hpp"
#include "oracles.hpp"

using namespace aqs;

namespace {
CspInstance tiny_with_nogood() {
    CspInstance ins;
    ins.d = 2;
    ins.n_ab = 3;
    ins.k = 2;
    ins.constraints.push_back({{0, 1}, {{1, 1}}});
    return ins;
}
} // namespace

TEST_CASE("satisfies: no constraints means everything satisfies") {
    CspInstance ins;
    ins.d = 2;
    ins.n_ab = 4;
    ins.k = 1;
    CHECK(satisfies(ins, 4, {0, 1, 0, 1}));
    CHECK(satisfies(ins, 2, {1, 1}));
}

TEST_CASE("satisfies: direct nogood hit") {
    auto ins = tiny_with_nogood();
    CHECK_FALSE(satisfies(ins, 3, {1, 1, 0}));
    CHECK(satisfies(ins, 3, {1, 0, 0}));
    // constraint not inside the prefix: ignored
    CHECK(satisfies(ins, 1, {1}));
}

TEST_CASE("satisfies: dimension mismatch raises input_error") {
    auto ins = tiny_with_nogood();
    CHECK_THROWS_AS(satisfies(ins, 2, {1, 1, 0}), input_error);
    CHECK_THROWS_AS(satisfies(ins, 5, {1, 1, 0, 0, 0}), input_error);
}

TEST_CASE("satisfies agrees with a clause-by-clause CNF evaluator") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        auto ins = generate_random_ksat(10, 42, 3, seed);
        for (std::uint64_t idx = 0; idx < 1024; ++idx) {
            const auto x = assignment_of_index(idx, 2, 10);
            CHECK(satisfies(ins, 10, x) == oracle::cnf_satisfied(ins, x));
        }
    }
}

TEST_CASE("satisfies is monotone under added constraints") {
    auto ins = generate_random_ksat(8, 20, 3, 77);
    auto more = ins;
    more.constraints.push_back({{2, 5, 7}, {{1, 0, 1}}});
    for (std::uint64_t idx = 0; idx < 256; ++idx) {
        const auto x = assignment_of_index(idx, 2, 8);
        if (!satisfies(ins, 8, x)) CHECK_FALSE(satisfies(more, 8, x));
    }
}

TEST_CASE("generate_random_ksat basics") {
    auto empty = generate_random_ksat(3, 0, 3, 1);
    CHECK(empty.nogood_count() == 0);
    CHECK(beta_of(empty) == 0.0);

    auto a = generate_random_ksat(10, 42, 3, 7);
    auto b = generate_random_ksat(10, 42, 3, 7);
    CHECK(instance_to_json(a).dump() == instance_to_json(b).dump());
    CHECK(a.nogood_count() == 42);
    CHECK(beta_of(a) == doctest::Approx(4.2));

    for (const auto& c : a.constraints) {
        CHECK(c.vars.size() == 3);
        CHECK(c.nogoods.size() == 1);
    }
    CHECK_THROWS_AS(generate_random_ksat(2, 1, 3, 0), input_error);
}

TEST_CASE("read_dimacs basics") {
    {
        std::istringstream in("p cnf 2 1\n1 -2 0\n");
        auto ins = read_dimacs(in);
        REQUIRE(ins.constraints.size() == 1);
        CHECK(ins.n_ab == 2);
        CHECK(ins.constraints[0].vars == std::vector<int>{0, 1});
        REQUIRE(ins.constraints[0].nogoods.size() == 1);
        CHECK(ins.constraints[0].nogoods[0] == std::vector<std::uint8_t>{0, 1});
    }
    {
        std::istringstream in("c empty formula\np cnf 1 0\n");
        auto ins = read_dimacs(in);
        CHECK(ins.constraints.empty());
        auto bitmap = satisfying_bitmap(ins, 1);
        CHECK(bitmap[0] + bitmap[1] == 2); // M over one variable = 2
    }
}

TEST_CASE("read_dimacs error paths carry line numbers") {
    {
        std::istringstream in("p dnf 2 1\n1 -2 0\n");
        CHECK_THROWS_AS(read_dimacs(in), parse_error);
    }
    {
        std::istringstream in("p cnf 2 1\n1 -3 0\n");
        try {
            read_dimacs(in);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line == 2);
        }
    }
    {
        std::istringstream in("p cnf 2 1\n1 -2\n");
        CHECK_THROWS_AS(read_dimacs(in), parse_error);
    }
    {
        std::istringstream in("1 2 0\n");
        CHECK_THROWS_AS(read_dimacs(in), parse_error);
    }
}

TEST_CASE("read_dimacs tolerates comments, blank lines, tautologies, duplicates") {
    std::istringstream in(
        "c header comment\n"
        "\n"
        "p cnf 3 3\n"
        "1 1 -2 0\n"
        "2 -2 3 0\n"
        "c mid comment\n"
        "-1 -3 0\n"
        "%\n"
        "0\n");
    auto ins = read_dimacs(in);
    REQUIRE(ins.constraints.size() == 3);
    CHECK(ins.constraints[0].vars == std::vector<int>{0, 1}); // duplicate literal folded
    CHECK(ins.constraints[1].nogoods.empty());                // tautology: no falsifier
    CHECK(ins.nogood_count() == 2);
}

TEST_CASE("census on the zero-constraint instance") {
    CspInstance ins;
    ins.d = 2;
    ins.n_ab = 4;
    ins.k = 1;
    auto cen = census(ins, {2, 2});
    CHECK(cen.m_a == 4);
    CHECK(cen.m_ab == 16);
    CHECK(cen.m_a_s == 4);
    CHECK(cen.m_a_ns == 0);
    for (const auto& [a, ext] : cen.m_b_given) CHECK(ext == 4);
}

TEST_CASE("census of a pinned single-solution instance") {
    // unit clauses force x = (1,0,1,1)
    CspInstance ins;
    ins.d = 2;
    ins.n_ab = 4;
    ins.k = 1;
    ins.constraints.push_back({{0}, {{0}}});
    ins.constraints.push_back({{1}, {{1}}});
    ins.constraints.push_back({{2}, {{0}}});
    ins.constraints.push_back({{3}, {{0}}});
    auto cen = census(ins, {2, 2});
    CHECK(cen.m_ab == 1);
    CHECK(cen.m_a_s == 1);
    CHECK(cen.m_a == 1);
}

TEST_CASE("census matches the backtracking counter") {
    int checked = 0;
    for (int n : {6, 8, 10, 12}) {
        for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
            auto ins = generate_random_ksat(n, static_cast<int>(2.0 * n), 3, seed);
            const int n_a = n / 2;
            auto cen = census(ins, {n_a, n - n_a});
            auto ref = oracle::backtrack_census(ins, n_a);
            CHECK(cen.m_a == ref.m_a);
            CHECK(cen.m_ab == ref.m_ab);
            CHECK(cen.m_a_s == ref.m_a_s);
            CHECK(cen.m_a_ns == ref.m_a_ns);
            REQUIRE(cen.m_b_given.size() == ref.extensions.size());
            for (const auto& [a, ext] : cen.m_b_given) {
                REQUIRE(ref.extensions.count(a) == 1);
                CHECK(ref.extensions.at(a) == ext);
            }
            // structural invariants
            CHECK(cen.m_a_s + cen.m_a_ns == cen.m_a);
            std::uint64_t total = 0;
            for (const auto& [a, ext] : cen.m_b_given) total += ext;
            CHECK(total == cen.m_ab);
            ++checked;
        }
    }
    CHECK(checked == 12);
}

TEST_CASE("census respects the enumeration cap") {
    auto ins = generate_random_ksat(10, 10, 3, 1);
    CHECK_THROWS_AS(census(ins, {5, 5}, 512), resource_error);
    CHECK_THROWS_AS(satisfying_bitmap(ins, 10, 512), resource_error);
}

TEST_CASE("census is execution-mode independent") {
    auto ins = generate_random_ksat(10, 30, 3, 4);
    const auto saved = exec_mode();
    set_exec_mode(ExecMode::serial);
    auto s = census(ins, {5, 5});
    set_exec_mode(ExecMode::parallel);
    auto p = census(ins, {5, 5});
    set_exec_mode(saved);
    CHECK(s.m_a == p.m_a);
    CHECK(s.m_ab == p.m_ab);
    CHECK(s.m_b_given == p.m_b_given);
}

TEST_CASE("beta_of counts nogood ground instances") {
    CspInstance ins;
    ins.d = 2;
    ins.n_ab = 8;
    ins.k = 2;
    ins.constraints.push_back({{0, 1}, {{0, 0}, {0, 1}, {1, 0}}});
    ins.constraints.push_back({{2, 3}, {{1, 1}}});
    CHECK(beta_of(ins) == doctest::Approx(0.5));
}

TEST_CASE("uf20-style benchmark: census equals exhaustive enumeration") {
    // A fixed satisfiable 20-variable 3-SAT formula in DIMACS form.
    auto base = generate_random_ksat(20, 86, 3, 424245);
    std::ostringstream cnf;
    cnf << "c uf20-style fixture\np cnf 20 " << base.constraints.size() << "\n";
    for (const auto& c : base.constraints) {
        for (std::size_t i = 0; i < c.vars.size(); ++i)
            cnf << (c.nogoods[0][i] ? -(c.vars[i] + 1) : (c.vars[i] + 1)) << ' ';
        cnf << "0\n";
    }
    std::istringstream in(cnf.str());
    auto ins = read_dimacs(in);
    auto cen = census(ins, {10, 10});

    std::uint64_t brute = 0;
    for (std::uint64_t idx = 0; idx < (1ULL << 20); ++idx) {
        bool ok = true;
        for (const auto& c : ins.constraints) {
            bool hit = true;
            for (std::size_t i = 0; i < c.vars.size(); ++i)
                if (((idx >> c.vars[i]) & 1ULL) != c.nogoods[0][i]) {
                    hit = false;
                    break;
                }
            if (hit) {
                ok = false;
                break;
            }
        }
        if (ok) ++brute;
    }
    CHECK(cen.m_ab == brute);
    CHECK(cen.m_ab >= 1); // satisfiable benchmark
}
