#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctxmem/cnf.hpp"
#include "doctest.h"
#include "support/dpll.hpp"

using namespace ctxmem;

namespace {

testsat::Result solve_formula(const CnfFormula& f, std::vector<int8_t>* model = nullptr,
                              uint64_t budget = UINT64_MAX) {
    return testsat::solve(f.n_vars, f.clauses, model, budget);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("the solver itself is sane") {
    // (x1 | x2) & (!x1) & (!x2 | x3)
    CHECK(testsat::solve(3, {{1, 2}, {-1}, {-2, 3}}) == testsat::Result::sat);
    CHECK(testsat::solve(1, {{1}, {-1}}) == testsat::Result::unsat);
    CHECK(testsat::solve(2, {{1, 2}, {1, -2}, {-1, 2}, {-1, -2}}) == testsat::Result::unsat);
}

TEST_CASE("square 3-state CNF is satisfiable and decodes to a verified machine") {
    IncidenceStructure s = build_structure("square");
    CnfFormula f = build_cnf(s, PredictionSet::Ia_II, 3);
    std::vector<int8_t> model;
    REQUIRE(solve_formula(f, &model) == testsat::Result::sat);

    std::vector<bool> bits(model.size());
    for (size_t i = 0; i < model.size(); ++i) bits[i] = model[i] > 0;
    MealyMachine m = machine_from_model(f, bits);
    CHECK(check_predictions(m, s, PredictionSet::Ia_II).passed);
}

TEST_CASE("square 2-state CNF is unsatisfiable, matching the backtracker") {
    IncidenceStructure s = build_structure("square");
    CnfFormula f = build_cnf(s, PredictionSet::Ia_II, 2);
    CHECK(solve_formula(f) == testsat::Result::unsat);
    CHECK(find_machine(s, PredictionSet::Ia_II, 2).status == SearchStatus::none_exhausted);
}

TEST_CASE("square (Ia)+(Ib)+(II) CNF agrees with the backtracker at 3 and 4 states") {
    IncidenceStructure s = build_structure("square");
    CHECK(solve_formula(build_cnf(s, PredictionSet::Ia_Ib_II, 3)) == testsat::Result::unsat);

    CnfFormula f4 = build_cnf(s, PredictionSet::Ia_Ib_II, 4);
    std::vector<int8_t> model;
    REQUIRE(solve_formula(f4, &model) == testsat::Result::sat);
    std::vector<bool> bits(model.size());
    for (size_t i = 0; i < model.size(); ++i) bits[i] = model[i] > 0;
    MealyMachine m = machine_from_model(f4, bits);
    CHECK(check_predictions(m, s, PredictionSet::Ia_Ib_II).passed);
}

TEST_CASE("fixtures satisfy their own CNF encodings") {
    // encode without symmetry clauses, then check the fixture's literal
    // assignment satisfies every clause (models <-> passing machines)
    auto fixture_satisfies = [](const char* name, PredictionSet preds) {
        MealyMachine m = fixture(name);
        IncidenceStructure s = structure_for(m);
        CnfFormula f = build_cnf(s, preds, m.state_count, /*symmetry_clauses=*/false);
        // outputs and transitions pin the core variables; auxiliary variables
        // are defined by equivalences, so unit-propagating the core must not
        // produce a conflict, and full solving must stay satisfiable
        std::vector<std::vector<int>> clauses = f.clauses;
        for (int st = 0; st < m.state_count; ++st)
            for (int p = 0; p < s.point_count(); ++p) {
                clauses.push_back({m.output[st][p] == Sign::plus ? f.out_var(st, p)
                                                                 : -f.out_var(st, p)});
                for (int t = 0; t < m.state_count; ++t)
                    clauses.push_back({m.update[st][p] == t ? f.tr_var(st, p, t)
                                                            : -f.tr_var(st, p, t)});
            }
        return testsat::solve(f.n_vars, clauses) == testsat::Result::sat;
    };
    CHECK(fixture_satisfies("square_4", PredictionSet::Ia_Ib_II));
    CHECK(fixture_satisfies("pentagram_4", PredictionSet::Ia_II));
    CHECK(fixture_satisfies("pentagram_5", PredictionSet::Ia_Ib_II));
    CHECK(fixture_satisfies("doily_6", PredictionSet::Ia_II));
}

TEST_CASE("a machine violating the predictions falsifies its CNF") {
    MealyMachine m = fixture("pentagram_4");  // fails (Ib)
    IncidenceStructure s = structure_for(m);
    CnfFormula f = build_cnf(s, PredictionSet::Ia_Ib_II, 4, /*symmetry_clauses=*/false);
    std::vector<std::vector<int>> clauses = f.clauses;
    for (int st = 0; st < 4; ++st)
        for (int p = 0; p < 10; ++p) {
            clauses.push_back(
                {m.output[st][p] == Sign::plus ? f.out_var(st, p) : -f.out_var(st, p)});
            for (int t = 0; t < 4; ++t)
                clauses.push_back(
                    {m.update[st][p] == t ? f.tr_var(st, p, t) : -f.tr_var(st, p, t)});
        }
    CHECK(testsat::solve(f.n_vars, clauses) == testsat::Result::unsat);
}

TEST_CASE("DIMACS export and model decoding round-trip") {
    IncidenceStructure s = build_structure("square");
    CnfFormula f = build_cnf(s, PredictionSet::Ia_II, 3);
    std::string path = "/tmp/ctxmem_test_square3.cnf";
    std::string meta_path = export_cnf(f, path);

    std::string dimacs = slurp(path);
    CHECK(dimacs.find("p cnf " + std::to_string(f.n_vars) + " " +
                      std::to_string(f.clauses.size())) != std::string::npos);

    std::vector<int8_t> model;
    REQUIRE(solve_formula(f, &model) == testsat::Result::sat);
    std::string model_text = "v";
    for (int v = 1; v <= f.n_vars; ++v)
        model_text += std::string(" ") + (model[v] > 0 ? "" : "-") + std::to_string(v);
    model_text += " 0\n";

    MealyMachine m = decode_cnf_model(slurp(meta_path), model_text);
    CHECK(check_predictions(m, s, PredictionSet::Ia_II).passed);
    std::remove(path.c_str());
    std::remove(meta_path.c_str());
}

TEST_CASE("CNF export rejects out-of-range state counts") {
    IncidenceStructure s = build_structure("square");
    CHECK_THROWS_AS(build_cnf(s, PredictionSet::Ia_II, 0), Error);
    CHECK_THROWS_AS(build_cnf(s, PredictionSet::Ia_II, 7), Error);
}
