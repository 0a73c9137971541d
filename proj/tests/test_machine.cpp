#include "ctxmem/machine.hpp"
#include "doctest.h"

using namespace ctxmem;

namespace {

std::vector<int> points(const IncidenceStructure& s, std::initializer_list<const char*> names) {
    std::vector<int> out;
    for (const char* n : names) out.push_back(s.point_by_name(n));
    return out;
}

std::vector<int> sign_ints(const std::vector<Sign>& v) {
    std::vector<int> out;
    for (Sign s : v) out.push_back(to_int(s));
    return out;
}

}  // namespace

TEST_CASE("fixtures load and are bound to their structures") {
    for (const auto& name : fixture_names()) {
        MealyMachine m = fixture(name);
        IncidenceStructure s = structure_for(m);
        CHECK_NOTHROW(m.validate(s));
    }
    CHECK(fixture("square_4").state_count == 4);
    CHECK(fixture("pentagram_4").state_count == 4);
    CHECK(fixture("pentagram_5").state_count == 5);
    CHECK(fixture("doily_6").state_count == 6);
    CHECK_THROWS_AS(fixture("square_17"), Error);
}

TEST_CASE("documented run traces") {
    MealyMachine m = fixture("square_4");
    IncidenceStructure s = structure_for(m);

    RunTrace t1 = run(m, s, 0, points(s, {"C", "c", "gamma"}));
    CHECK(sign_ints(t1.outputs) == std::vector<int>{1, -1, 1});
    CHECK(t1.states.back() == 1);  // S2

    RunTrace t2 = run(m, s, 0, points(s, {"A", "B", "c", "C"}));
    CHECK(sign_ints(t2.outputs) == std::vector<int>{1, 1, 1, -1});

    RunTrace t3 = run(m, s, 2, {});
    CHECK(t3.outputs.empty());
    CHECK(t3.states == std::vector<int>{2});

    CHECK_THROWS_AS(run(m, s, 7, {0}), Error);
    CHECK_THROWS_AS(run(m, s, 0, {42}), Error);

    // trace invariants
    for (size_t i = 0; i < t2.inputs.size(); ++i) {
        CHECK(t2.outputs[i] == m.output[t2.states[i]][t2.inputs[i]]);
        CHECK(t2.states[i + 1] == m.update[t2.states[i]][t2.inputs[i]]);
    }
}

TEST_CASE("vertex classification") {
    MealyMachine m = fixture("square_4");
    IncidenceStructure s = structure_for(m);
    int C = s.point_by_name("C");
    CHECK(classify_vertex(m, 1, C) == VertexClass::simple);     // (S2, C)
    CHECK(classify_vertex(m, 0, C) == VertexClass::nonsimple);  // (S1, C)
    CHECK_THROWS_AS(classify_vertex(m, 9, C), Error);

    MealyMachine lazy;
    lazy.structure_ref = "square";
    lazy.state_count = 2;
    lazy.output.assign(2, std::vector<Sign>(9, Sign::plus));
    lazy.update = {std::vector<int>(9, 0), std::vector<int>(9, 1)};
    for (int st = 0; st < 2; ++st)
        for (int p = 0; p < 9; ++p) CHECK(classify_vertex(lazy, st, p) == VertexClass::simple);
}

TEST_CASE("context classification") {
    MealyMachine m = fixture("square_4");
    IncidenceStructure s = structure_for(m);
    const int last_col = 5;  // {C, c, gamma}
    CHECK(context_class(m, s, 0, last_col).cls == ContextClass::contradiction);
    CHECK(context_class(m, s, 1, last_col).cls == ContextClass::confirmation);
    CHECK(context_class(m, s, 1, last_col).pi == Sign::minus);
    // all-plus outputs on a positive block confirm
    CHECK(context_class(m, s, 0, 0).cls == ContextClass::confirmation);
}

TEST_CASE("memory cost") {
    CHECK(memory_cost(fixture("square_4")) == doctest::Approx(2.0));
    CHECK(memory_cost(fixture("pentagram_5")) == doctest::Approx(2.321928).epsilon(1e-6));
    MealyMachine one;
    one.state_count = 1;
    CHECK(memory_cost(one) == doctest::Approx(0.0));
}

TEST_CASE("machine files round-trip byte-exactly and field-by-field") {
    for (const auto& name : fixture_names()) {
        MealyMachine m = fixture(name);
        std::string text = machine_to_json(m);
        MealyMachine back = machine_from_json(text);
        CHECK(back == m);
        CHECK(machine_to_json(back) == text);
    }
    CHECK_THROWS_AS(machine_from_json("{}"), Error);
    CHECK_THROWS_AS(machine_from_json("{\"format\":\"mealy-machine\",\"structure\":\"square\","
                                      "\"states\":1,\"table\":[[{\"out\":3}]]}"),
                    Error);
}

TEST_CASE("fixture-specific structure facts") {
    // pentagram_5 has exactly ten nonsimple vertices
    MealyMachine p5 = fixture("pentagram_5");
    int nonsimple = 0;
    for (int st = 0; st < p5.state_count; ++st)
        for (int p = 0; p < 10; ++p)
            nonsimple += classify_vertex(p5, st, p) == VertexClass::nonsimple;
    CHECK(nonsimple == 10);

    // doily_6 keeps five pairwise-incompatible points simple with output +1
    MealyMachine d6 = fixture("doily_6");
    IncidenceStructure doily = structure_for(d6);
    std::vector<int> simple_pts =
        points(doily, {"chi11", "chi12", "chi13", "chi20", "chi30"});
    for (size_t i = 0; i < simple_pts.size(); ++i)
        for (size_t j = i + 1; j < simple_pts.size(); ++j)
            CHECK_FALSE(compatible(doily, simple_pts[i], simple_pts[j]));
    for (int st = 0; st < d6.state_count; ++st)
        for (int p : simple_pts) {
            CHECK(classify_vertex(d6, st, p) == VertexClass::simple);
            CHECK(d6.output[st][p] == Sign::plus);
        }
}
