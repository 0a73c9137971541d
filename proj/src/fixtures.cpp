#include <cctype>

#include "ctxmem/machine.hpp"

namespace ctxmem {

namespace {

// One cell per point in canonical point order: a sign, optionally followed
// by the 1-indexed target state of a nonsimple transition ("+" stays put,
// "+2" moves to S2). This mirrors the usual tabular presentation of these
// machines.
struct FixtureData {
    const char* name;
    const char* structure;
    std::vector<const char*> states;
};

const std::vector<FixtureData>& fixture_table() {
    static const std::vector<FixtureData> fixtures = {
        {"square_4",
         "square",
         {
             "+ + +2  + + +3  +  +  +",
             "+ + +   - + -   -4 +1 +",
             "+ - -   + + +   +1 -4 +",
             "+ - -3  - + -2  -  -  +",
         }},
        {"pentagram_4",
         "pentagram",
         {
             "+ + + +2 +3  +  +  + + +",
             "+ + + +  -   -4 +1 + + +",
             "+ + + -  +   +1 -4 + + -",
             "+ + + -3 -2  -  -  + + -",
         }},
        {"pentagram_5",
         "pentagram",
         {
             "+4 + +  + +3  +  + + + +",
             "+4 + -  + -   -  + + + -5",
             "-  + +1 + +   +  + + + -5",
             "+  + +1 + -   -2 + + + +",
             "-  + -  + +3  -2 + + + -",
         }},
        {"doily_6",
         "doily",
         {
             "+ +  +   +  + + +  + +4 +5 +6  + +5 +3 +4",
             "- -  -   -  + + +  + -3 -6 -5  + -6 -4 -3",
             "- +1 -2  -2 + + +  + -  +5 +6  + -6 +  - ",
             "+ -2 +1  +1 + + +  + +  -6 -5  + +5 -  + ",
             "+ +1 -2  +1 + + +  + +4 +  -   + +  -4 -3",
             "- -2 +1  -2 + + +  + -3 -  +   + -  +3 +4",
         }},
    };
    return fixtures;
}

MealyMachine parse_fixture(const FixtureData& data) {
    MealyMachine m;
    m.structure_ref = data.structure;
    m.state_count = static_cast<int>(data.states.size());
    for (int st = 0; st < m.state_count; ++st) {
        std::vector<Sign> outs;
        std::vector<int> ups;
        const char* c = data.states[st];
        while (*c) {
            while (*c == ' ') ++c;
            if (!*c) break;
            if (*c != '+' && *c != '-')
                throw Error(std::string("bad fixture cell in ") + data.name);
            Sign sg = *c == '+' ? Sign::plus : Sign::minus;
            ++c;
            int target = st;
            if (std::isdigit(static_cast<unsigned char>(*c))) {
                target = 0;
                while (std::isdigit(static_cast<unsigned char>(*c))) target = 10 * target + (*c++ - '0');
                --target;  // to 0-indexed
            }
            outs.push_back(sg);
            ups.push_back(target);
        }
        m.output.push_back(std::move(outs));
        m.update.push_back(std::move(ups));
    }
    return m;
}

// A transcription slip would almost surely break one of these.
void check_fixture_invariants(const MealyMachine& m, const IncidenceStructure& s,
                              std::string_view name) {
    for (int st = 0; st < m.state_count; ++st) {
        int contradictions = 0;
        for (int b = 0; b < s.block_count(); ++b) {
            ContextInfo info = context_class(m, s, st, b);
            if (info.cls != ContextClass::contradiction) continue;
            ++contradictions;
            if (name != "doily_6") {
                int nonsimple = 0;
                for (int p : s.blocks[b])
                    if (classify_vertex(m, st, p) == VertexClass::nonsimple) ++nonsimple;
                if (nonsimple < 2)
                    throw Error(std::string(name) + ": contradiction context (S" +
                                std::to_string(st + 1) + ", block " + std::to_string(b) +
                                ") has fewer than 2 nonsimple vertices");
            }
        }
        if (contradictions == 0)
            throw Error(std::string(name) + ": state S" + std::to_string(st + 1) +
                        " has no contradiction context");
        if (name == "doily_6") {
            int nonsimple = 0;
            for (int p = 0; p < s.point_count(); ++p)
                if (classify_vertex(m, st, p) == VertexClass::nonsimple) ++nonsimple;
            if (nonsimple < 5)
                throw Error(std::string(name) + ": state S" + std::to_string(st + 1) +
                            " has fewer than 5 nonsimple vertices");
        }
    }
}

}  // namespace

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& f : fixture_table()) v.push_back(f.name);
        return v;
    }();
    return names;
}

MealyMachine fixture(std::string_view name) {
    for (const auto& f : fixture_table()) {
        if (name != f.name) continue;
        MealyMachine m = parse_fixture(f);
        IncidenceStructure s = build_structure(m.structure_ref);
        m.validate(s);
        check_fixture_invariants(m, s, name);
        return m;
    }
    throw Error("unknown fixture '" + std::string(name) + "'");
}

}  // namespace ctxmem
