#include "ctxmem/machine.hpp"

#include <cmath>

#include "json.hpp"

namespace ctxmem {

void MealyMachine::validate(const IncidenceStructure& s) const {
    if (state_count < 1) throw Error("machine needs at least one state");
    const size_t np = size_t(s.point_count());
    if (output.size() != size_t(state_count) || update.size() != size_t(state_count))
        throw Error("output/update tables must cover every state");
    for (int st = 0; st < state_count; ++st) {
        if (output[st].size() != np || update[st].size() != np)
            throw Error("output/update tables must cover every point");
        for (int t : update[st])
            if (t < 0 || t >= state_count)
                throw Error("transition target out of range in state S" + std::to_string(st + 1));
    }
}

RunTrace run(const MealyMachine& m, const IncidenceStructure& s, int start,
             const std::vector<int>& inputs) {
    if (start < 0 || start >= m.state_count) throw Error("invalid start state");
    RunTrace t;
    t.start_state = start;
    t.inputs = inputs;
    t.states.push_back(start);
    int cur = start;
    for (int p : inputs) {
        if (p < 0 || p >= s.point_count()) throw Error("invalid point id in input sequence");
        t.outputs.push_back(m.output[cur][p]);
        cur = m.update[cur][p];
        t.states.push_back(cur);
    }
    return t;
}

VertexClass classify_vertex(const MealyMachine& m, int state, int point) {
    if (state < 0 || state >= m.state_count) throw Error("invalid state id");
    if (point < 0 || point >= int(m.update[state].size())) throw Error("invalid point id");
    return m.update[state][point] == state ? VertexClass::simple : VertexClass::nonsimple;
}

ContextInfo context_class(const MealyMachine& m, const IncidenceStructure& s, int state,
                          int block) {
    if (state < 0 || state >= m.state_count) throw Error("invalid state id");
    if (block < 0 || block >= s.block_count()) throw Error("invalid block id");
    ContextInfo info;
    info.pi = Sign::plus;
    for (int p : s.blocks[block]) info.pi = info.pi * m.output[state][p];
    info.cls = info.pi == s.block_signs[block] ? ContextClass::confirmation
                                               : ContextClass::contradiction;
    return info;
}

IncidenceStructure structure_for(const MealyMachine& m) {
    return build_structure(m.structure_ref);
}

double memory_cost(const MealyMachine& m) { return std::log2(double(m.state_count)); }

std::string machine_to_json(const MealyMachine& m) {
    nlohmann::ordered_json j;
    j["format"] = "mealy-machine";
    j["structure"] = m.structure_ref;
    j["states"] = m.state_count;
    j["table"] = nlohmann::ordered_json::array();
    for (int st = 0; st < m.state_count; ++st) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (size_t p = 0; p < m.output[st].size(); ++p) {
            nlohmann::ordered_json cell;
            cell["out"] = to_int(m.output[st][p]);
            if (m.update[st][p] != st) cell["next"] = m.update[st][p] + 1;
            row.push_back(cell);
        }
        j["table"].push_back(row);
    }
    return j.dump(2) + "\n";
}

MealyMachine machine_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("machine file is not valid JSON: ") + e.what());
    }
    MealyMachine m;
    try {
        if (j.value("format", "") != "mealy-machine")
            throw Error("missing or wrong \"format\" field");
        m.structure_ref = j.at("structure").get<std::string>();
        m.state_count = j.at("states").get<int>();
        int st = 0;
        for (const auto& row : j.at("table")) {
            std::vector<Sign> outs;
            std::vector<int> ups;
            for (const auto& cell : row) {
                outs.push_back(sign_from_int(cell.at("out").get<int>()));
                ups.push_back(cell.contains("next") ? cell.at("next").get<int>() - 1 : st);
            }
            m.output.push_back(std::move(outs));
            m.update.push_back(std::move(ups));
            ++st;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed machine file: ") + e.what());
    }
    m.validate(structure_for(m));
    return m;
}

}  // namespace ctxmem
