#pragma once

#include <string>
#include <vector>

#include "ctxmem/geometry.hpp"

namespace ctxmem {

/// A Mealy machine over the points of an incidence structure. States are
/// 0-indexed internally and rendered 1-indexed ("S1"...) in displays and
/// files. Immutable after load; run/classify are pure.
struct MealyMachine {
    std::string structure_ref;
    int state_count = 0;
    std::vector<std::vector<Sign>> output;  // [state][point]
    std::vector<std::vector<int>> update;   // [state][point] -> state

    friend bool operator==(const MealyMachine&, const MealyMachine&) = default;

    /// Totality of output/update over state_count x |points| and valid
    /// transition targets.
    void validate(const IncidenceStructure& s) const;
};

struct RunTrace {
    int start_state = 0;
    std::vector<int> inputs;
    std::vector<Sign> outputs;
    std::vector<int> states;  // length inputs.size() + 1, states[0] == start_state
};

RunTrace run(const MealyMachine& m, const IncidenceStructure& s, int start,
             const std::vector<int>& inputs);

enum class VertexClass { simple, nonsimple };

/// simple iff update(state, point) == state.
VertexClass classify_vertex(const MealyMachine& m, int state, int point);

enum class ContextClass { confirmation, contradiction };

struct ContextInfo {
    ContextClass cls = ContextClass::confirmation;
    Sign pi = Sign::plus;  // product of the state's outputs over the block
};

ContextInfo context_class(const MealyMachine& m, const IncidenceStructure& s, int state,
                          int block);

const std::vector<std::string>& fixture_names();

/// Embedded machines: square_4, pentagram_4, pentagram_5, doily_6. Each is
/// parsed from data and validated at load, so a transcription error fails
/// loudly.
MealyMachine fixture(std::string_view name);

/// Structure a fixture or machine file is bound to.
IncidenceStructure structure_for(const MealyMachine& m);

/// log2(state_count) in bits.
double memory_cost(const MealyMachine& m);

/// Machine file format (JSON text): per-state arrays of {"out", "next"}
/// entries in canonical point order; "next" is the 1-indexed target and is
/// omitted for simple vertices.
std::string machine_to_json(const MealyMachine& m);
MealyMachine machine_from_json(const std::string& text);

}  // namespace ctxmem
