#pragma once

#include <string>
#include <vector>

#include "ctxmem/search.hpp"

namespace ctxmem {

/// A CNF whose models are exactly the k-state machines passing the
/// prediction set, expressed through the digraph criterion with state-level
/// reachability unrolled to k-1 steps. Variables 1..states*|P| are outputs
/// (true = +1), the next states*|P|*states are one-hot transitions,
/// everything above is defined auxiliary structure.
struct CnfFormula {
    std::string structure;
    PredictionSet preds = PredictionSet::Ia_II;
    int states = 0;
    int n_points = 0;
    bool symmetry_clauses = false;
    int n_vars = 0;
    std::vector<std::vector<int>> clauses;

    int out_var(int state, int point) const { return 1 + state * n_points + point; }
    int tr_var(int state, int point, int target) const {
        return 1 + states * n_points + (state * n_points + point) * states + target;
    }
};

CnfFormula build_cnf(const IncidenceStructure& s, PredictionSet preds, int states,
                     bool symmetry_clauses = true);

/// Writes DIMACS plus a .meta.json sidecar describing the variable layout.
/// Returns the meta path.
std::string export_cnf(const CnfFormula& f, const std::string& path);

/// Reads the model back into a machine. `model_text` accepts DIMACS "v"
/// lines or plain whitespace-separated literals.
MealyMachine decode_cnf_model(const std::string& meta_text, const std::string& model_text);

/// Renders a satisfying assignment (indexed by variable, entry 0 unused)
/// into a machine.
MealyMachine machine_from_model(const CnfFormula& f, const std::vector<bool>& model);

}  // namespace ctxmem
