#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctxmem/digraph.hpp"

namespace ctxmem {

enum class PredictionSet { Ia_II, Ia_Ib_II };

const char* prediction_set_name(PredictionSet p);          // "ia-ii" / "ia-ib-ii"
const char* prediction_set_display(PredictionSet p);       // "(Ia)+(II)" / ...
std::optional<PredictionSet> prediction_set_from_name(std::string_view name);

/// A replayable witness of a violated prediction: running `inputs` from
/// `start_state` exhibits a violation of the named prediction.
struct Certificate {
    int start_state = 0;
    std::vector<int> inputs;
    std::string violated;      // "Ia", "Ib" or "II"
    std::string witness_note;  // digraph-side context for the reader
};

struct Verdict {
    bool passed = false;
    PredictionSet prediction_set = PredictionSet::Ia_II;
    std::optional<Certificate> certificate;
};

/// Digraph criterion for predictions (Ia) and (II): for every block b,
/// every strongly connected sink of D_b has per-point constant outputs
/// whose product over b equals the block sign, and every vertex from which
/// the sink is reachable agrees with the sink's output on its point.
Verdict check_Ia_II(const MealyMachine& m, const IncidenceStructure& s);

/// Digraph criterion for prediction (Ib): for every point p, every vertex
/// (S',p) reachable from (S,p) in D_p carries the same output.
Verdict check_Ib(const MealyMachine& m, const IncidenceStructure& s);

/// Conjunction of the criteria selected by `preds`.
Verdict check_predictions(const MealyMachine& m, const IncidenceStructure& s,
                          PredictionSet preds);

/// Replays a certificate through `run` and confirms the claimed violation.
bool certificate_replays(const MealyMachine& m, const IncidenceStructure& s,
                         const Certificate& cert);

enum class OracleStatus { passed, failed, inconclusive };

struct OracleResult {
    OracleStatus status = OracleStatus::inconclusive;
    std::optional<Certificate> certificate;
    uint64_t sequences_explored = 0;
    int max_len = 0;
    std::string note;
};

/// Brute-force semantics, independent of the digraph machinery: enumerates
/// every start state and every input sequence of length <= max_len drawn
/// from a single block (checking repeat consistency and first-occurrence
/// products) and, for (Ib), from C(p) for every anchor point p (checking
/// anchor repeats). Returns the shortest, lexicographically smallest
/// counterexample. Never passes silently: an exhausted node budget or a
/// max_len below the block size reports inconclusive.
OracleResult sequence_oracle(const MealyMachine& m, const IncidenceStructure& s,
                             PredictionSet preds, int max_len,
                             uint64_t node_budget = UINT64_MAX,
                             ExecMode mode = ExecMode::parallel);

struct PropositionResult {
    int id = 0;
    std::string statement;
    bool applicable = false;
    bool holds = false;
    uint64_t instances_checked = 0;
    std::string note;
};

struct PropositionReport {
    Verdict ia_ii;
    Verdict ib;
    std::vector<PropositionResult> results;
    bool all_applicable_hold = false;
};

/// Exhaustively checks the structural theorems about commuting digraphs on
/// one machine. Propositions needing (Ia)+(II) or (Ib) are skipped (with a
/// note) when the machine does not satisfy them.
PropositionReport proposition_suite(const MealyMachine& m, const IncidenceStructure& s);

/// Uniform random machine from a documented schedule: outputs are fair
/// signs and updates uniform states drawn from mt19937_64(seed) via masking,
/// so streams are identical across platforms.
MealyMachine random_machine(const IncidenceStructure& s, int state_count, uint64_t seed);

}  // namespace ctxmem
