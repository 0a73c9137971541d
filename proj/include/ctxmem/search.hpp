#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctxmem/verify.hpp"

namespace ctxmem {

enum class SearchStatus { found, none_exhausted, inconclusive };

const char* search_status_name(SearchStatus s);

struct SearchBudget {
    uint64_t max_nodes = 1'000'000'000;  // stage-2 nodes
    int threads = 0;                     // 0 = runtime default
    bool symmetry_breaking = true;
    uint64_t resume_token = 0;  // skip stage-1 first rows below this value
};

struct SearchStats {
    uint64_t stage1_tuples = 0;      // sorted output tuples visited
    uint64_t stage1_candidates = 0;  // tuples entering stage 2
    uint64_t stage2_nodes = 0;
    uint64_t pruned_cover = 0;     // stage-1 pointwise sink-cover rule
    uint64_t pruned_symmetry = 0;  // non-lex-leader tuples
    uint64_t pruned_quota = 0;     // per-state nonsimple quota
    uint64_t pruned_local = 0;     // per-assignment consistency
    uint64_t pruned_block = 0;     // exact block criterion on completion
    uint64_t pruned_point = 0;     // exact per-point (Ib) criterion
    double wall_seconds = 0;
};

struct SearchOutcome {
    SearchStatus status = SearchStatus::inconclusive;
    std::optional<MealyMachine> machine;  // present iff found, re-verified
    SearchStats stats;
    SearchBudget budget;
    uint64_t resume_token = 0;  // first unfinished stage-1 row when inconclusive
};

/// Exhaustive minimal-machine search. Stage 1 enumerates per-state output
/// rows in nondecreasing order, pruned by the sink-cover rule and (when
/// enabled) lex-leader symmetry breaking under the sign-preserving
/// automorphism group x state relabeling. Stage 2 backtracks over
/// transitions with theorem-derived pruning and exact per-block checks.
/// `found` returns the deterministic first machine (smallest output tuple,
/// lexicographically first transitions); `none_exhausted` is only reported
/// after the full symmetry-reduced space was explored.
SearchOutcome find_machine(const IncidenceStructure& s, PredictionSet preds, int states,
                           const SearchBudget& budget = {});

struct CountingBoundsResult {
    bool ruled_out = false;
    int states = 0;
    int per_state_quota = 0;       // minimum multi-sink points per state
    int simple_sink_capacity = 0;  // one simple sink per state
    int required_total = 0;        // states * quota
    int achievable_max = 0;        // best feasible sum of i*x_i
    std::vector<std::string> inequalities;  // instantiated constraint text
};

/// Linear counting argument ruling out (Ia)+(Ib)+(II) machines: per-state
/// quotas computed from the minimal contradiction families and the
/// one-simple-sink-per-state lemma derived from neighborhood covers. Throws
/// when the lemma's premises do not hold for the structure (only the
/// pentagram and doily arguments are encoded) or for other prediction sets.
CountingBoundsResult counting_bounds(const IncidenceStructure& s, PredictionSet preds,
                                     int states);

}  // namespace ctxmem
