#include "ctxmem/search.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <climits>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ctxmem {

const char* search_status_name(SearchStatus s) {
    switch (s) {
        case SearchStatus::found: return "found";
        case SearchStatus::none_exhausted: return "none_exhausted";
        case SearchStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

using Row = uint16_t;  // output row over <= 15 points, bit set = output -1

struct StructureInfo {
    const IncidenceStructure* s = nullptr;
    int n_points = 0;
    int n_blocks = 0;
    std::vector<uint32_t> block_mask;
    std::vector<int> block_neg;  // 1 when block sign is -1
    std::vector<std::vector<int>> blocks;
    std::vector<std::vector<int>> point_blocks;
    std::vector<std::vector<int>> region;  // C(p) per point, sorted
    std::vector<std::vector<Row>> autom_row_map;  // permuted row per automorphism
    std::vector<uint8_t> row_orbit_min;            // 1 iff the row is minimal in its orbit
    bool block_region_is_block = true;  // C(b) == b for every block
};

StructureInfo make_info(const IncidenceStructure& s, bool symmetry) {
    StructureInfo info;
    info.s = &s;
    info.n_points = s.point_count();
    info.n_blocks = s.block_count();
    info.blocks = s.blocks;
    for (int b = 0; b < info.n_blocks; ++b) {
        uint32_t m = 0;
        for (int p : s.blocks[b]) m |= 1u << p;
        info.block_mask.push_back(m);
        info.block_neg.push_back(s.block_signs[b] == Sign::minus ? 1 : 0);
    }
    for (int p = 0; p < info.n_points; ++p) {
        info.point_blocks.push_back(s.blocks_of_point(p));
        std::vector<int> region;
        for (int q = 0; q < info.n_points; ++q)
            if (compatible(s, p, q)) region.push_back(q);
        info.region.push_back(std::move(region));
    }
    for (int b = 0; b < info.n_blocks; ++b) {
        uint32_t region = ~0u;
        for (int p : s.blocks[b]) region &= compatible_mask(s, p);
        if (region != info.block_mask[b]) info.block_region_is_block = false;
    }
    if (symmetry) {
        AutomorphismGroup g = automorphisms(s, AutomorphismKind::sign_preserving);
        const size_t nrows = size_t(1) << info.n_points;
        for (const auto& perm : g.elements) {
            std::vector<Row> map(nrows);
            for (size_t r = 0; r < nrows; ++r) {
                Row out = 0;
                for (int p = 0; p < info.n_points; ++p)
                    if ((r >> p) & 1u) out |= Row(1u << perm[p]);
                map[r] = out;
            }
            info.autom_row_map.push_back(std::move(map));
        }
        info.row_orbit_min.assign(nrows, 1);
        for (size_t r = 0; r < nrows; ++r)
            for (const auto& map : info.autom_row_map)
                if (map[r] < Row(r)) {
                    info.row_orbit_min[r] = 0;
                    break;
                }
    }
    return info;
}

int row_block_violated(const StructureInfo& info, Row r, int b) {
    return (std::popcount(uint32_t(r) & info.block_mask[b]) & 1) != info.block_neg[b];
}

// Pointwise sink-cover rule: on every block, each violating row must agree,
// point by point, with some confirming row (sink outputs are confirming
// rows, and every vertex must reach a sink matching its own output).
bool cover_ok(const StructureInfo& info, const std::vector<Row>& rows) {
    for (int b = 0; b < info.n_blocks; ++b) {
        uint32_t mask = info.block_mask[b];
        bool any_violating = false;
        for (Row r : rows)
            if (row_block_violated(info, r, b)) {
                any_violating = true;
                break;
            }
        if (!any_violating) continue;
        for (Row r : rows) {
            if (!row_block_violated(info, r, b)) continue;
            uint32_t uncovered = mask;
            for (Row c : rows) {
                if (row_block_violated(info, c, b)) continue;
                uncovered &= (uint32_t(r) ^ uint32_t(c)) & mask;
                if (!uncovered) break;
            }
            if (uncovered) return false;
        }
    }
    return true;
}

// lex-leader under (sign-preserving automorphisms) x (state relabeling):
// rows are kept sorted, so it suffices that no automorphism produces a
// strictly smaller sorted tuple.
bool is_lex_leader(const StructureInfo& info, const std::vector<Row>& rows) {
    std::vector<Row> image(rows.size());
    for (const auto& map : info.autom_row_map) {
        for (size_t i = 0; i < rows.size(); ++i) image[i] = map[rows[i]];
        std::sort(image.begin(), image.end());
        if (std::lexicographical_compare(image.begin(), image.end(), rows.begin(), rows.end()))
            return false;
    }
    return true;
}

// minimum number of points hitting every block of `family` at least twice
int min_double_cover(const StructureInfo& info, const std::vector<int>& family) {
    uint32_t involved = 0;
    for (int b : family) involved |= info.block_mask[b];
    std::vector<int> pts;
    for (int p = 0; p < info.n_points; ++p)
        if ((involved >> p) & 1u) pts.push_back(p);

    int best = INT_MAX;
    // DFS over point subsets, bounded by the best found so far
    std::vector<int> chosen;
    auto deficient = [&](uint32_t set) {
        for (int b : family)
            if (std::popcount(set & info.block_mask[b]) < 2) return b;
        return -1;
    };
    auto dfs = [&](auto&& self, uint32_t set, size_t next, int count) -> void {
        if (count >= best) return;
        int b = deficient(set);
        if (b < 0) {
            best = count;
            return;
        }
        for (size_t i = next; i < pts.size(); ++i) {
            uint32_t bit = 1u << pts[i];
            if (set & bit) continue;
            if (!(info.block_mask[b] & bit)) continue;  // extend towards the deficient block
            self(self, set | bit, i + 1, count + 1);
        }
    };
    dfs(dfs, 0, 0, 0);
    return best;
}

// ---------------------------------------------------------------------------
// stage 2: transition assignment for a fixed output tuple

struct Stage2 {
    const StructureInfo& info;
    PredictionSet preds;
    int k;
    const std::vector<Row>& rows;
    std::vector<std::vector<Sign>> output;    // [state][point]
    std::vector<std::vector<int>> update;     // [state][point], -1 unassigned
    std::vector<int> quota;                   // per-state nonsimple minimum
    std::vector<int> nonsimple_count;         // per state
    std::vector<int> unassigned_count;        // per state
    std::vector<std::vector<int>> block_left;  // [state][block] unassigned cells
    std::vector<int> block_cells_left;         // [block]
    std::vector<int> point_cells_left;         // [point] (over C(p) columns)
    std::vector<std::pair<int, int>> cells;    // assignment order
    std::vector<uint32_t> violated_union;      // per state: points on violated blocks
    std::vector<int> useful_nonsimple;         // per state: nonsimple inside that union
    std::vector<int> unassigned_in_union;      // per state: free cells inside that union
    int nonsimple_cap = INT_MAX;               // deepening rung
    int nonsimple_total = 0;
    int quota_deficit = 0;  // sum over states of max(0, quota - useful_nonsimple)
    uint64_t nodes = 0;
    uint64_t node_limit = 0;
    SearchStats* stats = nullptr;
    bool aborted = false;

    Stage2(const StructureInfo& in, PredictionSet pr, int states, const std::vector<Row>& rws,
           const std::vector<int>& quotas, uint64_t limit, SearchStats* st)
        : info(in), preds(pr), k(states), rows(rws), quota(quotas), node_limit(limit), stats(st) {
        output.assign(k, std::vector<Sign>(info.n_points, Sign::plus));
        for (int s = 0; s < k; ++s)
            for (int p = 0; p < info.n_points; ++p)
                output[s][p] = ((rows[s] >> p) & 1u) ? Sign::minus : Sign::plus;
        update.assign(k, std::vector<int>(info.n_points, -1));
        nonsimple_count.assign(k, 0);
        unassigned_count.assign(k, info.n_points);
        block_left.assign(k, std::vector<int>(info.n_blocks, 0));
        block_cells_left.assign(info.n_blocks, 0);
        point_cells_left.assign(info.n_points, 0);
        for (int b = 0; b < info.n_blocks; ++b) {
            block_cells_left[b] = k * int(info.blocks[b].size());
            for (int s = 0; s < k; ++s) block_left[s][b] = int(info.blocks[b].size());
        }
        for (int p = 0; p < info.n_points; ++p)
            point_cells_left[p] = k * int(info.region[p].size());
        useful_nonsimple.assign(k, 0);
        unassigned_in_union.assign(k, 0);
        violated_union.assign(k, 0);
        for (int s = 0; s < k; ++s) {
            quota_deficit += quota[s];
            for (int b = 0; b < info.n_blocks; ++b)
                if (violated_context(s, b)) violated_union[s] |= info.block_mask[b];
            unassigned_in_union[s] = std::popcount(violated_union[s]);
        }

        // violated blocks first so their forced structure fails fast
        std::vector<int> block_order(info.n_blocks);
        for (int b = 0; b < info.n_blocks; ++b) block_order[b] = b;
        std::stable_sort(block_order.begin(), block_order.end(), [&](int a, int b) {
            auto violated = [&](int blk) {
                for (Row r : rows)
                    if (row_block_violated(info, r, blk)) return 0;
                return 1;
            };
            return violated(a) < violated(b);
        });
        std::vector<bool> seen(info.n_points, false);
        for (int b : block_order)
            for (int p : info.blocks[b])
                if (!seen[p]) {
                    seen[p] = true;
                    for (int s = 0; s < k; ++s) cells.push_back({s, p});
                }
    }

    bool violated_context(int s, int b) const { return row_block_violated(info, rows[s], b); }

    // assign + bookkeeping; returns false when a sound necessary condition
    // already fails
    bool assign(int s, int p, int target) {
        update[s][p] = target;
        if (target != s) {
            ++nonsimple_count[s];
            ++nonsimple_total;
            if ((violated_union[s] >> p) & 1u) {
                if (useful_nonsimple[s]++ < quota[s]) --quota_deficit;
            }
        }
        --unassigned_count[s];
        if ((violated_union[s] >> p) & 1u) --unassigned_in_union[s];
        for (int b : info.point_blocks[p]) {
            --block_left[s][b];
            --block_cells_left[b];
        }
        for (int q : info.region[p]) --point_cells_left[q];
        return true;
    }

    void unassign(int s, int p) {
        int target = update[s][p];
        update[s][p] = -1;
        if (target != s) {
            --nonsimple_count[s];
            --nonsimple_total;
            if ((violated_union[s] >> p) & 1u) {
                if (--useful_nonsimple[s] < quota[s]) ++quota_deficit;
            }
        }
        ++unassigned_count[s];
        if ((violated_union[s] >> p) & 1u) ++unassigned_in_union[s];
        for (int b : info.point_blocks[p]) {
            ++block_left[s][b];
            ++block_cells_left[b];
        }
        for (int q : info.region[p]) ++point_cells_left[q];
    }

    // rule (a): a contradiction context needs >= 2 nonsimple vertices
    bool block_row_feasible(int s, int b) {
        if (!violated_context(s, b)) return true;
        int nonsimple = 0, free_cells = 0;
        for (int p : info.blocks[b]) {
            if (update[s][p] == -1)
                ++free_cells;
            else if (update[s][p] != s)
                ++nonsimple;
        }
        return nonsimple + free_cells >= 2;
    }

    // per-state nonsimple quota from the contradiction families; only
    // vertices on the state's violated blocks can satisfy it
    bool quota_feasible(int s) {
        return useful_nonsimple[s] + unassigned_in_union[s] >= quota[s];
    }

    // a state whose cells on block b are all assigned simple is a guaranteed
    // singleton sink of D_b: it must confirm b, and every assigned vertex
    // that currently reaches it must match its outputs
    bool guaranteed_sink_consistent(int b) {
        const auto& blk = info.blocks[b];
        for (int t = 0; t < k; ++t) {
            bool all_simple = true;
            for (int p : blk)
                if (update[t][p] != t) {
                    all_simple = false;
                    break;
                }
            if (!all_simple) continue;
            if (violated_context(t, b)) return false;
            // states that can reach t using assigned arcs only
            uint32_t can_reach = 1u << t;
            bool grew = true;
            while (grew) {
                grew = false;
                for (int s2 = 0; s2 < k; ++s2) {
                    if ((can_reach >> s2) & 1u) continue;
                    for (int p : blk) {
                        int tgt = update[s2][p];
                        if (tgt >= 0 && ((can_reach >> tgt) & 1u)) {
                            can_reach |= 1u << s2;
                            grew = true;
                            break;
                        }
                    }
                }
            }
            for (int s2 = 0; s2 < k; ++s2) {
                if (s2 == t || !((can_reach >> s2) & 1u)) continue;
                for (int p : blk) {
                    int tgt = update[s2][p];
                    if (tgt < 0) continue;
                    if (!((can_reach >> tgt) & 1u) && tgt != s2) continue;
                    // measuring p at s2 leads towards the sink; outputs must agree
                    if (output[s2][p] != output[t][p]) return false;
                }
            }
        }
        return true;
    }

    // exact criterion for one fully assigned block
    bool block_check(int b) {
        const auto& blk = info.blocks[b];
        // state-level reachability closure
        std::vector<uint32_t> reach(k);
        for (int s = 0; s < k; ++s) {
            reach[s] = 1u << s;
            for (int p : blk)
                if (update[s][p] != s) reach[s] |= 1u << update[s][p];
        }
        for (bool grew = true; grew;) {
            grew = false;
            for (int s = 0; s < k; ++s) {
                uint32_t acc = reach[s];
                for (int t = 0; t < k; ++t)
                    if ((reach[s] >> t) & 1u) acc |= reach[t];
                if (acc != reach[s]) {
                    reach[s] = acc;
                    grew = true;
                }
            }
        }
        auto same_scc = [&](int a, int c) {
            return ((reach[a] >> c) & 1u) && ((reach[c] >> a) & 1u);
        };
        // sinks: SCCs with no arcs leaving
        std::vector<int> sink_id(k, -1);
        int nsinks = 0;
        for (int s = 0; s < k; ++s) {
            bool is_sink = true;
            for (int t = 0; t < k && is_sink; ++t)
                if (((reach[s] >> t) & 1u) && !((reach[t] >> s) & 1u)) is_sink = false;
            if (!is_sink) continue;
            int id = -1;
            for (int t = 0; t < s; ++t)
                if (sink_id[t] >= 0 && same_scc(s, t)) id = sink_id[t];
            sink_id[s] = id >= 0 ? id : nsinks++;
        }
        // (1) constant outputs with the right product on every sink
        for (int s = 0; s < k; ++s) {
            if (sink_id[s] < 0) continue;
            for (int t = s + 1; t < k; ++t)
                if (sink_id[t] == sink_id[s])
                    for (int p : blk)
                        if (output[s][p] != output[t][p]) return false;
            if (violated_context(s, b)) return false;
        }
        // (2) vertices agree with every sink they can reach
        for (int s = 0; s < k; ++s)
            for (int p : blk) {
                int u = update[s][p];
                for (int t = 0; t < k; ++t) {
                    if (sink_id[t] < 0 || !((reach[u] >> t) & 1u)) continue;
                    if (output[s][p] != output[t][p]) return false;
                }
            }
        return true;
    }

    // sound partial (Ib) check: reachability over assigned arcs only grows,
    // so an output mismatch reachable now persists in every completion
    bool point_partial_ok(int q) {
        const auto& region = info.region[q];
        std::vector<uint32_t> reach(k);
        for (int s = 0; s < k; ++s) {
            reach[s] = 1u << s;
            for (int r : region) {
                int t = update[s][r];
                if (t >= 0 && t != s) reach[s] |= 1u << t;
            }
        }
        for (bool grew = true; grew;) {
            grew = false;
            for (int s = 0; s < k; ++s) {
                uint32_t acc = reach[s];
                for (int t = 0; t < k; ++t)
                    if ((reach[s] >> t) & 1u) acc |= reach[t];
                if (acc != reach[s]) {
                    reach[s] = acc;
                    grew = true;
                }
            }
        }
        for (int s = 0; s < k; ++s) {
            if (update[s][q] < 0) continue;
            uint32_t from = reach[update[s][q]];
            for (int t = 0; t < k; ++t)
                if (((from >> t) & 1u) && output[t][q] != output[s][q]) return false;
        }
        return true;
    }

    // exact (Ib) criterion for one point whose C(p) columns are assigned
    bool point_check(int p) {
        const auto& region = info.region[p];
        std::vector<uint32_t> reach(k);
        for (int s = 0; s < k; ++s) {
            reach[s] = 1u << s;
            for (int q : region)
                if (update[s][q] != s) reach[s] |= 1u << update[s][q];
        }
        for (bool grew = true; grew;) {
            grew = false;
            for (int s = 0; s < k; ++s) {
                uint32_t acc = reach[s];
                for (int t = 0; t < k; ++t)
                    if ((reach[s] >> t) & 1u) acc |= reach[t];
                if (acc != reach[s]) {
                    reach[s] = acc;
                    grew = true;
                }
            }
        }
        for (int s = 0; s < k; ++s) {
            uint32_t from = reach[update[s][p]];
            for (int t = 0; t < k; ++t)
                if (((from >> t) & 1u) && output[t][p] != output[s][p]) return false;
        }
        return true;
    }

    bool search(size_t cell_index, MealyMachine& result) {
        if (aborted) return false;
        if (cell_index == cells.size()) {
            MealyMachine m;
            m.structure_ref = info.s->name;
            m.state_count = k;
            m.output = output;
            m.update = update;
            Verdict v = check_predictions(m, *info.s, preds);
            if (!v.passed) return false;
            result = std::move(m);
            return true;
        }
        auto [s, p] = cells[cell_index];
        if (update[s][p] != -1) return search(cell_index + 1, result);  // forced earlier
        // solutions are simple-dense: try staying put before the jumps
        for (int step = 0; step < k; ++step) {
            int target = step == 0 ? s : (step <= s ? step - 1 : step);
            if (++nodes > node_limit) {
                aborted = true;
                return false;
            }
            assign(s, p, target);
            bool ok = nonsimple_total + quota_deficit <= nonsimple_cap;
            if (!ok && stats) ++stats->pruned_quota;
            if (ok)
                for (int b : info.point_blocks[p]) {
                    if (!block_row_feasible(s, b)) {
                        ok = false;
                        if (stats) ++stats->pruned_local;
                        break;
                    }
                }
            if (ok && !quota_feasible(s)) {
                ok = false;
                if (stats) ++stats->pruned_quota;
            }
            if (ok && info.block_region_is_block)
                for (int b : info.point_blocks[p]) {
                    if (!guaranteed_sink_consistent(b)) {
                        ok = false;
                        if (stats) ++stats->pruned_local;
                        break;
                    }
                    if (block_cells_left[b] == 0 && !block_check(b)) {
                        ok = false;
                        if (stats) ++stats->pruned_block;
                        break;
                    }
                }
            if (ok && preds == PredictionSet::Ia_Ib_II)
                for (int q : info.region[p]) {
                    if (!point_partial_ok(q)) {
                        ok = false;
                        if (stats) ++stats->pruned_point;
                        break;
                    }
                }
            if (ok && search(cell_index + 1, result)) return true;
            unassign(s, p);
            if (aborted) return false;
        }
        return false;
    }

    // pre-assignment: when a violated block has exactly two confirming
    // states, both must be singleton sinks, so their cells on the block are
    // simple
    bool force_simple_cells() {
        if (!info.block_region_is_block) return true;
        for (int b = 0; b < info.n_blocks; ++b) {
            std::vector<int> conf, viol;
            for (int s = 0; s < k; ++s)
                (violated_context(s, b) ? viol : conf).push_back(s);
            if (viol.empty()) continue;
            if (conf.size() < 2) return false;
            if (conf.size() == 2) {
                for (int s : conf)
                    for (int p : info.blocks[b])
                        if (update[s][p] == -1) assign(s, p, s);
            }
        }
        // forcing may complete blocks; check them
        for (int b = 0; b < info.n_blocks; ++b)
            if (block_cells_left[b] == 0 && !block_check(b)) return false;
        for (int s = 0; s < k; ++s)
            if (!quota_feasible(s)) return false;
        return true;
    }
};

}  // namespace

SearchOutcome find_machine(const IncidenceStructure& s, PredictionSet preds, int states,
                           const SearchBudget& budget) {
    if (states < 1) throw Error("state count must be >= 1");
    if (states > 6) throw Error("search is capped at 6 states");
    if (s.point_count() > 15) throw Error("search supports at most 15 points");

    auto t0 = std::chrono::steady_clock::now();
    SearchOutcome outcome;
    outcome.budget = budget;

    StructureInfo info = make_info(s, budget.symmetry_breaking);
    const int n_rows = 1 << info.n_points;
    const int k = states;

#ifdef _OPENMP
    if (budget.threads > 0) omp_set_num_threads(budget.threads);
#endif

    // per-row violated-block masks feed the incremental stage-1 prune: a
    // block can carry at most k-2 violating states (it needs two disjoint
    // confirming sinks)
    std::vector<uint32_t> viol_mask(size_t(n_rows), 0);
    for (int r = 0; r < n_rows; ++r)
        for (int b = 0; b < info.n_blocks; ++b)
            if (row_block_violated(info, Row(r), b)) viol_mask[r] |= 1u << b;

    std::atomic<uint64_t> stage1_tuples{0}, stage1_candidates{0}, stage2_nodes{0};
    std::atomic<uint64_t> pruned_cover{0}, pruned_symmetry{0};
    std::atomic<bool> out_of_budget{false};
    std::atomic<bool> found_any{false};
    std::atomic<int> best_first_row{INT_MAX};
    std::atomic<int> first_incomplete_row{n_rows};

    // best = smallest stage-1 tuple admitting a machine
    std::vector<Row> best_tuple;
    MealyMachine best_machine;

    const uint64_t node_limit = budget.max_nodes;

    // iterative deepening: early rungs cap the nonsimple-vertex count near
    // the theorem-derived minimum and restrict each block to one violating
    // state (both hold in the known optimal machines), so witnesses surface
    // quickly; nonexistence claims rest solely on the final unrestricted
    // rung
    struct Rung {
        int delta;
        bool unique_violators;
    };
    std::vector<Rung> rungs;
    if (k <= 3) {
        rungs = {{INT_MAX, false}};
    } else {
        rungs = {{0, true}, {0, false}, {k, false}, {3 * k, false}, {INT_MAX, false}};
    }

    for (const Rung& rung : rungs) {
        if (found_any.load() || out_of_budget.load()) break;
        const int rung_delta = rung.delta;
        const int block_violator_cap = rung.unique_violators ? 1 : k - 2;

#pragma omp parallel
    {
        SearchStats local_stats;
        std::vector<Row> rows(k);
        std::vector<std::array<int8_t, 24>> viol_count(k + 1);
        viol_count[0].fill(0);

        std::map<uint32_t, int> local_quota;  // thread-local memo
        auto local_state_quota = [&](Row r) {
            uint32_t vmask = viol_mask[r];
            auto it = local_quota.find(vmask);
            if (it != local_quota.end()) return it->second;
            std::vector<int> family;
            for (int b = 0; b < info.n_blocks; ++b)
                if ((vmask >> b) & 1u) family.push_back(b);
            int q = family.empty() ? 0 : min_double_cover(info, family);
            local_quota[vmask] = q;
            return q;
        };

        std::vector<int> quotas(k);
        uint64_t tuples = 0, candidates = 0, cover_cut = 0, sym_cut = 0;
        uint64_t enum_steps = 0;
        auto charge_enum = [&] {
            if ((++enum_steps & 0xFFF) == 0) {
                stage2_nodes += 0x1000;
                if (stage2_nodes.load(std::memory_order_relaxed) > node_limit)
                    out_of_budget = true;
            }
        };

        auto process_tuple = [&] {
            ++tuples;
            if (found_any.load(std::memory_order_relaxed)) {
                bool beaten;
#pragma omp critical(search_best)
                beaten = !std::lexicographical_compare(rows.begin(), rows.end(),
                                                       best_tuple.begin(), best_tuple.end());
                if (beaten) return;
            }
            if (!cover_ok(info, rows)) {
                ++cover_cut;
                return;
            }
            if (budget.symmetry_breaking && !is_lex_leader(info, rows)) {
                ++sym_cut;
                return;
            }
            ++candidates;
            int quota_sum = 0;
            for (int i = 0; i < k; ++i) {
                quotas[i] = local_state_quota(rows[i]);
                quota_sum += quotas[i];
            }
            uint64_t used = stage2_nodes.load(std::memory_order_relaxed);
            uint64_t left = node_limit > used ? node_limit - used : 0;
            Stage2 stage2(info, preds, k, rows, quotas, left, &local_stats);
            stage2.nonsimple_cap =
                rung_delta == INT_MAX ? INT_MAX : quota_sum + rung_delta;
            MealyMachine m;
            bool ok = stage2.force_simple_cells() && stage2.search(0, m);
            stage2_nodes += stage2.nodes;
            if (stage2.aborted) out_of_budget = true;
            if (ok) {
#pragma omp critical(search_best)
                {
                    if (!found_any.load() ||
                        std::lexicographical_compare(rows.begin(), rows.end(),
                                                     best_tuple.begin(), best_tuple.end())) {
                        best_tuple = rows;
                        best_machine = std::move(m);
                        found_any = true;
                        int cur = best_first_row.load();
                        while (int(rows[0]) < cur &&
                               !best_first_row.compare_exchange_weak(cur, int(rows[0]))) {
                        }
                    }
                }
            }
        };

        // recursive enumeration of nondecreasing row tuples with the
        // per-block violator cap
        auto enumerate = [&](auto&& self, int depth) -> void {
            if (out_of_budget) return;
            if (depth == k) {
                process_tuple();
                return;
            }
            Row from = rows[depth - 1];
            for (int r = from; r < n_rows; ++r) {
                charge_enum();
                uint32_t vm = viol_mask[r];
                viol_count[depth + 1] = viol_count[depth];
                bool over = false;
                for (int b = 0; b < info.n_blocks && !over; ++b)
                    if ((vm >> b) & 1u) {
                        if (++viol_count[depth + 1][b] > block_violator_cap) over = true;
                    }
                if (over) continue;
                rows[depth] = Row(r);
                self(self, depth + 1);
                if (out_of_budget) return;
            }
        };

#pragma omp for schedule(dynamic)
        for (int r0 = int(budget.resume_token); r0 < n_rows; ++r0) {
            if (!out_of_budget && r0 <= best_first_row.load(std::memory_order_relaxed) &&
                !(budget.symmetry_breaking && !info.row_orbit_min[size_t(r0)])) {
                uint32_t vm = viol_mask[r0];
                viol_count[1].fill(0);
                bool over = false;
                for (int b = 0; b < info.n_blocks && !over; ++b)
                    if ((vm >> b) & 1u) {
                        viol_count[1][b] = 1;
                        if (1 > block_violator_cap) over = true;
                    }
                if (!over) {
                    rows[0] = Row(r0);
                    if (k == 1)
                        process_tuple();
                    else
                        enumerate(enumerate, 1);
                }
            }
            if (out_of_budget) {
                int cur = first_incomplete_row.load();
                while (r0 < cur && !first_incomplete_row.compare_exchange_weak(cur, r0)) {
                }
            }
        }

#pragma omp critical(search_stats)
        {
            stage1_tuples += tuples;
            stage1_candidates += candidates;
            pruned_cover += cover_cut;
            pruned_symmetry += sym_cut;
            outcome.stats.pruned_quota += local_stats.pruned_quota;
            outcome.stats.pruned_local += local_stats.pruned_local;
            outcome.stats.pruned_block += local_stats.pruned_block;
            outcome.stats.pruned_point += local_stats.pruned_point;
        }
    }
    }  // rung ladder

    outcome.stats.stage1_tuples = stage1_tuples;
    outcome.stats.stage1_candidates = stage1_candidates;
    outcome.stats.stage2_nodes = stage2_nodes;
    outcome.stats.pruned_cover = pruned_cover;
    outcome.stats.pruned_symmetry = pruned_symmetry;

    if (found_any) {
        // found machines are re-verified before being returned
        Verdict v = check_predictions(best_machine, s, preds);
        if (!v.passed) throw Error("internal error: found machine failed re-verification");
        outcome.status = SearchStatus::found;
        outcome.machine = best_machine;
    } else if (out_of_budget) {
        outcome.status = SearchStatus::inconclusive;
        outcome.resume_token = uint64_t(first_incomplete_row.load());
    } else {
        outcome.status = SearchStatus::none_exhausted;
    }
    outcome.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return outcome;
}

CountingBoundsResult counting_bounds(const IncidenceStructure& s, PredictionSet preds,
                                     int states) {
    if (preds != PredictionSet::Ia_Ib_II)
        throw Error("counting_bounds only encodes the (Ia)+(Ib)+(II) argument");
    if (states < 3) throw Error("counting_bounds needs at least 3 states");

    StructureInfo info = make_info(s, false);

    // per-state quota: cheapest multi-sink point demand over the minimal
    // contradiction families
    auto families = minimal_contradiction_sets(s);
    int quota = INT_MAX;
    for (const auto& [size, sets] : families)
        for (const auto& family : sets)
            quota = std::min(quota, min_double_cover(info, family));
    if (quota == INT_MAX || quota <= 0) throw Error("no contradiction families found");

    // one-simple-sink-per-state lemma: two simple sinks would leave fewer
    // than `quota` nonsimple vertices
    int worst_uncovered = 0;
    for (int p = 0; p < s.point_count(); ++p)
        for (int q = p + 1; q < s.point_count(); ++q)
            worst_uncovered =
                std::max(worst_uncovered, s.point_count() - neighborhood_cover(s, p, q));
    if (worst_uncovered >= quota)
        throw Error("one-simple-sink lemma does not apply to structure '" + s.name +
                    "': a pair of points leaves " + std::to_string(worst_uncovered) +
                    " points uncovered but the per-state quota is only " + std::to_string(quota));

    CountingBoundsResult res;
    res.states = states;
    res.per_state_quota = quota;
    res.simple_sink_capacity = states;
    res.required_total = states * quota;

    // x_i = number of multi-sink points with exactly i states in no sink;
    // i ranges over 1..states-2 since each multi-sink point keeps at least
    // two states inside sinks
    const int imax = states - 2;
    auto msimple = [](int states_in_sinks) {
        if (states_in_sinks == 2) return 2;  // two singleton sinks
        if (states_in_sinks == 3) return 1;  // at least one singleton
        return 0;
    };

    {
        std::string lhs;
        for (int i = 1; i <= imax; ++i)
            lhs += (i > 1 ? " + " : "") + (i > 1 ? std::to_string(i) + "*x" + std::to_string(i)
                                                 : "x1");
        res.inequalities.push_back(lhs + " >= " + std::to_string(res.required_total) +
                                   "   (each of " + std::to_string(states) + " states misses " +
                                   std::to_string(quota) + " multi-sink points)");
        std::string cap;
        bool first = true;
        for (int i = 1; i <= imax; ++i) {
            int c = msimple(states - i);
            if (!c) continue;
            cap += (first ? "" : " + ") +
                   (c == 1 ? "x" + std::to_string(i) : std::to_string(c) + "*x" + std::to_string(i));
            first = false;
        }
        res.inequalities.push_back(cap + " <= " + std::to_string(states) +
                                   "   (at most one simple sink per state)");
        std::string tot;
        for (int i = 1; i <= imax; ++i) tot += (i > 1 ? " + " : "") + ("x" + std::to_string(i));
        res.inequalities.push_back(tot + " <= " + std::to_string(s.point_count()) +
                                   "   (point count)");
    }

    // the feasibility region is tiny: enumerate x vectors directly
    int best = 0;
    std::vector<int> x(imax + 1, 0);
    auto rec = [&](auto&& self, int i) -> void {
        if (i > imax) {
            int cap = 0, total = 0, value = 0;
            for (int j = 1; j <= imax; ++j) {
                cap += msimple(states - j) * x[j];
                total += x[j];
                value += j * x[j];
            }
            if (cap <= states && total <= s.point_count()) best = std::max(best, value);
            return;
        }
        for (int v = 0; v <= s.point_count(); ++v) {
            x[i] = v;
            self(self, i + 1);
        }
        x[i] = 0;
    };
    rec(rec, 1);

    res.achievable_max = best;
    res.ruled_out = best < res.required_total;
    res.inequalities.push_back("max sum(i*x_i) = " + std::to_string(best) +
                               (res.ruled_out ? " < " : " >= ") +
                               std::to_string(res.required_total) +
                               (res.ruled_out ? ": infeasible, ruled out" : ": feasible"));
    return res;
}

}  // namespace ctxmem
