#include "ctxmem/verify.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <random>
#include <set>

namespace ctxmem {

const char* prediction_set_name(PredictionSet p) {
    return p == PredictionSet::Ia_II ? "ia-ii" : "ia-ib-ii";
}

const char* prediction_set_display(PredictionSet p) {
    return p == PredictionSet::Ia_II ? "(Ia)+(II)" : "(Ia)+(Ib)+(II)";
}

std::optional<PredictionSet> prediction_set_from_name(std::string_view name) {
    if (name == "ia-ii") return PredictionSet::Ia_II;
    if (name == "ia-ib-ii") return PredictionSet::Ia_Ib_II;
    return std::nullopt;
}

namespace {

Digraph reverse_graph(const Digraph& d) {
    Digraph r(d.vertex_count());
    for (int u = 0; u < d.vertex_count(); ++u)
        for (int v : d.out_neighbors(u)) r.add_arc(v, u);
    return r;
}

// Shortest vertex path from `from` to any vertex in `targets`; empty when
// unreachable. The path includes both endpoints.
std::vector<int> bfs_path(const Digraph& d, int from, const std::vector<int>& targets) {
    std::vector<int> parent(d.vertex_count(), -2);
    std::deque<int> queue{from};
    parent[from] = -1;
    std::vector<bool> is_target(d.vertex_count(), false);
    for (int t : targets) is_target[t] = true;
    int hit = is_target[from] ? from : -1;
    while (hit < 0 && !queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int w : d.out_neighbors(v)) {
            if (parent[w] != -2) continue;
            parent[w] = v;
            if (is_target[w]) {
                hit = w;
                break;
            }
            queue.push_back(w);
        }
    }
    std::vector<int> path;
    for (int v = hit; v >= 0; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

Certificate path_certificate(const CommutingDigraph& cd, const std::vector<int>& vertex_path,
                             const IncidenceStructure& s, const std::string& violated,
                             std::string note) {
    Certificate cert;
    cert.start_state = cd.vertices[vertex_path.front()].first;
    for (int v : vertex_path) cert.inputs.push_back(cd.vertices[v].second);
    cert.violated = violated;
    cert.witness_note = std::move(note);
    (void)s;
    return cert;
}

}  // namespace

Verdict check_Ia_II(const MealyMachine& m, const IncidenceStructure& s) {
    m.validate(s);
    Verdict verdict;
    verdict.prediction_set = PredictionSet::Ia_II;
    for (int b = 0; b < s.block_count(); ++b) {
        CommutingDigraph cd = commuting_digraph(m, s, s.blocks[b]);
        SinkReport sinks = strong_sinks(cd, m);
        Digraph rev = reverse_graph(cd.base);
        for (const SinkInfo& sink : sinks.sinks) {
            // (1a) outputs constant per point across the sink's states
            for (size_t col = 0; col < cd.region.size(); ++col) {
                if (sink.outputs[col]) continue;
                int p = cd.region[col];
                Sign first = m.output[sink.states.front()][p];
                int other = -1;
                for (int st : sink.states)
                    if (m.output[st][p] != first) other = st;
                int v_from = cd.vertex_id(sink.states.front(), p);
                int v_to = cd.vertex_id(other, p);
                std::vector<int> path = bfs_path(cd.base, v_from, {v_to});
                verdict.certificate = path_certificate(
                    cd, path, s, "Ia",
                    "sink of D_" + std::to_string(b) + " has non-constant output on point " +
                        s.points[p].name);
                verdict.passed = false;
                return verdict;
            }
            // (1b) product of sink outputs over the block equals the block sign
            Sign prod = Sign::plus;
            for (int p : s.blocks[b]) {
                auto it = std::lower_bound(cd.region.begin(), cd.region.end(), p);
                prod = prod * *sink.outputs[it - cd.region.begin()];
            }
            if (prod != s.block_signs[b]) {
                Certificate cert;
                cert.start_state = sink.states.front();
                cert.inputs = s.blocks[b];
                cert.violated = "II";
                cert.witness_note = "sink {S" + std::to_string(sink.states.front() + 1) +
                                    ",...} of D_" + std::to_string(b) +
                                    " has output product " + sign_str(prod) +
                                    " but the block sign is " + sign_str(s.block_signs[b]);
                verdict.certificate = cert;
                verdict.passed = false;
                return verdict;
            }
            // (2) every vertex from which the sink is reachable agrees with it
            std::vector<int> can_reach = reachable(rev, sink.vertex_ids);
            for (int v : can_reach) {
                auto [st, p] = cd.vertices[v];
                auto it = std::lower_bound(cd.region.begin(), cd.region.end(), p);
                Sign expected = *sink.outputs[it - cd.region.begin()];
                if (m.output[st][p] == expected) continue;
                // walk from (st,p) to the sink's vertex for the same point
                std::vector<int> targets;
                for (int sink_state : sink.states) targets.push_back(cd.vertex_id(sink_state, p));
                std::vector<int> path = bfs_path(cd.base, v, targets);
                verdict.certificate = path_certificate(
                    cd, path, s, "Ia",
                    "vertex (S" + std::to_string(st + 1) + "," + s.points[p].name +
                        ") reaches a sink of D_" + std::to_string(b) +
                        " with the opposite output for " + s.points[p].name);
                verdict.passed = false;
                return verdict;
            }
        }
    }
    verdict.passed = true;
    return verdict;
}

Verdict check_Ib(const MealyMachine& m, const IncidenceStructure& s) {
    m.validate(s);
    Verdict verdict;
    verdict.prediction_set = PredictionSet::Ia_Ib_II;
    for (int p = 0; p < s.point_count(); ++p) {
        CommutingDigraph cd = commuting_digraph(m, s, {p});
        for (int st = 0; st < m.state_count; ++st) {
            int v0 = cd.vertex_id(st, p);
            std::vector<int> reach = reachable(cd.base, {v0});
            for (int v : reach) {
                auto [st2, q] = cd.vertices[v];
                if (q != p || m.output[st2][p] == m.output[st][p]) continue;
                std::vector<int> path = bfs_path(cd.base, v0, {v});
                verdict.certificate = path_certificate(
                    cd, path, s, "Ib",
                    "(S" + std::to_string(st + 1) + "," + s.points[p].name + ") reaches (S" +
                        std::to_string(st2 + 1) + "," + s.points[p].name +
                        ") in D_" + s.points[p].name + " with the opposite output");
                verdict.passed = false;
                return verdict;
            }
        }
    }
    verdict.passed = true;
    return verdict;
}

Verdict check_predictions(const MealyMachine& m, const IncidenceStructure& s,
                          PredictionSet preds) {
    Verdict v = check_Ia_II(m, s);
    v.prediction_set = preds;
    if (!v.passed || preds == PredictionSet::Ia_II) return v;
    Verdict ib = check_Ib(m, s);
    ib.prediction_set = preds;
    return ib;
}

bool certificate_replays(const MealyMachine& m, const IncidenceStructure& s,
                         const Certificate& cert) {
    RunTrace t = run(m, s, cert.start_state, cert.inputs);
    const size_t n = t.inputs.size();
    auto inputs_within_block = [&](size_t i, size_t j) {
        for (int b = 0; b < s.block_count(); ++b) {
            bool all = true;
            for (size_t k = i; k <= j && all; ++k)
                all = std::binary_search(s.blocks[b].begin(), s.blocks[b].end(), t.inputs[k]);
            if (all) return true;
        }
        return false;
    };
    if (cert.violated == "Ia" || cert.violated == "Ib") {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) {
                if (t.inputs[i] != t.inputs[j] || t.outputs[i] == t.outputs[j]) continue;
                if (cert.violated == "Ia" && inputs_within_block(i, j)) return true;
                if (cert.violated == "Ib") {
                    bool all_compatible = true;
                    for (size_t k = i; k <= j; ++k)
                        if (!compatible(s, t.inputs[k], t.inputs[i])) all_compatible = false;
                    if (all_compatible) return true;
                }
            }
        return false;
    }
    if (cert.violated == "II") {
        std::set<int> support(t.inputs.begin(), t.inputs.end());
        for (int b = 0; b < s.block_count(); ++b) {
            if (std::set<int>(s.blocks[b].begin(), s.blocks[b].end()) != support) continue;
            Sign prod = Sign::plus;
            std::set<int> seen;
            for (size_t i = 0; i < n; ++i)
                if (seen.insert(t.inputs[i]).second) prod = prod * t.outputs[i];
            if (prod != s.block_signs[b]) return true;
        }
        return false;
    }
    return false;
}

namespace {

// One enumeration cell of the oracle: sequences over `alphabet` started in
// `start`, checking (Ia)/(II) for a block cell or anchor repeats for an
// (Ib) cell.
struct OracleCell {
    std::vector<int> alphabet;  // sorted point ids
    int start = 0;
    int block = -1;   // >= 0 for block cells
    int anchor = -1;  // >= 0 for (Ib) cells
};

struct CellHit {
    std::vector<int> inputs;
    std::string violated;
};

// Depth-first scan of all sequences of exactly depth <= `limit`, reporting
// the first violation found at depth == `limit` in lexicographic order.
// Shorter violations were already ruled out by earlier iterations.
class CellScan {
public:
    CellScan(const MealyMachine& m, const IncidenceStructure& s, const OracleCell& cell)
        : m_(m), s_(s), cell_(cell) {
        if (cell.block >= 0) {
            block_sign_ = s.block_signs[cell.block];
            block_size_ = static_cast<int>(s.blocks[cell.block].size());
        }
    }

    // returns true if a violation was found; explored() counts visited nodes
    bool scan(int limit, uint64_t budget_left, CellHit& hit) {
        limit_ = limit;
        explored_ = 0;
        budget_ = budget_left;
        budget_hit_ = false;
        first_out_.assign(s_.point_count(), 0);
        seen_count_ = 0;
        inputs_.clear();
        return dfs(cell_.start, 0, hit);
    }

    uint64_t explored() const { return explored_; }
    bool budget_exhausted() const { return budget_hit_; }

private:
    bool dfs(int state, int depth, CellHit& hit) {
        if (depth == limit_) return false;
        for (int q : cell_.alphabet) {
            if (explored_ >= budget_) {
                budget_hit_ = true;
                return false;
            }
            ++explored_;
            Sign out = m_.output[state][q];
            int prev = first_out_[q];
            int prev_seen = seen_count_;
            inputs_.push_back(q);

            std::string violated;
            if (prev != 0 && to_int(out) != prev) {
                // a repeated measurement changed its result
                violated = cell_.anchor >= 0 ? (q == cell_.anchor ? "Ib" : "") : "Ia";
            }
            if (violated.empty() && prev == 0) {
                first_out_[q] = to_int(out);
                ++seen_count_;
                if (cell_.block >= 0 && seen_count_ == block_size_) {
                    int prod = 1;
                    for (int p : s_.blocks[cell_.block]) prod *= first_out_[p];
                    if (prod != to_int(block_sign_)) violated = "II";
                }
            }
            if (!violated.empty() && depth + 1 == limit_) {
                hit.inputs = inputs_;
                hit.violated = violated;
                return true;
            }
            bool found = violated.empty() && dfs(m_.update[state][q], depth + 1, hit);
            inputs_.pop_back();
            if (prev == 0) {
                first_out_[q] = 0;
                seen_count_ = prev_seen;
            }
            if (found) return true;
        }
        return false;
    }

    const MealyMachine& m_;
    const IncidenceStructure& s_;
    const OracleCell& cell_;
    Sign block_sign_ = Sign::plus;
    int block_size_ = 0;
    int limit_ = 0;
    uint64_t explored_ = 0, budget_ = 0;
    bool budget_hit_ = false;
    std::vector<int> first_out_;  // 0 unseen, else +1/-1
    int seen_count_ = 0;
    std::vector<int> inputs_;
};

}  // namespace

OracleResult sequence_oracle(const MealyMachine& m, const IncidenceStructure& s,
                             PredictionSet preds, int max_len, uint64_t node_budget,
                             ExecMode mode) {
    m.validate(s);
    OracleResult result;
    result.max_len = max_len;

    int max_block = 0;
    for (const auto& b : s.blocks) max_block = std::max(max_block, int(b.size()));

    std::vector<OracleCell> cells;
    for (int b = 0; b < s.block_count(); ++b)
        for (int st = 0; st < m.state_count; ++st) {
            OracleCell c;
            c.alphabet = s.blocks[b];
            c.start = st;
            c.block = b;
            cells.push_back(std::move(c));
        }
    if (preds == PredictionSet::Ia_Ib_II) {
        for (int p = 0; p < s.point_count(); ++p) {
            std::vector<int> alphabet;
            for (int q = 0; q < s.point_count(); ++q)
                if (compatible(s, p, q)) alphabet.push_back(q);
            for (int st = 0; st < m.state_count; ++st) {
                OracleCell c;
                c.alphabet = alphabet;
                c.start = st;
                c.anchor = p;
                cells.push_back(std::move(c));
            }
        }
    }

    std::atomic<uint64_t> explored_total{0};
    std::atomic<bool> budget_hit{false};

    // iterative deepening over all cells finds a shortest counterexample;
    // ties break on cell order, then lexicographically within the cell
    for (int limit = 1; limit <= max_len; ++limit) {
        int hit_cell = -1;
        CellHit best_hit;
        const int ncells = static_cast<int>(cells.size());
        auto run_cell = [&](int ci, CellHit& hit) {
            CellScan scan(m, s, cells[ci]);
            uint64_t left = node_budget - std::min(node_budget, explored_total.load());
            bool found = scan.scan(limit, left, hit);
            explored_total += scan.explored();
            if (scan.budget_exhausted()) budget_hit = true;
            return found;
        };
        if (mode == ExecMode::serial) {
            for (int ci = 0; ci < ncells && hit_cell < 0 && !budget_hit; ++ci) {
                CellHit hit;
                if (run_cell(ci, hit)) {
                    hit_cell = ci;
                    best_hit = hit;
                }
            }
        } else {
#pragma omp parallel for schedule(dynamic)
            for (int ci = 0; ci < ncells; ++ci) {
                if (budget_hit) continue;
                bool skip = false;
#pragma omp critical(oracle_best)
                skip = hit_cell >= 0 && hit_cell <= ci;
                if (skip) continue;
                CellHit hit;
                if (run_cell(ci, hit)) {
#pragma omp critical(oracle_best)
                    {
                        if (hit_cell < 0 || ci < hit_cell) {
                            hit_cell = ci;
                            best_hit = hit;
                        }
                    }
                }
            }
        }
        result.sequences_explored = explored_total.load();
        if (hit_cell >= 0) {
            Certificate cert;
            cert.start_state = cells[hit_cell].start;
            cert.inputs = best_hit.inputs;
            cert.violated = best_hit.violated;
            cert.witness_note = "found by bounded sequence enumeration at length " +
                                std::to_string(limit);
            result.status = OracleStatus::failed;
            result.certificate = cert;
            return result;
        }
        if (budget_hit) {
            result.status = OracleStatus::inconclusive;
            result.note = "node budget exhausted; inconclusive at length " + std::to_string(limit);
            return result;
        }
    }
    result.sequences_explored = explored_total.load();
    if (max_len < max_block) {
        result.status = OracleStatus::inconclusive;
        result.note = "max_len " + std::to_string(max_len) + " is below the block size " +
                      std::to_string(max_block) + "; prediction (II) never completes";
    } else {
        result.status = OracleStatus::passed;
    }
    return result;
}

namespace {

// state-level reachability: some vertex of state a reaches some vertex of b
bool state_reaches(const CommutingDigraph& cd, int a, int b) {
    std::vector<int> seeds;
    for (size_t v = 0; v < cd.vertices.size(); ++v)
        if (cd.vertices[v].first == a) seeds.push_back(static_cast<int>(v));
    for (int v : reachable(cd.base, seeds))
        if (cd.vertices[v].first == b) return true;
    return false;
}

}  // namespace

PropositionReport proposition_suite(const MealyMachine& m, const IncidenceStructure& s) {
    PropositionReport report;
    report.ia_ii = check_Ia_II(m, s);
    report.ib = check_Ib(m, s);
    const bool has_ia_ii = report.ia_ii.passed;
    const bool has_ib = has_ia_ii && report.ib.passed;

    std::vector<CommutingDigraph> block_cd;
    std::vector<SinkReport> block_sinks;
    for (int b = 0; b < s.block_count(); ++b) {
        block_cd.push_back(commuting_digraph(m, s, s.blocks[b]));
        block_sinks.push_back(strong_sinks(block_cd.back(), m));
    }
    std::vector<CommutingDigraph> point_cd;
    std::vector<SinkReport> point_sinks;
    for (int p = 0; p < s.point_count(); ++p) {
        point_cd.push_back(commuting_digraph(m, s, {p}));
        point_sinks.push_back(strong_sinks(point_cd.back(), m));
    }

    auto add = [&](int id, std::string statement, bool applicable, auto&& check) {
        PropositionResult r;
        r.id = id;
        r.statement = std::move(statement);
        r.applicable = applicable;
        if (applicable) {
            uint64_t instances = 0;
            r.holds = check(instances);
            r.instances_checked = instances;
        } else {
            r.note = id >= 7 ? "machine does not satisfy (Ia)+(Ib)+(II)"
                             : "machine does not satisfy (Ia)+(II)";
        }
        report.results.push_back(std::move(r));
    };

    add(2, "states inside a sink of D_b form confirmation contexts (simple when alone)",
        has_ia_ii, [&](uint64_t& n) {
            for (int b = 0; b < s.block_count(); ++b)
                for (const SinkInfo& sink : block_sinks[b].sinks)
                    for (int st : sink.states) {
                        ++n;
                        if (context_class(m, s, st, b).cls != ContextClass::confirmation)
                            return false;
                        if (sink.states.size() == 1)
                            for (int p : s.blocks[b])
                                if (classify_vertex(m, st, p) != VertexClass::simple) return false;
                    }
            return true;
        });

    add(3, "every contradiction context has at least two nonsimple vertices", has_ia_ii,
        [&](uint64_t& n) {
            for (int st = 0; st < m.state_count; ++st)
                for (int b = 0; b < s.block_count(); ++b) {
                    if (context_class(m, s, st, b).cls != ContextClass::contradiction) continue;
                    ++n;
                    int nonsimple = 0;
                    for (int p : s.blocks[b])
                        if (classify_vertex(m, st, p) == VertexClass::nonsimple) ++nonsimple;
                    if (nonsimple < 2) return false;
                }
            return true;
        });

    add(4,
        "a contradiction context reaches two sinks with different outputs and lies in none",
        has_ia_ii, [&](uint64_t& n) {
            for (int st = 0; st < m.state_count; ++st)
                for (int b = 0; b < s.block_count(); ++b) {
                    if (context_class(m, s, st, b).cls != ContextClass::contradiction) continue;
                    ++n;
                    const CommutingDigraph& cd = block_cd[b];
                    std::vector<int> seeds;
                    for (size_t v = 0; v < cd.vertices.size(); ++v)
                        if (cd.vertices[v].first == st) seeds.push_back(static_cast<int>(v));
                    std::vector<int> reach = reachable(cd.base, seeds);
                    std::set<std::vector<int>> reachable_outputs;
                    for (const SinkInfo& sink : block_sinks[b].sinks) {
                        if (std::find(sink.states.begin(), sink.states.end(), st) !=
                            sink.states.end())
                            return false;  // contradiction state inside a sink
                        for (int v : sink.vertex_ids)
                            if (std::binary_search(reach.begin(), reach.end(), v)) {
                                std::vector<int> on_block;
                                for (int p : s.blocks[b])
                                    on_block.push_back(
                                        to_int(m.output[sink.states.front()][p]));
                                reachable_outputs.insert(on_block);
                                break;
                            }
                    }
                    if (reachable_outputs.size() < 2) return false;
                }
            return true;
        });

    add(5, "state reachability in D_b implies state reachability in D_p for p in b", has_ia_ii,
        [&](uint64_t& n) {
            for (int b = 0; b < s.block_count(); ++b)
                for (int p : s.blocks[b])
                    for (int s1 = 0; s1 < m.state_count; ++s1)
                        for (int s2 = 0; s2 < m.state_count; ++s2) {
                            ++n;
                            if (state_reaches(block_cd[b], s1, s2) &&
                                !state_reaches(point_cd[p], s1, s2))
                                return false;
                        }
            return true;
        });

    add(6, "a state in a sink of order <= 2 of D_p confirms every block through p", has_ia_ii,
        [&](uint64_t& n) {
            for (int p = 0; p < s.point_count(); ++p)
                for (const SinkInfo& sink : point_sinks[p].sinks) {
                    if (sink.states.size() > 2) continue;
                    for (int st : sink.states)
                        for (int b : s.blocks_of_point(p)) {
                            ++n;
                            if (context_class(m, s, st, b).cls != ContextClass::confirmation)
                                return false;
                            if (sink.states.size() == 1)
                                for (int q : s.blocks[b])
                                    if (classify_vertex(m, st, q) != VertexClass::simple)
                                        return false;
                        }
                }
            return true;
        });

    add(7, "within a sink of D_p the output of p is constant", has_ib, [&](uint64_t& n) {
        for (int p = 0; p < s.point_count(); ++p)
            for (const SinkInfo& sink : point_sinks[p].sinks) {
                ++n;
                Sign first = m.output[sink.states.front()][p];
                for (int st : sink.states)
                    if (m.output[st][p] != first) return false;
            }
        return true;
    });

    add(8,
        "every contradiction context has two multi-sink points whose digraphs exclude the state "
        "from every sink",
        has_ib, [&](uint64_t& n) {
            for (int st = 0; st < m.state_count; ++st)
                for (int b = 0; b < s.block_count(); ++b) {
                    if (context_class(m, s, st, b).cls != ContextClass::contradiction) continue;
                    ++n;
                    int good = 0;
                    for (int p : s.blocks[b]) {
                        const SinkReport& sr = point_sinks[p];
                        if (sr.sinks.size() < 2) continue;  // not multi-sink
                        bool inside = false;
                        for (const SinkInfo& sink : sr.sinks)
                            if (std::find(sink.states.begin(), sink.states.end(), st) !=
                                sink.states.end())
                                inside = true;
                        if (!inside) ++good;
                    }
                    if (good < 2) return false;
                }
            return true;
        });

    report.all_applicable_hold = true;
    for (const auto& r : report.results)
        if (r.applicable && !r.holds) report.all_applicable_hold = false;
    return report;
}

MealyMachine random_machine(const IncidenceStructure& s, int state_count, uint64_t seed) {
    std::mt19937_64 gen(seed);
    MealyMachine m;
    m.structure_ref = s.name;
    m.state_count = state_count;
    m.output.assign(state_count, std::vector<Sign>(s.point_count(), Sign::plus));
    m.update.assign(state_count, std::vector<int>(s.point_count(), 0));
    for (int st = 0; st < state_count; ++st)
        for (int p = 0; p < s.point_count(); ++p) {
            m.output[st][p] = (gen() & 1) ? Sign::plus : Sign::minus;
            m.update[st][p] = static_cast<int>(gen() % uint64_t(state_count));
        }
    return m;
}

}  // namespace ctxmem
