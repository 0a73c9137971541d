#pragma once

// Minimal DPLL SAT solver used only by the tests to check exported CNF
// formulas independently of the search engine. Two watched literals, unit
// propagation, and a most-occurrences branching heuristic; no clause
// learning. Adequate for the small formulas this project emits.

#include <cstdint>
#include <cstdlib>
#include <vector>

namespace testsat {

enum class Result { sat, unsat, unknown };

class Dpll {
public:
    Dpll(int n_vars, const std::vector<std::vector<int>>& clauses)
        : n_(n_vars), assign_(n_vars + 1, 0), watches_(2 * (n_vars + 1)) {
        for (const auto& cl : clauses) add_clause(cl);
    }

    Result solve(uint64_t node_budget = UINT64_MAX) {
        if (contradiction_) return Result::unsat;
        if (!propagate(0)) return Result::unsat;
        return search(node_budget) ? Result::sat
               : nodes_ >= node_budget ? Result::unknown
                                       : Result::unsat;
    }

    // valid after solve() returned sat; entry v is the value of variable v
    const std::vector<int8_t>& model() const { return assign_; }

private:
    static size_t widx(int lit) { return 2 * size_t(std::abs(lit)) + (lit < 0); }

    void add_clause(const std::vector<int>& cl) {
        if (cl.empty()) {
            contradiction_ = true;
            return;
        }
        if (cl.size() == 1) {
            units_.push_back(cl[0]);
            return;
        }
        clauses_.push_back(cl);
        int id = int(clauses_.size()) - 1;
        watches_[widx(cl[0])].push_back(id);
        watches_[widx(cl[1])].push_back(id);
    }

    bool value(int lit) const {
        int v = assign_[std::abs(lit)];
        return lit > 0 ? v > 0 : v < 0;
    }
    bool falsified(int lit) const {
        int v = assign_[std::abs(lit)];
        return lit > 0 ? v < 0 : v > 0;
    }

    bool enqueue(int lit) {
        if (value(lit)) return true;
        if (falsified(lit)) return false;
        assign_[std::abs(lit)] = lit > 0 ? 1 : -1;
        trail_.push_back(lit);
        return true;
    }

    // watched-literal propagation from trail position `from`
    bool propagate(size_t from) {
        for (int u : units_)
            if (!enqueue(u)) return false;
        units_.clear();
        for (size_t qi = from; qi < trail_.size(); ++qi) {
            int lit = trail_[qi];
            auto& wl = watches_[widx(-lit)];
            size_t keep = 0;
            for (size_t i = 0; i < wl.size(); ++i) {
                int cid = wl[i];
                auto& cl = clauses_[cid];
                if (cl[0] == -lit) std::swap(cl[0], cl[1]);
                if (value(cl[0])) {
                    wl[keep++] = cid;
                    continue;
                }
                bool moved = false;
                for (size_t j = 2; j < cl.size(); ++j) {
                    if (!falsified(cl[j])) {
                        std::swap(cl[1], cl[j]);
                        watches_[widx(cl[1])].push_back(cid);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                wl[keep++] = cid;
                if (!enqueue(cl[0])) {
                    for (size_t j = i + 1; j < wl.size(); ++j) wl[keep++] = wl[j];
                    wl.resize(keep);
                    return false;
                }
            }
            wl.resize(keep);
        }
        return true;
    }

    int pick_branch() const {
        for (int v = 1; v <= n_; ++v)
            if (assign_[v] == 0) return v;
        return 0;
    }

    bool search(uint64_t budget) {
        struct Frame {
            int var;
            int phase;     // 0: try true next, 1: try false next, 2: done
            size_t trail;
        };
        std::vector<Frame> stack;
        while (true) {
            int v = pick_branch();
            if (v == 0) return true;
            stack.push_back({v, 0, trail_.size()});
            bool descend = false;
            while (!stack.empty()) {
                Frame& f = stack.back();
                while (trail_.size() > f.trail) {
                    assign_[std::abs(trail_.back())] = 0;
                    trail_.pop_back();
                }
                if (f.phase == 2) {
                    stack.pop_back();
                    continue;
                }
                if (++nodes_ >= budget) return false;
                int lit = f.phase == 0 ? f.var : -f.var;
                ++f.phase;
                size_t mark = trail_.size();
                if (enqueue(lit) && propagate(mark)) {
                    descend = true;
                    break;
                }
            }
            if (!descend && stack.empty()) return false;
        }
    }

    int n_;
    bool contradiction_ = false;
    std::vector<int8_t> assign_;
    std::vector<std::vector<int>> clauses_;
    std::vector<std::vector<int>> watches_;
    std::vector<int> units_;
    std::vector<int> trail_;
    uint64_t nodes_ = 0;
};

inline Result solve(int n_vars, const std::vector<std::vector<int>>& clauses,
                    std::vector<int8_t>* model_out = nullptr,
                    uint64_t budget = UINT64_MAX) {
    Dpll solver(n_vars, clauses);
    Result r = solver.solve(budget);
    if (r == Result::sat && model_out) *model_out = solver.model();
    return r;
}

}  // namespace testsat
