#include "ctxmem/cnf.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ctxmem {

namespace {

struct CnfBuilder {
    CnfFormula& f;

    int fresh() { return ++f.n_vars; }
    void clause(std::vector<int> lits) { f.clauses.push_back(std::move(lits)); }

    // v <-> a AND b
    void def_and(int v, int a, int b) {
        clause({-v, a});
        clause({-v, b});
        clause({v, -a, -b});
    }
    // v <-> OR(lits)
    void def_or(int v, const std::vector<int>& lits) {
        for (int l : lits) clause({-l, v});
        std::vector<int> fwd{-v};
        for (int l : lits) fwd.push_back(l);
        clause(fwd);
    }
};

// reachability closure variables over a state digraph whose arcs come from
// the transitions on `alphabet`; returns R[s][t] for paths of length <= k-1
std::vector<std::vector<int>> reachability_vars(CnfBuilder& cb, const CnfFormula& f,
                                                const std::vector<int>& alphabet) {
    const int k = f.states;
    // arc variables A[s][t], t != s
    std::vector<std::vector<int>> arc(k, std::vector<int>(k, 0));
    for (int s = 0; s < k; ++s)
        for (int t = 0; t < k; ++t) {
            if (s == t) continue;
            arc[s][t] = cb.fresh();
            std::vector<int> trs;
            for (int p : alphabet) trs.push_back(f.tr_var(s, p, t));
            cb.def_or(arc[s][t], trs);
        }
    // layered closure
    std::vector<std::vector<int>> reach(k, std::vector<int>(k, 0));
    for (int s = 0; s < k; ++s)
        for (int t = 0; t < k; ++t) reach[s][t] = cb.fresh();
    // R_0
    std::vector<std::vector<int>> prev(k, std::vector<int>(k, 0));
    for (int s = 0; s < k; ++s)
        for (int t = 0; t < k; ++t) {
            prev[s][t] = cb.fresh();
            cb.clause({s == t ? prev[s][t] : -prev[s][t]});
        }
    for (int layer = 1; layer < k; ++layer) {
        std::vector<std::vector<int>> cur =
            layer == k - 1 ? reach : std::vector<std::vector<int>>(k, std::vector<int>(k, 0));
        for (int s = 0; s < k; ++s)
            for (int t = 0; t < k; ++t) {
                if (layer != k - 1) cur[s][t] = cb.fresh();
                std::vector<int> parts{prev[s][t]};
                for (int mid = 0; mid < k; ++mid) {
                    if (mid == s) continue;
                    int step = cb.fresh();
                    cb.def_and(step, arc[s][mid], prev[mid][t]);
                    parts.push_back(step);
                }
                cb.def_or(cur[s][t], parts);
            }
        prev = cur;
    }
    if (k == 1) {
        // no layers ran; reach coincides with R_0
        for (int s = 0; s < k; ++s)
            for (int t = 0; t < k; ++t) {
                cb.clause({-reach[s][t], prev[s][t]});
                cb.clause({reach[s][t], -prev[s][t]});
            }
    }
    return reach;
}

void lex_leq(CnfBuilder& cb, const std::vector<int>& a, const std::vector<int>& b) {
    // false < true; a <= b lexicographically
    int eq_prev = 0;  // 0 means "true so far"
    for (size_t i = 0; i < a.size(); ++i) {
        if (eq_prev == 0)
            cb.clause({-a[i], b[i]});
        else
            cb.clause({-eq_prev, -a[i], b[i]});
        if (i + 1 == a.size()) break;
        int eq = cb.fresh();
        if (eq_prev == 0) {
            // eq <-> (a_i <-> b_i)
            cb.clause({-eq, -a[i], b[i]});
            cb.clause({-eq, a[i], -b[i]});
            cb.clause({eq, a[i], b[i]});
            cb.clause({eq, -a[i], -b[i]});
        } else {
            cb.clause({-eq, eq_prev});
            cb.clause({-eq, -a[i], b[i]});
            cb.clause({-eq, a[i], -b[i]});
            cb.clause({eq, -eq_prev, a[i], -b[i]});
            cb.clause({eq, -eq_prev, -a[i], b[i]});
        }
        eq_prev = eq;
    }
}

}  // namespace

CnfFormula build_cnf(const IncidenceStructure& s, PredictionSet preds, int states,
                     bool symmetry_clauses) {
    if (states < 1 || states > 6) throw Error("CNF export supports 1..6 states");
    CnfFormula f;
    f.structure = s.name;
    f.preds = preds;
    f.states = states;
    f.n_points = s.point_count();
    f.symmetry_clauses = symmetry_clauses;
    f.n_vars = states * f.n_points * (1 + states);
    CnfBuilder cb{f};

    const int k = states;
    // one-hot transitions
    for (int st = 0; st < k; ++st)
        for (int p = 0; p < f.n_points; ++p) {
            std::vector<int> all;
            for (int t = 0; t < k; ++t) all.push_back(f.tr_var(st, p, t));
            cb.clause(all);
            for (int t1 = 0; t1 < k; ++t1)
                for (int t2 = t1 + 1; t2 < k; ++t2)
                    cb.clause({-f.tr_var(st, p, t1), -f.tr_var(st, p, t2)});
        }

    // block criterion: sinks have constant outputs with the right product,
    // and every vertex agrees with each sink it can reach
    for (int b = 0; b < s.block_count(); ++b) {
        std::vector<int> region;
        for (int p = 0; p < s.point_count(); ++p) {
            bool in = true;
            for (int q : s.blocks[b])
                if (!compatible(s, p, q)) in = false;
            if (in) region.push_back(p);
        }
        auto reach = reachability_vars(cb, f, region);

        // viol[t][t'] <-> reach[t][t'] & !reach[t'][t]; insink[t] <-> none
        std::vector<int> insink(k);
        for (int t = 0; t < k; ++t) {
            std::vector<int> viols;
            for (int t2 = 0; t2 < k; ++t2) {
                if (t2 == t) continue;
                int v = cb.fresh();
                cb.clause({-v, reach[t][t2]});
                cb.clause({-v, -reach[t2][t]});
                cb.clause({v, -reach[t][t2], reach[t2][t]});
                viols.push_back(v);
            }
            insink[t] = cb.fresh();
            for (int v : viols) cb.clause({-insink[t], -v});
            std::vector<int> back{insink[t]};
            for (int v : viols) back.push_back(v);
            cb.clause(back);
        }

        // (1) output constancy across a sink, for every region point
        for (int t = 0; t < k; ++t)
            for (int t2 = 0; t2 < k; ++t2) {
                if (t2 == t) continue;
                for (int p : region) {
                    cb.clause({-insink[t], -reach[t][t2], -f.out_var(t, p), f.out_var(t2, p)});
                    cb.clause({-insink[t], -reach[t][t2], f.out_var(t, p), -f.out_var(t2, p)});
                }
            }
        // (1) product over the block equals the block sign
        const auto& blk = s.blocks[b];
        const int m = static_cast<int>(blk.size());
        for (int t = 0; t < k; ++t)
            for (int bits = 0; bits < (1 << m); ++bits) {
                // forbid sign patterns with the wrong parity: out var true
                // means +1, so the product is negative iff an odd number of
                // outputs are false
                int minus = 0;
                for (int i = 0; i < m; ++i)
                    if (!((bits >> i) & 1)) ++minus;
                Sign prod = (minus & 1) ? Sign::minus : Sign::plus;
                if (prod == s.block_signs[b]) continue;
                std::vector<int> cl{-insink[t]};
                for (int i = 0; i < m; ++i)
                    cl.push_back(((bits >> i) & 1) ? -f.out_var(t, blk[i]) : f.out_var(t, blk[i]));
                cb.clause(cl);
            }
        // (2) a vertex agrees with every sink reachable after its transition
        for (int st = 0; st < k; ++st)
            for (int p : region)
                for (int t1 = 0; t1 < k; ++t1)
                    for (int t = 0; t < k; ++t) {
                        cb.clause({-f.tr_var(st, p, t1), -reach[t1][t], -insink[t],
                                   -f.out_var(st, p), f.out_var(t, p)});
                        cb.clause({-f.tr_var(st, p, t1), -reach[t1][t], -insink[t],
                                   f.out_var(st, p), -f.out_var(t, p)});
                    }
    }

    // (Ib): after measuring p, every reachable state agrees on p
    if (preds == PredictionSet::Ia_Ib_II) {
        for (int p = 0; p < s.point_count(); ++p) {
            std::vector<int> region;
            for (int q = 0; q < s.point_count(); ++q)
                if (compatible(s, p, q)) region.push_back(q);
            auto reach = reachability_vars(cb, f, region);
            for (int st = 0; st < k; ++st)
                for (int t1 = 0; t1 < k; ++t1)
                    for (int t = 0; t < k; ++t) {
                        cb.clause({-f.tr_var(st, p, t1), -reach[t1][t], -f.out_var(st, p),
                                   f.out_var(t, p)});
                        cb.clause({-f.tr_var(st, p, t1), -reach[t1][t], f.out_var(st, p),
                                   -f.out_var(t, p)});
                    }
        }
    }

    if (symmetry_clauses) {
        // state relabeling: output rows nondecreasing
        for (int st = 0; st + 1 < k; ++st) {
            std::vector<int> a, b;
            for (int p = 0; p < f.n_points; ++p) {
                a.push_back(f.out_var(st, p));
                b.push_back(f.out_var(st + 1, p));
            }
            lex_leq(cb, a, b);
        }
        // sign-preserving automorphisms: the whole output matrix is a
        // lex-leader under each group element
        AutomorphismGroup g = automorphisms(s, AutomorphismKind::sign_preserving);
        for (const auto& perm : g.elements) {
            bool identity = true;
            for (int p = 0; p < f.n_points; ++p)
                if (perm[p] != p) identity = false;
            if (identity) continue;
            std::vector<int> a, b;
            for (int st = 0; st < k; ++st)
                for (int p = 0; p < f.n_points; ++p) {
                    a.push_back(f.out_var(st, p));
                    b.push_back(f.out_var(st, perm[p]));
                }
            lex_leq(cb, a, b);
        }
    }
    return f;
}

std::string export_cnf(const CnfFormula& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write CNF file '" + path + "'");
    out << "c machines with " << f.states << " states over structure '" << f.structure
        << "' passing " << prediction_set_display(f.preds) << "\n";
    out << "c vars 1.." << f.states * f.n_points << ": outputs (true = +1), row-major\n";
    out << "c next " << f.states * f.n_points * f.states
        << " vars: one-hot transitions (state, point, target)\n";
    out << "p cnf " << f.n_vars << " " << f.clauses.size() << "\n";
    for (const auto& cl : f.clauses) {
        for (int lit : cl) out << lit << " ";
        out << "0\n";
    }
    out.close();

    nlohmann::ordered_json meta;
    meta["format"] = "cnf-meta";
    meta["structure"] = f.structure;
    meta["predictions"] = prediction_set_name(f.preds);
    meta["states"] = f.states;
    meta["points"] = f.n_points;
    meta["variables"] = f.n_vars;
    meta["clauses"] = f.clauses.size();
    meta["symmetry_clauses"] = f.symmetry_clauses;
    std::string meta_path = path + ".meta.json";
    std::ofstream mout(meta_path);
    if (!mout) throw Error("cannot write CNF metadata '" + meta_path + "'");
    mout << meta.dump(2) << "\n";
    return meta_path;
}

MealyMachine machine_from_model(const CnfFormula& f, const std::vector<bool>& model) {
    MealyMachine m;
    m.structure_ref = f.structure;
    m.state_count = f.states;
    m.output.assign(f.states, std::vector<Sign>(f.n_points, Sign::plus));
    m.update.assign(f.states, std::vector<int>(f.n_points, 0));
    for (int st = 0; st < f.states; ++st)
        for (int p = 0; p < f.n_points; ++p) {
            m.output[st][p] = model[f.out_var(st, p)] ? Sign::plus : Sign::minus;
            int target = -1;
            for (int t = 0; t < f.states; ++t)
                if (model[f.tr_var(st, p, t)]) target = t;
            if (target < 0) throw Error("model has no transition for a (state, point) pair");
            m.update[st][p] = target;
        }
    return m;
}

MealyMachine decode_cnf_model(const std::string& meta_text, const std::string& model_text) {
    nlohmann::json meta = nlohmann::json::parse(meta_text);
    if (meta.value("format", "") != "cnf-meta") throw Error("not a cnf-meta file");
    CnfFormula f;
    f.structure = meta.at("structure").get<std::string>();
    auto preds = prediction_set_from_name(meta.at("predictions").get<std::string>());
    if (!preds) throw Error("unknown prediction set in cnf-meta");
    f.preds = *preds;
    f.states = meta.at("states").get<int>();
    f.n_points = meta.at("points").get<int>();
    f.n_vars = meta.at("variables").get<int>();

    std::vector<bool> model(size_t(f.n_vars) + 1, false);
    std::istringstream in(model_text);
    std::string tok;
    while (in >> tok) {
        if (tok == "v" || tok == "s" || tok == "SAT" || tok == "SATISFIABLE") continue;
        long lit = 0;
        try {
            lit = std::stol(tok);
        } catch (...) {
            continue;
        }
        if (lit == 0) continue;
        size_t var = size_t(lit < 0 ? -lit : lit);
        if (var <= size_t(f.n_vars)) model[var] = lit > 0;
    }
    MealyMachine m = machine_from_model(f, model);
    m.validate(build_structure(m.structure_ref));
    return m;
}

}  // namespace ctxmem
