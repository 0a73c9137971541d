#include "ctxmem/digraph.hpp"

#include <algorithm>
#include <deque>

namespace ctxmem {

void Digraph::add_arc(int u, int v) {
    if (u < 0 || v < 0 || u >= vertex_count() || v >= vertex_count())
        throw Error("arc endpoint out of range");
    if (u == v) throw Error("self-loop arcs are not allowed");
    auto& row = out_[u];
    auto it = std::lower_bound(row.begin(), row.end(), v);
    if (it == row.end() || *it != v) row.insert(it, v);
}

bool Digraph::has_arc(int u, int v) const {
    const auto& row = out_[u];
    return std::binary_search(row.begin(), row.end(), v);
}

int Digraph::arc_count() const {
    int n = 0;
    for (const auto& row : out_) n += static_cast<int>(row.size());
    return n;
}

std::vector<std::vector<int>> scc(const Digraph& d) {
    const int n = d.vertex_count();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int next_index = 0;

    // iterative Tarjan
    struct Frame {
        int v;
        size_t child;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            const auto& adj = d.out_neighbors(f.v);
            if (f.child < adj.size()) {
                int w = adj[f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    std::vector<int> c;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        c.push_back(w);
                        if (w == f.v) break;
                    }
                    std::sort(c.begin(), c.end());
                    comps.push_back(std::move(c));
                }
                int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

Condensation condensation(const Digraph& d) {
    Condensation c;
    c.components = scc(d);
    c.component_of.assign(d.vertex_count(), -1);
    for (size_t i = 0; i < c.components.size(); ++i)
        for (int v : c.components[i]) c.component_of[v] = static_cast<int>(i);
    c.graph = Digraph(static_cast<int>(c.components.size()));
    for (int u = 0; u < d.vertex_count(); ++u)
        for (int v : d.out_neighbors(u))
            if (c.component_of[u] != c.component_of[v])
                c.graph.add_arc(c.component_of[u], c.component_of[v]);
    return c;
}

std::vector<int> reachable(const Digraph& d, const std::vector<int>& from) {
    std::vector<bool> seen(d.vertex_count(), false);
    std::deque<int> queue;
    for (int v : from) {
        if (v < 0 || v >= d.vertex_count()) throw Error("seed vertex out of range");
        if (!seen[v]) {
            seen[v] = true;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int w : d.out_neighbors(v))
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
    }
    std::vector<int> out;
    for (int v = 0; v < d.vertex_count(); ++v)
        if (seen[v]) out.push_back(v);
    return out;
}

int CommutingDigraph::vertex_id(int state, int point) const {
    auto it = std::lower_bound(region.begin(), region.end(), point);
    if (it == region.end() || *it != point) return -1;
    int col = static_cast<int>(it - region.begin());
    int id = state * static_cast<int>(region.size()) + col;
    return id < static_cast<int>(vertices.size()) ? id : -1;
}

CommutingDigraph commuting_digraph(const MealyMachine& m, const IncidenceStructure& s,
                                   const std::vector<int>& restriction) {
    for (size_t i = 0; i < restriction.size(); ++i)
        for (size_t j = i + 1; j < restriction.size(); ++j)
            if (!compatible(s, restriction[i], restriction[j]))
                throw Error("restriction set contains an incompatible pair: " +
                            s.points[restriction[i]].name + "," + s.points[restriction[j]].name);

    CommutingDigraph cd;
    cd.restriction = restriction;
    std::sort(cd.restriction.begin(), cd.restriction.end());
    cd.machine_ref = m.structure_ref + "-machine";
    cd.structure_ref = s.name;
    for (int p = 0; p < s.point_count(); ++p) {
        bool ok = true;
        for (int r : cd.restriction)
            if (!compatible(s, p, r)) ok = false;
        if (ok) cd.region.push_back(p);
    }
    const int cols = static_cast<int>(cd.region.size());
    for (int st = 0; st < m.state_count; ++st)
        for (int c = 0; c < cols; ++c) cd.vertices.push_back({st, cd.region[c]});

    cd.base = Digraph(static_cast<int>(cd.vertices.size()));
    for (int st = 0; st < m.state_count; ++st)
        for (int c = 0; c < cols; ++c) {
            int from = st * cols + c;
            int target = m.update[st][cd.region[c]];
            for (int c2 = 0; c2 < cols; ++c2) {
                int to = target * cols + c2;
                if (to != from) cd.base.add_arc(from, to);
            }
        }
    return cd;
}

SinkReport strong_sinks(const CommutingDigraph& cd, const MealyMachine& m) {
    Condensation c = condensation(cd.base);
    const int cols = static_cast<int>(cd.region.size());
    SinkReport report;
    for (int comp = 0; comp < c.graph.vertex_count(); ++comp) {
        if (!c.graph.out_neighbors(comp).empty()) continue;
        SinkInfo sink;
        sink.vertex_ids = c.components[comp];
        std::vector<bool> state_present(m.state_count, false);
        for (int v : sink.vertex_ids) state_present[cd.vertices[v].first] = true;
        for (int st = 0; st < m.state_count; ++st)
            if (state_present[st]) sink.states.push_back(st);
        // a strongly connected sink must be a union of entire states
        if (sink.vertex_ids.size() != sink.states.size() * size_t(cols))
            throw Error("internal consistency failure: a strongly connected sink is not a "
                        "union of entire states");
        sink.outputs.assign(cols, std::nullopt);
        sink.outputs_well_defined = true;
        for (int col = 0; col < cols; ++col) {
            Sign first = m.output[sink.states.front()][cd.region[col]];
            bool constant = true;
            for (int st : sink.states)
                if (m.output[st][cd.region[col]] != first) constant = false;
            if (constant)
                sink.outputs[col] = first;
            else
                sink.outputs_well_defined = false;
        }
        report.sinks.push_back(std::move(sink));
    }
    std::sort(report.sinks.begin(), report.sinks.end(),
              [](const SinkInfo& a, const SinkInfo& b) {
                  return a.vertex_ids.front() < b.vertex_ids.front();
              });
    return report;
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string to_dot(const Digraph& d, const DotOptions& opt) {
    std::string out = "digraph " + opt.graph_name + " {\n";
    for (int v = 0; v < d.vertex_count(); ++v) {
        std::string label = opt.label ? opt.label(v) : std::to_string(v);
        out += "  n" + std::to_string(v) + " [label=\"" + dot_escape(label) + "\"";
        if (opt.fillcolor) {
            std::string fill = opt.fillcolor(v);
            if (!fill.empty()) out += ", style=filled, fillcolor=" + fill;
        }
        out += "];\n";
    }
    for (int u = 0; u < d.vertex_count(); ++u)
        for (int v : d.out_neighbors(u))
            out += "  n" + std::to_string(u) + " -> n" + std::to_string(v) + ";\n";
    out += "}\n";
    return out;
}

std::string commuting_digraph_dot(const CommutingDigraph& cd, const MealyMachine& m,
                                  const IncidenceStructure& s, bool condense) {
    auto vertex_label = [&](int v) {
        auto [st, p] = cd.vertices[v];
        return "(" + std::to_string(st + 1) + "," + s.points[p].name + ")";
    };
    auto vertex_color = [&](int v) -> std::string {
        auto [st, p] = cd.vertices[v];
        return m.output[st][p] == Sign::plus ? "palegreen" : "lightcoral";
    };
    if (!condense) {
        DotOptions opt;
        opt.graph_name = "commuting";
        opt.label = vertex_label;
        opt.fillcolor = vertex_color;
        return to_dot(cd.base, opt);
    }
    Condensation c = condensation(cd.base);
    DotOptions opt;
    opt.graph_name = "condensation";
    opt.label = [&](int comp) {
        std::string label;
        for (int v : c.components[comp]) {
            if (!label.empty()) label += "\\n";
            label += vertex_label(v);
        }
        return label;
    };
    std::string text = to_dot(c.graph, opt);
    // boxes read better for component nodes
    text.insert(text.find('\n') + 1, "  node [shape=box];\n");
    return text;
}

}  // namespace ctxmem
