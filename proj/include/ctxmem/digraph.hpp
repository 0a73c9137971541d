#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctxmem/machine.hpp"

namespace ctxmem {

/// Plain directed graph on vertex indices. Self-loops are rejected.
class Digraph {
public:
    explicit Digraph(int vertex_count = 0) : out_(vertex_count) {}

    int vertex_count() const { return static_cast<int>(out_.size()); }
    void add_arc(int u, int v);
    bool has_arc(int u, int v) const;
    const std::vector<int>& out_neighbors(int u) const { return out_[u]; }
    int arc_count() const;

private:
    std::vector<std::vector<int>> out_;  // sorted, duplicate-free
};

/// Strongly connected components in canonical order: each component's
/// vertices ascending, components ordered by smallest vertex.
std::vector<std::vector<int>> scc(const Digraph& d);

struct Condensation {
    Digraph graph;                            // acyclic
    std::vector<std::vector<int>> components;  // canonical scc order
    std::vector<int> component_of;             // vertex -> component id
};

Condensation condensation(const Digraph& d);

/// Forward reachability including the seed set, ascending.
std::vector<int> reachable(const Digraph& d, const std::vector<int>& from);

/// The commuting digraph of a machine restricted to a compatible point set
/// R: vertices (S, p) for p compatible with every member of R, an arc
/// (S,p) -> (S',p') whenever update(S,p) = S' except the exact self-pair.
struct CommutingDigraph {
    Digraph base;
    std::vector<std::pair<int, int>> vertices;  // (state, point) per vertex id
    std::vector<int> restriction;               // R, sorted point ids
    std::vector<int> region;                    // C(R), sorted point ids
    std::string machine_ref;
    std::string structure_ref;

    int vertex_id(int state, int point) const;  // -1 when absent
};

CommutingDigraph commuting_digraph(const MealyMachine& m, const IncidenceStructure& s,
                                   const std::vector<int>& restriction);

/// One strongly connected sink, reported as the set of entire states it
/// contains. outputs[i] is the sink-wide output of region point i when that
/// output is constant over the sink's states.
struct SinkInfo {
    std::vector<int> states;
    std::vector<int> vertex_ids;
    std::vector<std::optional<Sign>> outputs;  // indexed like cd.region
    bool outputs_well_defined = false;          // all region points constant
};

struct SinkReport {
    std::vector<SinkInfo> sinks;  // canonical order, pairwise disjoint
};

/// Sinks of the condensation. Verifies that each is a union of entire
/// states and throws on violation (that would be an internal bug).
SinkReport strong_sinks(const CommutingDigraph& cd, const MealyMachine& m);

struct DotOptions {
    std::string graph_name = "G";
    std::function<std::string(int)> label;      // defaults to the vertex index
    std::function<std::string(int)> fillcolor;  // empty string = unstyled
};

/// Deterministic DOT text.
std::string to_dot(const Digraph& d, const DotOptions& opt = {});

/// DOT for a commuting digraph: vertices labeled "(i,p)", green fill for
/// output +1 and red for -1. With condense=true, emits the condensation
/// with each node listing its component's members.
std::string commuting_digraph_dot(const CommutingDigraph& cd, const MealyMachine& m,
                                  const IncidenceStructure& s, bool condense);

}  // namespace ctxmem
