#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxmem/pauli.hpp"

namespace ctxmem {

/// Whether an enumeration kernel runs on one thread (reference path) or
/// across OpenMP threads. Both paths return identical, canonically sorted
/// results.
enum class ExecMode { serial, parallel };

struct PointInfo {
    int id = 0;
    std::string name;
    std::optional<PauliOperator> label;
};

/// Points, blocks and block signs of a point-block incidence geometry.
/// Immutable after construction; compatibility of two points means sharing
/// a block.
struct IncidenceStructure {
    std::string name;
    std::vector<PointInfo> points;
    std::vector<std::vector<int>> blocks;  // sorted point ids
    std::vector<Sign> block_signs;

    int point_count() const { return static_cast<int>(points.size()); }
    int block_count() const { return static_cast<int>(blocks.size()); }

    /// Throws if a point name is unknown.
    int point_by_name(std::string_view name) const;

    /// Blocks through a point, in block order.
    const std::vector<int>& blocks_of_point(int p) const;

    /// Basic invariants: block sizes >= 2, every point covered, valid ids,
    /// sign count, and (when Pauli labels are present) per-block commutation
    /// with context_sign equal to the recorded block sign.
    void validate(bool require_regular = false) const;

    /// Call once after filling the fields.
    void finalize();

private:
    std::vector<std::vector<int>> point_blocks_;
    std::vector<uint32_t> compat_;  // bitmask per point, self bit included
    friend bool compatible(const IncidenceStructure&, int, int);
    friend uint32_t compatible_mask(const IncidenceStructure&, int);
};

const std::vector<std::string>& builtin_structure_names();

/// Build one of the built-in geometries: "square" (Peres-Mermin square),
/// "pentagram" (Mermin's pentagram) or "doily" (all 15 two-qubit Pauli
/// observables).
IncidenceStructure build_structure(std::string_view name);

/// True iff p and q share a block; a point is compatible with itself.
bool compatible(const IncidenceStructure& s, int p, int q);

/// Bitmask of points compatible with p (bit p included).
uint32_t compatible_mask(const IncidenceStructure& s, int p);

/// A total +/-1 assignment of the structure's points.
using Assignment = std::vector<Sign>;

/// Blocks whose assigned product differs from the block sign, ascending.
std::vector<int> violated_blocks(const IncidenceStructure& s, const Assignment& a);

struct DegreeResult {
    int degree = 0;
    Assignment witness;
};

/// Minimum number of violated blocks over all 2^|P| assignments, with the
/// lexicographically first witness attaining it. Exhaustive only; throws for
/// structures above 24 points.
DegreeResult contextuality_degree(const IncidenceStructure& s, ExecMode mode = ExecMode::parallel);

struct WitnessBounds {
    int classical_max = 0;
    int quantum_value = 0;
};

/// classical_max = |blocks| - 2*degree, quantum_value = |blocks|.
WitnessBounds witness_bounds(const IncidenceStructure& s, ExecMode mode = ExecMode::parallel);

/// Achievable violated-block sets that are minimal under inclusion, grouped
/// by size. Sets are sorted block-id lists; groups are sorted.
std::map<int, std::vector<std::vector<int>>> minimal_contradiction_sets(
    const IncidenceStructure& s, ExecMode mode = ExecMode::parallel);

/// The doily relabeled by duads: blocks are the 15 two-element subsets of
/// {1..6}, points the 15 partitions of {1..6} into three duads, and a block
/// contains a point iff its duad belongs to the partition.
struct DuadModel {
    IncidenceStructure structure;                 // signs pulled back from the Pauli doily
    std::vector<std::array<int, 2>> block_duads;  // duad per duad-model block id
    std::vector<std::array<int, 6>> point_synthemes;  // three duads, flattened, per point id
    std::vector<int> point_map;  // duad-model point id -> Pauli doily point id
    std::vector<int> block_map;  // duad-model block id -> Pauli doily block id
};

/// Builds the duad model together with an incidence-preserving bijection
/// onto build_structure("doily"). Throws if no isomorphism exists.
DuadModel doily_duad_model();

/// One Peres-Mermin square inside the doily: a 3+3 partition of {1..6}
/// giving six doily blocks (three "rows" and three "columns").
struct PmSquare {
    std::array<int, 3> row_set;     // elements whose duads form the rows
    std::array<int, 3> column_set;  // complement
    std::vector<std::array<int, 2>> duad_blocks;  // six duads, rows then columns
    std::vector<int> doily_blocks;                // corresponding doily block ids
    std::vector<int> doily_points;                // the nine points covered
    int negative_block_count = 0;
};

/// The ten partition squares of the doily.
std::vector<PmSquare> pm_square_decomposition();

/// Number of points lying on some block through p or through q. Requires
/// p != q.
int neighborhood_cover(const IncidenceStructure& s, int p, int q);

enum class AutomorphismKind { incidence, sign_preserving };

/// Point permutations mapping blocks to blocks (and, for sign_preserving,
/// preserving each block's sign).
struct AutomorphismGroup {
    std::vector<std::vector<int>> elements;    // all group elements, sorted; identity first
    std::vector<std::vector<int>> generators;  // a small generating subset
    AutomorphismKind kind = AutomorphismKind::incidence;
    size_t order() const { return elements.size(); }
};

AutomorphismGroup automorphisms(const IncidenceStructure& s,
                                AutomorphismKind kind = AutomorphismKind::incidence);

/// Structure file format (JSON text).
std::string structure_to_json(const IncidenceStructure& s);
IncidenceStructure structure_from_json(const std::string& text);

}  // namespace ctxmem
