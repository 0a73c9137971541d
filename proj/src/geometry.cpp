#include "ctxmem/geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <climits>
#include <numeric>
#include <set>

#include "json.hpp"

namespace ctxmem {

namespace {

int popcount32(uint32_t v) { return std::popcount(v); }

std::vector<PointInfo> make_points(const std::vector<std::pair<std::string, std::string>>& spec) {
    std::vector<PointInfo> pts;
    pts.reserve(spec.size());
    for (size_t i = 0; i < spec.size(); ++i) {
        PointInfo p;
        p.id = static_cast<int>(i);
        p.name = spec[i].first;
        if (!spec[i].second.empty()) p.label = parse_pauli(spec[i].second);
        pts.push_back(std::move(p));
    }
    return pts;
}

}  // namespace

int IncidenceStructure::point_by_name(std::string_view name) const {
    for (const auto& p : points)
        if (p.name == name) return p.id;
    throw Error("unknown point '" + std::string(name) + "' in structure '" + this->name + "'");
}

const std::vector<int>& IncidenceStructure::blocks_of_point(int p) const {
    if (p < 0 || p >= point_count()) throw Error("point id out of range");
    return point_blocks_[p];
}

void IncidenceStructure::finalize() {
    point_blocks_.assign(points.size(), {});
    compat_.assign(points.size(), 0);
    for (size_t b = 0; b < blocks.size(); ++b) {
        for (int p : blocks[b]) {
            if (p < 0 || p >= point_count()) throw Error("block refers to unknown point id");
            point_blocks_[p].push_back(static_cast<int>(b));
        }
    }
    for (int p = 0; p < point_count(); ++p) {
        compat_[p] |= 1u << p;
        for (int b : point_blocks_[p])
            for (int q : blocks[b]) compat_[p] |= 1u << q;
    }
}

void IncidenceStructure::validate(bool require_regular) const {
    if (points.empty()) throw Error("structure has no points");
    if (points.size() > 24) throw Error("structures above 24 points are not supported");
    for (size_t i = 0; i < points.size(); ++i)
        if (points[i].id != static_cast<int>(i))
            throw Error("point ids must be 0..n-1 in order");
    if (block_signs.size() != blocks.size())
        throw Error("sign count does not match block count");
    for (const auto& b : blocks) {
        if (b.size() < 2) throw Error("every block needs at least 2 points");
        if (!std::is_sorted(b.begin(), b.end()) ||
            std::adjacent_find(b.begin(), b.end()) != b.end())
            throw Error("block point lists must be sorted and duplicate-free");
        for (int p : b)
            if (p < 0 || p >= point_count()) throw Error("block refers to unknown point id");
    }
    for (int p = 0; p < point_count(); ++p)
        if (point_blocks_[p].empty())
            throw Error("point " + points[p].name + " lies on no block");
    if (require_regular) {
        size_t bs = blocks.front().size();
        for (const auto& b : blocks)
            if (b.size() != bs) throw Error("structure is not block-regular");
        size_t pd = point_blocks_.front().size();
        for (const auto& pb : point_blocks_)
            if (pb.size() != pd) throw Error("structure is not point-regular");
    }

    bool any_label = false, all_label = true;
    for (const auto& p : points) (p.label ? any_label : all_label) = p.label.has_value();
    if (any_label && !all_label) throw Error("either all points carry Pauli labels or none");
    if (all_label && any_label) {
        for (size_t b = 0; b < blocks.size(); ++b) {
            std::vector<PauliOperator> ops;
            for (int p : blocks[b]) ops.push_back(*points[p].label);
            for (size_t i = 0; i < ops.size(); ++i)
                for (size_t j = i + 1; j < ops.size(); ++j)
                    if (!commutes(ops[i], ops[j]))
                        throw Error("block " + std::to_string(b) + " contains non-commuting labels");
            if (context_sign(ops) != block_signs[b])
                throw Error("block " + std::to_string(b) + " sign does not match its labels");
        }
        // labels realize compatibility: sharing a block must coincide with commuting
        for (int p = 0; p < point_count(); ++p)
            for (int q = p + 1; q < point_count(); ++q)
                if (compatible(*this, p, q) != commutes(*points[p].label, *points[q].label))
                    throw Error("compatibility of " + points[p].name + "," + points[q].name +
                                " disagrees with label commutation");
    }
}

const std::vector<std::string>& builtin_structure_names() {
    static const std::vector<std::string> names = {"square", "pentagram", "doily"};
    return names;
}

IncidenceStructure build_structure(std::string_view name) {
    IncidenceStructure s;
    s.name = std::string(name);
    if (name == "square") {
        s.points = make_points({{"A", "ZI"},
                                {"B", "IZ"},
                                {"C", "ZZ"},
                                {"a", "IX"},
                                {"b", "XI"},
                                {"c", "XX"},
                                {"alpha", "ZX"},
                                {"beta", "XZ"},
                                {"gamma", "YY"}});
        s.blocks = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6}, {1, 4, 7}, {2, 5, 8}};
        s.block_signs = {Sign::plus, Sign::plus, Sign::plus, Sign::plus, Sign::plus, Sign::minus};
    } else if (name == "pentagram") {
        s.points = make_points({{"A", "XXZ"},
                                {"B", "XZX"},
                                {"b_c", "IIX"},
                                {"C", "ZXX"},
                                {"D", "ZZZ"},
                                {"b_d", "IZI"},
                                {"a_b", "XII"},
                                {"a_d", "IIZ"},
                                {"c_d", "ZII"},
                                {"a_c", "IXI"}});
        s.blocks = {{0, 6, 7, 9}, {1, 2, 5, 6}, {2, 3, 8, 9}, {4, 5, 7, 8}, {0, 1, 3, 4}};
        s.block_signs = {Sign::plus, Sign::plus, Sign::plus, Sign::plus, Sign::minus};
    } else if (name == "doily") {
        static const char* const sym = "IXYZ";
        std::vector<std::pair<std::string, std::string>> pts;
        auto idx = [](int k, int l) {
            // row-major over the chi grid, chi00 excluded
            return 4 * k + l - 1;
        };
        for (int k = 0; k <= 3; ++k)
            for (int l = 0; l <= 3; ++l) {
                if (k == 0 && l == 0) continue;
                std::string nm = "chi" + std::to_string(k) + std::to_string(l);
                pts.push_back({nm, std::string{sym[k], sym[l]}});
            }
        s.points = make_points(pts);
        for (int k = 1; k <= 3; ++k)
            for (int l = 1; l <= 3; ++l) {
                std::vector<int> b = {idx(k, 0), idx(k, l), idx(0, l)};
                std::sort(b.begin(), b.end());
                s.blocks.push_back(b);
                s.block_signs.push_back(Sign::plus);
            }
        auto add = [&](int a1, int b1, int a2, int b2, int a3, int b3, Sign sg) {
            std::vector<int> b = {idx(a1, b1), idx(a2, b2), idx(a3, b3)};
            std::sort(b.begin(), b.end());
            s.blocks.push_back(b);
            s.block_signs.push_back(sg);
        };
        add(1, 1, 2, 3, 3, 2, Sign::plus);
        add(1, 2, 2, 1, 3, 3, Sign::plus);
        add(1, 3, 2, 2, 3, 1, Sign::plus);
        add(1, 1, 2, 2, 3, 3, Sign::minus);
        add(1, 2, 2, 3, 3, 1, Sign::minus);
        add(1, 3, 2, 1, 3, 2, Sign::minus);
    } else {
        throw Error("unknown structure '" + std::string(name) + "'");
    }
    s.finalize();
    s.validate(/*require_regular=*/true);
    return s;
}

bool compatible(const IncidenceStructure& s, int p, int q) {
    if (p < 0 || p >= s.point_count() || q < 0 || q >= s.point_count())
        throw Error("point id out of range");
    return (s.compat_[p] >> q) & 1u;
}

uint32_t compatible_mask(const IncidenceStructure& s, int p) {
    if (p < 0 || p >= s.point_count()) throw Error("point id out of range");
    return s.compat_[p];
}

std::vector<int> violated_blocks(const IncidenceStructure& s, const Assignment& a) {
    if (a.size() != static_cast<size_t>(s.point_count()))
        throw Error("assignment must be total over the structure's points");
    std::vector<int> out;
    for (int b = 0; b < s.block_count(); ++b) {
        Sign prod = Sign::plus;
        for (int p : s.blocks[b]) prod = prod * a[p];
        if (prod != s.block_signs[b]) out.push_back(b);
    }
    return out;
}

namespace {

struct BlockMasks {
    std::vector<uint32_t> mask;
    std::vector<int> negative;  // 1 if block sign is -1
};

BlockMasks block_masks(const IncidenceStructure& s) {
    BlockMasks bm;
    for (int b = 0; b < s.block_count(); ++b) {
        uint32_t m = 0;
        for (int p : s.blocks[b]) m |= 1u << p;
        bm.mask.push_back(m);
        bm.negative.push_back(s.block_signs[b] == Sign::minus ? 1 : 0);
    }
    return bm;
}

// bit p set in `a` means the point is assigned -1
int violated_count(const BlockMasks& bm, uint32_t a) {
    int c = 0;
    for (size_t b = 0; b < bm.mask.size(); ++b)
        c += (popcount32(a & bm.mask[b]) & 1) != bm.negative[b];
    return c;
}

uint32_t violated_mask(const BlockMasks& bm, uint32_t a) {
    uint32_t m = 0;
    for (size_t b = 0; b < bm.mask.size(); ++b)
        if ((popcount32(a & bm.mask[b]) & 1) != bm.negative[b]) m |= 1u << b;
    return m;
}

Assignment assignment_from_bits(const IncidenceStructure& s, uint32_t a) {
    Assignment out(s.point_count(), Sign::plus);
    for (int p = 0; p < s.point_count(); ++p)
        if ((a >> p) & 1u) out[p] = Sign::minus;
    return out;
}

}  // namespace

DegreeResult contextuality_degree(const IncidenceStructure& s, ExecMode mode) {
    if (s.point_count() > 24)
        throw Error("structure too large for exhaustive contextuality degree");
    const BlockMasks bm = block_masks(s);
    const int64_t total = int64_t(1) << s.point_count();

    int best = INT_MAX;
    int64_t best_a = 0;
    if (mode == ExecMode::serial) {
        for (int64_t a = 0; a < total; ++a) {
            int c = violated_count(bm, uint32_t(a));
            if (c < best) {
                best = c;
                best_a = a;
            }
        }
    } else {
#pragma omp parallel
        {
            int lbest = INT_MAX;
            int64_t lbest_a = 0;
#pragma omp for schedule(static)
            for (int64_t a = 0; a < total; ++a) {
                int c = violated_count(bm, uint32_t(a));
                if (c < lbest) {
                    lbest = c;
                    lbest_a = a;
                }
            }
#pragma omp critical
            {
                if (lbest < best || (lbest == best && lbest_a < best_a)) {
                    best = lbest;
                    best_a = lbest_a;
                }
            }
        }
    }
    return DegreeResult{best, assignment_from_bits(s, uint32_t(best_a))};
}

WitnessBounds witness_bounds(const IncidenceStructure& s, ExecMode mode) {
    DegreeResult d = contextuality_degree(s, mode);
    return WitnessBounds{s.block_count() - 2 * d.degree, s.block_count()};
}

std::map<int, std::vector<std::vector<int>>> minimal_contradiction_sets(
    const IncidenceStructure& s, ExecMode mode) {
    if (s.point_count() > 24)
        throw Error("structure too large for exhaustive enumeration");
    if (s.block_count() > 20) throw Error("too many blocks for violated-set tabulation");
    const BlockMasks bm = block_masks(s);
    const int64_t total = int64_t(1) << s.point_count();
    const size_t nsets = size_t(1) << s.block_count();

    std::vector<uint8_t> achieved(nsets, 0);
    if (mode == ExecMode::serial) {
        for (int64_t a = 0; a < total; ++a) achieved[violated_mask(bm, uint32_t(a))] = 1;
    } else {
#pragma omp parallel
        {
            std::vector<uint8_t> local(nsets, 0);
#pragma omp for schedule(static)
            for (int64_t a = 0; a < total; ++a) local[violated_mask(bm, uint32_t(a))] = 1;
#pragma omp critical
            for (size_t i = 0; i < nsets; ++i) achieved[i] |= local[i];
        }
    }

    // collect achieved masks by ascending popcount, then keep the
    // inclusion-minimal ones
    std::vector<uint32_t> masks;
    for (size_t m = 0; m < nsets; ++m)
        if (achieved[m]) masks.push_back(uint32_t(m));
    std::sort(masks.begin(), masks.end(), [](uint32_t a, uint32_t b) {
        int pa = popcount32(a), pb = popcount32(b);
        return pa != pb ? pa < pb : a < b;
    });
    std::vector<uint32_t> minimal;
    for (uint32_t m : masks) {
        bool dominated = false;
        for (uint32_t q : minimal)
            if ((q & m) == q && q != m) {
                dominated = true;
                break;
            }
        if (!dominated) minimal.push_back(m);
    }

    std::map<int, std::vector<std::vector<int>>> out;
    for (uint32_t m : minimal) {
        std::vector<int> ids;
        for (int b = 0; b < s.block_count(); ++b)
            if ((m >> b) & 1u) ids.push_back(b);
        out[int(ids.size())].push_back(std::move(ids));
    }
    for (auto& [sz, lists] : out) std::sort(lists.begin(), lists.end());
    return out;
}

namespace {

// Backtracking point-bijection search between structures. Prunes on the
// collinearity relation and accepts only maps sending blocks to blocks
// (with equal signs when requested).
struct IsoSearch {
    const IncidenceStructure& from;
    const IncidenceStructure& to;
    bool match_signs;
    bool collect_all;
    std::vector<std::vector<int>> found;
    std::vector<int> map;   // from-point -> to-point, -1 unassigned
    std::vector<bool> used;

    IsoSearch(const IncidenceStructure& f, const IncidenceStructure& t, bool signs, bool all)
        : from(f), to(t), match_signs(signs), collect_all(all) {
        map.assign(from.point_count(), -1);
        used.assign(to.point_count(), false);
    }

    bool accept() {
        std::set<std::vector<int>> to_blocks;
        for (int b = 0; b < to.block_count(); ++b) to_blocks.insert(to.blocks[b]);
        for (int b = 0; b < from.block_count(); ++b) {
            std::vector<int> img;
            for (int p : from.blocks[b]) img.push_back(map[p]);
            std::sort(img.begin(), img.end());
            if (!to_blocks.count(img)) return false;
            if (match_signs) {
                bool ok = false;
                for (int tb = 0; tb < to.block_count(); ++tb)
                    if (to.blocks[tb] == img && to.block_signs[tb] == from.block_signs[b]) ok = true;
                if (!ok) return false;
            }
        }
        return true;
    }

    bool extend(int p) {
        if (p == from.point_count()) {
            if (!accept()) return false;
            found.push_back(map);
            return !collect_all;  // stop at first when not collecting
        }
        for (int q = 0; q < to.point_count(); ++q) {
            if (used[q]) continue;
            bool ok = true;
            for (int r = 0; r < p && ok; ++r)
                if (compatible(from, p, r) != compatible(to, q, map[r])) ok = false;
            if (!ok) continue;
            map[p] = q;
            used[q] = true;
            if (extend(p + 1)) return true;
            map[p] = -1;
            used[q] = false;
        }
        return false;
    }
};

}  // namespace

int neighborhood_cover(const IncidenceStructure& s, int p, int q) {
    if (p == q) throw Error("neighborhood_cover requires two distinct points");
    uint32_t cover = 0;
    for (int b : s.blocks_of_point(p))
        for (int r : s.blocks[b]) cover |= 1u << r;
    for (int b : s.blocks_of_point(q))
        for (int r : s.blocks[b]) cover |= 1u << r;
    return popcount32(cover);
}

AutomorphismGroup automorphisms(const IncidenceStructure& s, AutomorphismKind kind) {
    if (s.point_count() > 15) throw Error("automorphism search limited to 15 points");
    IsoSearch search(s, s, kind == AutomorphismKind::sign_preserving, /*collect_all=*/true);
    search.extend(0);
    AutomorphismGroup g;
    g.kind = kind;
    g.elements = std::move(search.found);
    std::sort(g.elements.begin(), g.elements.end());

    // greedy generating subset: grow a closure until it covers the group
    auto compose = [](const std::vector<int>& a, const std::vector<int>& b) {
        std::vector<int> c(a.size());
        for (size_t i = 0; i < a.size(); ++i) c[i] = a[b[i]];
        return c;
    };
    std::set<std::vector<int>> closure;
    std::vector<int> identity(s.point_count());
    std::iota(identity.begin(), identity.end(), 0);
    closure.insert(identity);
    for (const auto& el : g.elements) {
        if (closure.count(el)) continue;
        g.generators.push_back(el);
        std::vector<std::vector<int>> frontier = {el};
        while (!frontier.empty()) {
            std::vector<std::vector<int>> next;
            for (const auto& f : frontier) {
                std::vector<std::vector<int>> base(closure.begin(), closure.end());
                for (const auto& c : base) {
                    for (const auto& prod : {compose(f, c), compose(c, f)}) {
                        if (closure.insert(prod).second) next.push_back(prod);
                    }
                }
            }
            frontier = std::move(next);
        }
        if (closure.size() == g.elements.size()) break;
    }
    return g;
}

DuadModel doily_duad_model() {
    DuadModel m;
    // blocks: duads of {1..6} in lexicographic order
    for (int i = 1; i <= 6; ++i)
        for (int j = i + 1; j <= 6; ++j) m.block_duads.push_back({i, j});
    // points: partitions of {1..6} into three duads, lexicographically sorted
    std::vector<std::array<int, 6>> synthemes;
    for (int a = 2; a <= 6; ++a) {  // duad containing 1
        std::vector<int> rest;
        for (int v = 2; v <= 6; ++v)
            if (v != a) rest.push_back(v);
        // rest has 4 elements; pair the smallest with each of the others
        for (int pick = 1; pick < 4; ++pick) {
            std::array<int, 6> syn{1, a, rest[0], rest[pick], 0, 0};
            std::vector<int> last;
            for (int t = 1; t < 4; ++t)
                if (t != pick) last.push_back(rest[t]);
            syn[4] = last[0];
            syn[5] = last[1];
            synthemes.push_back(syn);
        }
    }
    std::sort(synthemes.begin(), synthemes.end());
    m.point_synthemes = synthemes;

    IncidenceStructure& s = m.structure;
    s.name = "doily-duads";
    for (size_t i = 0; i < synthemes.size(); ++i) {
        PointInfo p;
        p.id = static_cast<int>(i);
        const auto& y = synthemes[i];
        p.name = std::to_string(y[0]) + std::to_string(y[1]) + "." + std::to_string(y[2]) +
                 std::to_string(y[3]) + "." + std::to_string(y[4]) + std::to_string(y[5]);
        s.points.push_back(std::move(p));
    }
    for (const auto& duad : m.block_duads) {
        std::vector<int> blk;
        for (size_t i = 0; i < synthemes.size(); ++i) {
            const auto& y = synthemes[i];
            for (int d = 0; d < 3; ++d)
                if (y[2 * d] == duad[0] && y[2 * d + 1] == duad[1]) blk.push_back(int(i));
        }
        std::sort(blk.begin(), blk.end());
        s.blocks.push_back(blk);
        s.block_signs.push_back(Sign::plus);  // placeholder until pulled back
    }
    s.finalize();

    IncidenceStructure doily = build_structure("doily");
    IsoSearch search(s, doily, /*match_signs=*/false, /*collect_all=*/false);
    if (!search.extend(0) || search.found.empty())
        throw Error("no incidence isomorphism from the duad model onto the doily");
    m.point_map = search.found.front();

    // block correspondence and sign pull-back
    m.block_map.assign(s.block_count(), -1);
    for (int b = 0; b < s.block_count(); ++b) {
        std::vector<int> img;
        for (int p : s.blocks[b]) img.push_back(m.point_map[p]);
        std::sort(img.begin(), img.end());
        for (int db = 0; db < doily.block_count(); ++db)
            if (doily.blocks[db] == img) m.block_map[b] = db;
        if (m.block_map[b] < 0) throw Error("duad block image is not a doily block");
        s.block_signs[b] = doily.block_signs[m.block_map[b]];
    }
    s.validate(/*require_regular=*/true);
    return m;
}

std::vector<PmSquare> pm_square_decomposition() {
    DuadModel duads = doily_duad_model();
    IncidenceStructure doily = build_structure("doily");

    auto duad_block_id = [&](int i, int j) {
        for (size_t b = 0; b < duads.block_duads.size(); ++b)
            if (duads.block_duads[b][0] == i && duads.block_duads[b][1] == j)
                return static_cast<int>(b);
        throw Error("missing duad block");
    };

    std::vector<PmSquare> out;
    // 3-subsets of {1..6} containing 1 enumerate each 3+3 partition once
    for (int x = 2; x <= 6; ++x)
        for (int y = x + 1; y <= 6; ++y) {
            PmSquare sq;
            sq.row_set = {1, x, y};
            std::vector<int> comp;
            for (int v = 2; v <= 6; ++v)
                if (v != x && v != y) comp.push_back(v);
            sq.column_set = {comp[0], comp[1], comp[2]};

            auto add_triple = [&](const std::array<int, 3>& t) {
                std::array<std::array<int, 2>, 3> pairs = {
                    {{t[0], t[1]}, {t[0], t[2]}, {t[1], t[2]}}};
                for (auto& pr : pairs) {
                    if (pr[0] > pr[1]) std::swap(pr[0], pr[1]);
                    sq.duad_blocks.push_back(pr);
                    sq.doily_blocks.push_back(duads.block_map[duad_block_id(pr[0], pr[1])]);
                }
            };
            add_triple(sq.row_set);
            add_triple(sq.column_set);

            uint32_t pts = 0;
            for (int db : sq.doily_blocks) {
                for (int p : doily.blocks[db]) pts |= 1u << p;
                if (doily.block_signs[db] == Sign::minus) ++sq.negative_block_count;
            }
            for (int p = 0; p < doily.point_count(); ++p)
                if ((pts >> p) & 1u) sq.doily_points.push_back(p);
            out.push_back(std::move(sq));
        }
    return out;
}

std::string structure_to_json(const IncidenceStructure& s) {
    nlohmann::ordered_json j;
    j["format"] = "incidence-structure";
    j["name"] = s.name;
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : s.points) {
        nlohmann::ordered_json jp;
        jp["id"] = p.id;
        jp["name"] = p.name;
        if (p.label) jp["pauli"] = format_pauli(*p.label);
        j["points"].push_back(jp);
    }
    j["blocks"] = s.blocks;
    j["signs"] = nlohmann::ordered_json::array();
    for (Sign sg : s.block_signs) j["signs"].push_back(to_int(sg));
    return j.dump(2) + "\n";
}

IncidenceStructure structure_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("structure file is not valid JSON: ") + e.what());
    }
    IncidenceStructure s;
    try {
        if (j.value("format", "") != "incidence-structure")
            throw Error("missing or wrong \"format\" field");
        s.name = j.at("name").get<std::string>();
        for (const auto& jp : j.at("points")) {
            PointInfo p;
            p.id = jp.at("id").get<int>();
            p.name = jp.at("name").get<std::string>();
            if (jp.contains("pauli")) p.label = parse_pauli(jp.at("pauli").get<std::string>());
            s.points.push_back(std::move(p));
        }
        s.blocks = j.at("blocks").get<std::vector<std::vector<int>>>();
        for (auto& b : s.blocks) std::sort(b.begin(), b.end());
        for (const auto& v : j.at("signs")) s.block_signs.push_back(sign_from_int(v.get<int>()));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed structure file: ") + e.what());
    }
    s.finalize();
    s.validate();
    return s;
}

}  // namespace ctxmem
