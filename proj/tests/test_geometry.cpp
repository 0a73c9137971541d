#include <numeric>
#include <set>

#include "ctxmem/geometry.hpp"
#include "doctest.h"

using namespace ctxmem;

TEST_CASE("built-in structures have the advertised shape") {
    IncidenceStructure sq = build_structure("square");
    CHECK(sq.point_count() == 9);
    CHECK(sq.block_count() == 6);
    std::vector<int> sq_signs;
    for (Sign s : sq.block_signs) sq_signs.push_back(to_int(s));
    CHECK(sq_signs == std::vector<int>{1, 1, 1, 1, 1, -1});

    IncidenceStructure pent = build_structure("pentagram");
    CHECK(pent.point_count() == 10);
    CHECK(pent.block_count() == 5);
    int pent_neg = 0;
    for (Sign s : pent.block_signs) pent_neg += s == Sign::minus;
    CHECK(pent_neg == 1);
    // the negative line is {A,B,C,D}
    CHECK(pent.blocks[4] == std::vector<int>{pent.point_by_name("A"), pent.point_by_name("B"),
                                             pent.point_by_name("C"), pent.point_by_name("D")});

    IncidenceStructure doily = build_structure("doily");
    CHECK(doily.point_count() == 15);
    CHECK(doily.block_count() == 15);
    int doily_neg = 0;
    for (Sign s : doily.block_signs) doily_neg += s == Sign::minus;
    CHECK(doily_neg == 3);

    CHECK_THROWS_AS(build_structure("nonagram"), Error);
}

TEST_CASE("block labels commute and reproduce the recorded signs") {
    // validate() checks this; the builders run it, so constructing suffices,
    // but assert one case explicitly
    IncidenceStructure doily = build_structure("doily");
    for (int b = 0; b < doily.block_count(); ++b) {
        std::vector<PauliOperator> ops;
        for (int p : doily.blocks[b]) ops.push_back(*doily.points[p].label);
        CHECK(context_sign(ops) == doily.block_signs[b]);
    }
}

TEST_CASE("compatibility") {
    IncidenceStructure sq = build_structure("square");
    int A = sq.point_by_name("A"), B = sq.point_by_name("B"), a = sq.point_by_name("a");
    CHECK(compatible(sq, A, B));
    CHECK_FALSE(compatible(sq, B, a));
    CHECK(compatible(sq, a, a));
    CHECK_THROWS_AS(compatible(sq, 0, 99), Error);
    CHECK_THROWS_AS(sq.point_by_name("Q"), Error);
}

TEST_CASE("violated blocks of the all-plus assignment are the negative blocks") {
    for (const auto& name : builtin_structure_names()) {
        IncidenceStructure s = build_structure(name);
        Assignment all_plus(s.point_count(), Sign::plus);
        std::vector<int> expected;
        for (int b = 0; b < s.block_count(); ++b)
            if (s.block_signs[b] == Sign::minus) expected.push_back(b);
        CHECK(violated_blocks(s, all_plus) == expected);
    }
    IncidenceStructure sq = build_structure("square");
    CHECK_THROWS_AS(violated_blocks(sq, Assignment(3, Sign::plus)), Error);
}

TEST_CASE("contextuality degrees and witness bounds") {
    auto check = [](const char* name, int degree, int classical, int quantum) {
        IncidenceStructure s = build_structure(name);
        DegreeResult d = contextuality_degree(s);
        CHECK(d.degree == degree);
        CHECK(int(violated_blocks(s, d.witness).size()) == degree);
        WitnessBounds wb = witness_bounds(s);
        CHECK(wb.classical_max == classical);
        CHECK(wb.quantum_value == quantum);
        CHECK(wb.classical_max + 2 * d.degree == s.block_count());
    };
    check("square", 1, 4, 6);
    check("pentagram", 1, 3, 5);
    check("doily", 3, 9, 15);
}

TEST_CASE("minimal contradiction sets of the doily") {
    IncidenceStructure doily = build_structure("doily");
    auto sets = minimal_contradiction_sets(doily);
    REQUIRE(sets.count(3));
    REQUIRE(sets.count(4));
    REQUIRE(sets.count(5));
    CHECK(sets[3].size() == 20);
    CHECK(sets[4].size() == 60);
    CHECK(sets[5].size() == 72);
    CHECK(sets.size() == 3);  // no other minimal sizes

    // every assignment's violated set contains a minimal one
    Assignment all_plus(doily.point_count(), Sign::plus);
    std::vector<int> neg_list = violated_blocks(doily, all_plus);
    std::set<int> neg(neg_list.begin(), neg_list.end());
    bool contained = false;
    for (const auto& family : sets[3]) {
        if (std::includes(neg.begin(), neg.end(), family.begin(), family.end()))
            contained = true;
    }
    CHECK(contained);
}

TEST_CASE("minimal contradiction sets of square and pentagram are single blocks") {
    for (const char* name : {"square", "pentagram"}) {
        IncidenceStructure s = build_structure(name);
        auto sets = minimal_contradiction_sets(s);
        REQUIRE(sets.count(1));
        CHECK(sets.size() == 1);
        CHECK(int(sets[1].size()) == s.block_count());
    }
}

TEST_CASE("duad model of the doily") {
    DuadModel m = doily_duad_model();
    CHECK(m.structure.point_count() == 15);
    CHECK(m.structure.block_count() == 15);

    auto block_id = [&](int i, int j) {
        for (size_t b = 0; b < m.block_duads.size(); ++b)
            if (m.block_duads[b] == std::array<int, 2>{i, j}) return int(b);
        FAIL("missing duad");
        return -1;
    };
    auto points_of = [&](int b) {
        const auto& blk = m.structure.blocks[b];
        return std::set<int>(blk.begin(), blk.end());
    };
    // disjoint duads meet in exactly one point, intersecting duads in none
    std::set<int> b12 = points_of(block_id(1, 2));
    std::set<int> b34 = points_of(block_id(3, 4));
    std::set<int> b23 = points_of(block_id(2, 3));
    std::vector<int> meet;
    std::set_intersection(b12.begin(), b12.end(), b34.begin(), b34.end(),
                          std::back_inserter(meet));
    CHECK(meet.size() == 1);
    meet.clear();
    std::set_intersection(b12.begin(), b12.end(), b23.begin(), b23.end(),
                          std::back_inserter(meet));
    CHECK(meet.empty());

    // the point map is an incidence- and sign-preserving bijection
    IncidenceStructure doily = build_structure("doily");
    std::set<int> image(m.point_map.begin(), m.point_map.end());
    CHECK(image.size() == 15);
    for (int b = 0; b < 15; ++b) {
        std::vector<int> mapped;
        for (int p : m.structure.blocks[b]) mapped.push_back(m.point_map[p]);
        std::sort(mapped.begin(), mapped.end());
        CHECK(doily.blocks[m.block_map[b]] == mapped);
        CHECK(doily.block_signs[m.block_map[b]] == m.structure.block_signs[b]);
    }
}

TEST_CASE("ten squares decompose the doily") {
    std::vector<PmSquare> squares = pm_square_decomposition();
    CHECK(squares.size() == 10);

    std::vector<int> multiplicity(15, 0);
    for (const auto& sq : squares) {
        CHECK(sq.doily_blocks.size() == 6);
        CHECK(sq.doily_points.size() == 9);
        CHECK(sq.negative_block_count % 2 == 1);  // magic squares have odd negativity
        for (int b : sq.doily_blocks) ++multiplicity[b];
    }
    for (int b = 0; b < 15; ++b) CHECK(multiplicity[b] == 4);

    int with_three = 0;
    for (const auto& sq : squares) with_three += sq.negative_block_count == 3;
    CHECK(with_three == 1);  // the rest carry exactly one negative block

    // the documented example partition
    bool found = false;
    for (const auto& sq : squares) {
        if (sq.row_set != std::array<int, 3>{1, 2, 4}) continue;
        found = true;
        CHECK(sq.column_set == std::array<int, 3>{3, 5, 6});
        std::set<std::array<int, 2>> duads(sq.duad_blocks.begin(), sq.duad_blocks.end());
        std::set<std::array<int, 2>> expected = {{1, 2}, {1, 4}, {2, 4}, {3, 5}, {3, 6}, {5, 6}};
        CHECK(duads == expected);
    }
    CHECK(found);
}

TEST_CASE("union of size-3 minimal families matches the row/column triples of the squares") {
    IncidenceStructure doily = build_structure("doily");
    auto sets = minimal_contradiction_sets(doily);
    std::set<std::vector<int>> minimal3(sets[3].begin(), sets[3].end());

    std::set<std::vector<int>> triples;
    for (const auto& sq : pm_square_decomposition()) {
        std::vector<int> rows(sq.doily_blocks.begin(), sq.doily_blocks.begin() + 3);
        std::vector<int> cols(sq.doily_blocks.begin() + 3, sq.doily_blocks.end());
        std::sort(rows.begin(), rows.end());
        std::sort(cols.begin(), cols.end());
        triples.insert(rows);
        triples.insert(cols);
    }
    CHECK(triples == minimal3);
}

TEST_CASE("neighborhood covers") {
    IncidenceStructure pent = build_structure("pentagram");
    for (int p = 0; p < pent.point_count(); ++p)
        for (int q = p + 1; q < pent.point_count(); ++q)
            CHECK(neighborhood_cover(pent, p, q) >= 9);

    IncidenceStructure doily = build_structure("doily");
    for (int p = 0; p < doily.point_count(); ++p)
        for (int q = p + 1; q < doily.point_count(); ++q)
            CHECK(neighborhood_cover(doily, p, q) == 11);

    IncidenceStructure sq = build_structure("square");
    CHECK_THROWS_AS(neighborhood_cover(sq, 3, 3), Error);
}

TEST_CASE("automorphism groups") {
    IncidenceStructure pent = build_structure("pentagram");
    AutomorphismGroup pg = automorphisms(pent, AutomorphismKind::incidence);
    CHECK(pg.order() == 120);

    IncidenceStructure doily = build_structure("doily");
    AutomorphismGroup dg = automorphisms(doily, AutomorphismKind::incidence);
    CHECK(dg.order() == 720);

    // identity always present; elements closed under composition spot-check
    std::vector<int> identity(pent.point_count());
    std::iota(identity.begin(), identity.end(), 0);
    CHECK(std::find(pg.elements.begin(), pg.elements.end(), identity) != pg.elements.end());

    AutomorphismGroup psg = automorphisms(pent, AutomorphismKind::sign_preserving);
    CHECK(psg.order() == 24);
    AutomorphismGroup dsg = automorphisms(doily, AutomorphismKind::sign_preserving);
    CHECK(dsg.order() == 36);

    IncidenceStructure sq = build_structure("square");
    CHECK(automorphisms(sq, AutomorphismKind::incidence).order() == 72);
    CHECK(automorphisms(sq, AutomorphismKind::sign_preserving).order() == 12);
}

TEST_CASE("automorphism search agrees with the brute-force filter on the square") {
    IncidenceStructure sq = build_structure("square");
    std::set<std::vector<int>> blocks;
    for (const auto& b : sq.blocks) blocks.insert(b);

    std::vector<int> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    size_t count = 0;
    do {
        bool ok = true;
        for (const auto& b : sq.blocks) {
            std::vector<int> img;
            for (int p : b) img.push_back(perm[p]);
            std::sort(img.begin(), img.end());
            if (!blocks.count(img)) {
                ok = false;
                break;
            }
        }
        count += ok;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(count == automorphisms(sq, AutomorphismKind::incidence).order());
}

TEST_CASE("structure files round-trip byte-exactly") {
    for (const auto& name : builtin_structure_names()) {
        IncidenceStructure s = build_structure(name);
        std::string text = structure_to_json(s);
        IncidenceStructure back = structure_from_json(text);
        CHECK(structure_to_json(back) == text);
        CHECK(back.name == s.name);
        CHECK(back.blocks == s.blocks);
        CHECK(back.block_signs == s.block_signs);
    }
    CHECK_THROWS_AS(structure_from_json("{notjson"), Error);
    CHECK_THROWS_AS(structure_from_json("{\"format\":\"incidence-structure\"}"), Error);
}
