#include <algorithm>

#include "ctxmem/pauli.hpp"
#include "doctest.h"

using namespace ctxmem;

namespace {

// every n-qubit Pauli string for small n
std::vector<std::string> all_strings(int n) {
    std::vector<std::string> out{""};
    for (int q = 0; q < n; ++q) {
        std::vector<std::string> next;
        for (const auto& s : out)
            for (char c : {'I', 'X', 'Y', 'Z'}) next.push_back(s + c);
        out = std::move(next);
    }
    return out;
}

}  // namespace

TEST_CASE("parsing basics") {
    PauliOperator zz = parse_pauli("ZZ");
    CHECK(zz.n == 2);
    CHECK(zz.z_bits == 0b11);
    CHECK(zz.x_bits == 0);
    CHECK(zz.phase_exp == 0);

    PauliOperator id = parse_pauli("II");
    CHECK(id == pauli_identity(2));

    // YY must square to +identity under the multiply oracle
    PauliOperator yy = parse_pauli("YY");
    CHECK(yy.x_bits == 0b11);
    CHECK(yy.z_bits == 0b11);
    CHECK(multiply(yy, yy) == pauli_identity(2));
}

TEST_CASE("parse errors name the offending position") {
    CHECK_THROWS_WITH_AS(parse_pauli("XQZ"), doctest::Contains("position 1"), Error);
    CHECK_THROWS_AS(parse_pauli(""), Error);
    CHECK_THROWS_AS(parse_pauli("-"), Error);
    CHECK_THROWS_AS(parse_pauli("XXXXXXXXX"), Error);  // 9 qubits
}

TEST_CASE("format round-trips every string up to 3 qubits") {
    for (int n = 1; n <= 3; ++n)
        for (const auto& s : all_strings(n)) CHECK(format_pauli(parse_pauli(s)) == s);
    CHECK(format_pauli(parse_pauli("-XZ")) == "-XZ");
}

TEST_CASE("commutation") {
    CHECK(commutes(parse_pauli("ZI"), parse_pauli("IZ")));
    CHECK_FALSE(commutes(parse_pauli("XI"), parse_pauli("ZI")));
    CHECK(commutes(parse_pauli("ZZ"), parse_pauli("XX")));
    CHECK_THROWS_AS(commutes(parse_pauli("Z"), parse_pauli("ZZ")), Error);
}

TEST_CASE("products") {
    CHECK(multiply(parse_pauli("ZI"), parse_pauli("IZ")) == parse_pauli("ZZ"));
    // ZZ * XX * YY = -identity
    PauliOperator p = multiply(multiply(parse_pauli("ZZ"), parse_pauli("XX")), parse_pauli("YY"));
    CHECK(p.x_bits == 0);
    CHECK(p.z_bits == 0);
    CHECK(p.phase_exp == 2);
    CHECK_THROWS_AS(multiply(parse_pauli("Z"), parse_pauli("ZZ")), Error);
}

TEST_CASE("every Hermitian operator is an involution") {
    for (const auto& s : all_strings(2)) {
        PauliOperator p = parse_pauli(s);
        CHECK(is_hermitian(p));
        CHECK(multiply(p, p) == pauli_identity(2));
    }
}

TEST_CASE("commuting is equivalent to products matching, phase included") {
    for (const auto& sa : all_strings(2))
        for (const auto& sb : all_strings(2)) {
            PauliOperator a = parse_pauli(sa), b = parse_pauli(sb);
            CHECK(commutes(a, b) == (multiply(a, b) == multiply(b, a)));
        }
}

TEST_CASE("context signs") {
    auto ops = [](std::initializer_list<const char*> strs) {
        std::vector<PauliOperator> v;
        for (const char* s : strs) v.push_back(parse_pauli(s));
        return v;
    };
    std::vector<PauliOperator> row = ops({"ZI", "IZ", "ZZ"});
    CHECK(context_sign(row) == Sign::plus);
    std::vector<PauliOperator> col = ops({"ZZ", "XX", "YY"});
    CHECK(context_sign(col) == Sign::minus);
    // the pentagram's distinguished line
    std::vector<PauliOperator> line = ops({"XXZ", "XZX", "ZXX", "ZZZ"});
    CHECK(context_sign(line) == Sign::minus);

    CHECK_THROWS_AS(context_sign(ops({"XI", "ZI"})), Error);  // non-commuting
    CHECK_THROWS_AS(context_sign(ops({"ZI", "IZ"})), Error);  // product is ZZ, not +-identity
    std::vector<PauliOperator> phased{PauliOperator{1, 0, 0, 1}};  // i * identity
    CHECK_THROWS_AS(context_sign(phased), Error);
}

TEST_CASE("context_sign is invariant under permutation, exhaustively to length 4") {
    std::vector<std::vector<PauliOperator>> contexts = {
        {parse_pauli("ZI"), parse_pauli("IZ"), parse_pauli("ZZ")},
        {parse_pauli("ZZ"), parse_pauli("XX"), parse_pauli("YY")},
        {parse_pauli("XXZ"), parse_pauli("XZX"), parse_pauli("ZXX"), parse_pauli("ZZZ")},
        {parse_pauli("XXZ"), parse_pauli("XII"), parse_pauli("IXI"), parse_pauli("IIZ")},
    };
    for (auto ctx : contexts) {
        std::sort(ctx.begin(), ctx.end(), [](const PauliOperator& a, const PauliOperator& b) {
            return format_pauli(a) < format_pauli(b);
        });
        Sign expected = context_sign(ctx);
        do {
            CHECK(context_sign(ctx) == expected);
        } while (std::next_permutation(ctx.begin(), ctx.end(),
                                       [](const PauliOperator& a, const PauliOperator& b) {
                                           return format_pauli(a) < format_pauli(b);
                                       }));
    }
}
