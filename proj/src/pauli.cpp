#include "ctxmem/pauli.hpp"

#include <bit>

namespace ctxmem {

namespace {

constexpr int kMaxQubits = 8;

int parity(uint8_t v) { return std::popcount(v) & 1; }

}  // namespace

PauliOperator pauli_identity(int n) {
    if (n < 1 || n > kMaxQubits)
        throw Error("qubit count must be in 1.." + std::to_string(kMaxQubits));
    return PauliOperator{n, 0, 0, 0};
}

PauliOperator parse_pauli(std::string_view text) {
    size_t pos = 0;
    uint8_t phase = 0;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        if (text[pos] == '-') phase = 2;
        ++pos;
    }
    if (pos == text.size())
        throw Error("empty Pauli string");
    if (text.size() - pos > kMaxQubits)
        throw Error("Pauli string longer than " + std::to_string(kMaxQubits) + " qubits");

    PauliOperator p;
    p.n = static_cast<int>(text.size() - pos);
    for (int q = 0; q < p.n; ++q, ++pos) {
        switch (text[pos]) {
            case 'I': break;
            case 'X': p.x_bits |= uint8_t(1u << q); break;
            case 'Z': p.z_bits |= uint8_t(1u << q); break;
            case 'Y':
                p.x_bits |= uint8_t(1u << q);
                p.z_bits |= uint8_t(1u << q);
                phase = uint8_t((phase + 1) & 3);
                break;
            default:
                throw Error("invalid Pauli character '" + std::string(1, text[pos]) +
                            "' at position " + std::to_string(pos));
        }
    }
    p.phase_exp = uint8_t(phase & 3);
    return p;
}

std::string format_pauli(const PauliOperator& p) {
    int y_count = std::popcount(uint8_t(p.x_bits & p.z_bits));
    int rel = (int(p.phase_exp) - y_count) & 3;
    std::string out;
    switch (rel) {
        case 0: break;
        case 1: out = "i"; break;
        case 2: out = "-"; break;
        case 3: out = "-i"; break;
    }
    for (int q = 0; q < p.n; ++q) {
        bool x = p.x_bits & (1u << q);
        bool z = p.z_bits & (1u << q);
        out += x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
    }
    return out;
}

bool commutes(const PauliOperator& a, const PauliOperator& b) {
    if (a.n != b.n) throw Error("qubit count mismatch");
    return ((parity(a.x_bits & b.z_bits) + parity(b.x_bits & a.z_bits)) & 1) == 0;
}

PauliOperator multiply(const PauliOperator& a, const PauliOperator& b) {
    if (a.n != b.n) throw Error("qubit count mismatch");
    PauliOperator r;
    r.n = a.n;
    // Z^za X^xb = (-1)^{za.xb} X^xb Z^za, each swap costing i^2.
    r.phase_exp = uint8_t((a.phase_exp + b.phase_exp + 2 * parity(a.z_bits & b.x_bits)) & 3);
    r.x_bits = a.x_bits ^ b.x_bits;
    r.z_bits = a.z_bits ^ b.z_bits;
    return r;
}

bool is_hermitian(const PauliOperator& p) {
    return multiply(p, p) == pauli_identity(p.n);
}

Sign context_sign(std::span<const PauliOperator> ops) {
    if (ops.empty()) throw Error("context_sign of an empty operator list");
    for (size_t i = 0; i < ops.size(); ++i)
        for (size_t j = i + 1; j < ops.size(); ++j)
            if (!commutes(ops[i], ops[j]))
                throw Error("operators " + format_pauli(ops[i]) + " and " +
                            format_pauli(ops[j]) + " do not commute");
    PauliOperator prod = pauli_identity(ops[0].n);
    for (const auto& op : ops) prod = multiply(prod, op);
    if (prod.x_bits != 0 || prod.z_bits != 0)
        throw Error("product is not proportional to the identity: " + format_pauli(prod));
    if (prod.phase_exp == 0) return Sign::plus;
    if (prod.phase_exp == 2) return Sign::minus;
    throw Error("product carries an imaginary phase");
}

}  // namespace ctxmem
