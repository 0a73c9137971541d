#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctxmem {

/// Error type for all precondition and parse failures in the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A measurement outcome or block sign: exactly +1 or -1.
enum class Sign : int8_t { plus = +1, minus = -1 };

constexpr Sign operator*(Sign a, Sign b) {
    return a == b ? Sign::plus : Sign::minus;
}

constexpr int to_int(Sign s) { return static_cast<int>(s); }

inline Sign sign_from_int(int v) {
    if (v != 1 && v != -1) throw Error("sign must be +1 or -1, got " + std::to_string(v));
    return v == 1 ? Sign::plus : Sign::minus;
}

inline const char* sign_str(Sign s) { return s == Sign::plus ? "+1" : "-1"; }

/// An n-qubit Pauli operator stored as i^phase_exp * X^x_bits Z^z_bits.
/// A Y factor at qubit j sets bit j in both x_bits and z_bits and contributes
/// one factor of i to phase_exp, so plain observable strings ("XZY...") are
/// always Hermitian. n is capped at 8 so each bit vector fits one byte.
struct PauliOperator {
    int n = 0;
    uint8_t x_bits = 0;
    uint8_t z_bits = 0;
    uint8_t phase_exp = 0;  // exponent of i, mod 4

    friend bool operator==(const PauliOperator&, const PauliOperator&) = default;
};

/// The identity operator on n qubits.
PauliOperator pauli_identity(int n);

/// Parse "XZI..." with an optional leading '+' or '-'.
/// Throws Error naming the offending position on malformed input.
PauliOperator parse_pauli(std::string_view text);

/// Inverse of parse_pauli. Pure tensor observables render with no prefix;
/// operators carrying an extra phase render with "-", "i" or "-i".
std::string format_pauli(const PauliOperator& p);

/// True iff the symplectic form x_a.z_b + x_b.z_a vanishes mod 2.
bool commutes(const PauliOperator& a, const PauliOperator& b);

/// Exact operator product including the global phase.
PauliOperator multiply(const PauliOperator& a, const PauliOperator& b);

/// P is Hermitian iff P*P is +identity.
bool is_hermitian(const PauliOperator& p);

/// Sign of a context: the operators must pairwise commute and multiply to
/// +identity or -identity. Throws otherwise.
Sign context_sign(std::span<const PauliOperator> ops);

}  // namespace ctxmem
