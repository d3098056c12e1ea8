#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace whlab {

using cplx = std::complex<double>;

inline constexpr cplx IPOW[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

inline int popcnt(uint64_t v) { return __builtin_popcountll(v); }

// Pauli string on n <= 32 qubits, stored as X/Z bitmasks. Bit k of x (z) set
// means an X (Z) factor on qubit k; both set means a literal Y. The operator
// value is i^phase * sigma(x, z) where sigma is the Hermitian string with Y
// spelled out, so sigma(x, z) = i^{|x&z|} * X^x Z^z.
struct PauliTerm {
    int n = 0;
    uint64_t x = 0;
    uint64_t z = 0;
    uint8_t phase = 0;  // exponent of i, mod 4

    cplx phase_value() const { return IPOW[phase & 3]; }
    bool commutes_with(const PauliTerm& o) const {
        return ((popcnt(x & o.z) + popcnt(z & o.x)) & 1) == 0;
    }
    bool same_string(const PauliTerm& o) const { return x == o.x && z == o.z; }
    PauliTerm adjoint() const {
        PauliTerm r = *this;
        r.phase = static_cast<uint8_t>((4 - (phase & 3)) & 3);
        return r;
    }
    std::string to_string() const;  // e.g. "-i * XZIY"
    Eigen::MatrixXcd dense() const;
};

PauliTerm pauli_mul(const PauliTerm& a, const PauliTerm& b);

// i^phase * sigma |b> = amp * |b ^ x>; returns amp for basis state b.
inline cplx pauli_basis_amp(const PauliTerm& p, uint64_t b) {
    int e = (p.phase + popcnt(p.x & p.z) + 2 * popcnt(p.z & b)) & 3;
    return IPOW[e];
}

// Sum of Pauli strings with complex coefficients. Terms are kept unique and
// sorted by (z, x) so identical operators compare equal and iteration order
// is deterministic.
class OperatorSum {
   public:
    struct Term {
        uint64_t x = 0;
        uint64_t z = 0;
        cplx c;
    };

    OperatorSum() = default;
    explicit OperatorSum(int n_qubits) : n_(n_qubits) {}

    static OperatorSum identity(int n_qubits);
    // Builds from raw (x, z, coeff) triples in one sort-and-merge pass.
    static OperatorSum from_terms(int n_qubits, std::vector<Term> raw);

    int n_qubits() const { return n_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    // Adds coeff * i^{term.phase} * sigma(term.x, term.z); phase is folded
    // into the stored coefficient.
    OperatorSum& add(const PauliTerm& t, cplx coeff);
    OperatorSum& add_string(uint64_t x, uint64_t z, cplx coeff);
    OperatorSum& operator+=(const OperatorSum& o);
    OperatorSum& operator-=(const OperatorSum& o);
    OperatorSum& operator*=(cplx s);

    friend OperatorSum operator*(const OperatorSum& a, const OperatorSum& b);
    friend OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
    friend OperatorSum operator-(OperatorSum a, const OperatorSum& b) { return a -= b; }
    friend OperatorSum operator*(cplx s, OperatorSum a) { return a *= s; }

    OperatorSum adjoint() const;
    OperatorSum commutator(const OperatorSum& o) const;  // [this, o], exact cancellation

    bool is_hermitian(double tol = 1e-12) const;
    bool is_diagonal() const;  // no X components
    double trace_over_dim() const;  // tr(A) / 2^n = coefficient of the identity string
    double max_abs_coeff() const;

    // Drops terms with |c| <= tol (tol = 0 drops exact zeros only).
    void compress(double tol = 0.0);

    // Maps qubit k -> k + offset inside a register of new_n qubits.
    OperatorSum embedded(int new_n, int offset) const;

    void apply(const cplx* in, cplx* out, std::size_t dim) const;  // out = A in
    Eigen::VectorXcd apply(const Eigen::VectorXcd& in) const;
    Eigen::MatrixXcd dense() const;

   private:
    void sort_and_merge();
    int n_ = 0;
    std::vector<Term> terms_;
};

}  // namespace whlab
