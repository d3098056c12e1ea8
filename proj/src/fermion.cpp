#include "whlab/fermion.hpp"

#include <cmath>
#include <stdexcept>

namespace whlab {

namespace {
constexpr double INV_SQRT2 = 0.70710678118654752440;

void check_nj(int j, int N) {
    if (N <= 0 || N % 2 != 0) throw std::invalid_argument("N must be positive and even");
    if (j < 0 || j >= N) throw std::invalid_argument("fermion index out of range");
}
}  // namespace

PauliTerm majorana_string(Side side, int j, int N) {
    check_nj(j, N);
    int q = j / 2 + (side == Side::right ? N / 2 : 0);
    PauliTerm p;
    p.n = N;
    p.x = uint64_t{1} << q;
    p.z = (uint64_t{1} << q) - 1;  // Z chain on all earlier qubits
    if (j & 1) p.z |= uint64_t{1} << q;  // odd index: Y instead of X
    p.phase = 0;
    return p;
}

OperatorSum majorana(const MajoranaIndex& idx, int N) {
    OperatorSum s(N);
    s.add(majorana_string(idx.side, idx.j, N), INV_SQRT2);
    return s;
}

OperatorSum gamma_operator(const GammaIndex& g, int N) {
    PauliTerm acc;
    acc.n = N;
    int s = 0;
    int prev = -1;
    for (int j : g.indices) {
        if (j <= prev) throw std::invalid_argument("GammaIndex must be strictly increasing");
        prev = j;
        acc = pauli_mul(acc, majorana_string(g.side, j, N));
        ++s;
    }
    acc.phase = static_cast<uint8_t>((acc.phase + s * (s - 1) / 2) & 3);
    OperatorSum r(N);
    r.add(acc, 1.0);
    return r;
}

std::vector<PauliTerm> gamma_table(Side side, int N) {
    if (N <= 0 || N % 2 != 0 || N > 24) throw std::invalid_argument("gamma_table: bad N");
    std::vector<PauliTerm> psi(N);
    for (int j = 0; j < N; ++j) psi[j] = majorana_string(side, j, N);
    std::vector<PauliTerm> tab(std::size_t{1} << N);
    tab[0].n = N;
    // Gamma_{K' + top bit m} = i^{|K'|} Gamma_{K'} * sqrt(2) psi_m.
    for (uint64_t K = 1; K < tab.size(); ++K) {
        int m = 63 - __builtin_clzll(K);
        uint64_t Kp = K ^ (uint64_t{1} << m);
        PauliTerm t = pauli_mul(tab[Kp], psi[m]);
        t.phase = static_cast<uint8_t>((t.phase + popcnt(Kp)) & 3);
        tab[K] = t;
    }
    return tab;
}

OperatorSum parity_string(Side side, int N) {
    PauliTerm acc;
    acc.n = N;
    for (int j = 0; j < N; ++j) acc = pauli_mul(acc, majorana_string(side, j, N));
    OperatorSum r(N);
    r.add(acc, 1.0);
    return r;
}

OperatorSum chi_op(Side side, int N) {
    OperatorSum s(N);
    s.add(majorana_string(side, 0, N), INV_SQRT2 * INV_SQRT2);
    s.add(majorana_string(side, 1, N), cplx(0, 1) * INV_SQRT2 * INV_SQRT2);
    return s;
}

OperatorSum chi_dag(Side side, int N) { return chi_op(side, N).adjoint(); }

}  // namespace whlab
