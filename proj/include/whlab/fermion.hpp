#pragma once

#include <vector>

#include "whlab/pauli.hpp"

namespace whlab {

enum class Side { left, right };

struct MajoranaIndex {
    Side side;
    int j;  // 0 <= j < N
};

// Ordered product of distinct Majoranas of one side, indices strictly increasing.
struct GammaIndex {
    Side side;
    std::vector<int> indices;
};

// Jordan-Wigner string for sqrt(2) * psi_j: X or Y on the target qubit with a
// Z chain on every earlier register qubit. Left fermion j targets qubit j/2,
// right fermion j targets qubit j/2 + N/2, so right strings cross the whole
// left block. The doubled system uses N qubits.
PauliTerm majorana_string(Side side, int j, int N);

// psi_j as an operator, weight 1/sqrt(2) included: {psi_i, psi_j} = delta_ij.
OperatorSum majorana(const MajoranaIndex& idx, int N);

// Gamma^(s)_J = 2^{s/2} i^{s(s-1)/2} psi_{j1} ... psi_{js}; a single phased
// string, Hermitian and squaring to the identity.
OperatorSum gamma_operator(const GammaIndex& g, int N);

// All 2^N Gamma strings of one side, indexed by the fermion subset bitmask.
// Entry K holds the phased Pauli string of Gamma_K.
std::vector<PauliTerm> gamma_table(Side side, int N);

// Product of all N single-fermion Gammas of one side (no extra i powers).
OperatorSum parity_string(Side side, int N);

// chi = (psi_0 + i psi_1)/sqrt(2) of the given side; chi^2 = 0, {chi, chi+} = 1.
OperatorSum chi_op(Side side, int N);
OperatorSum chi_dag(Side side, int N);

}  // namespace whlab
