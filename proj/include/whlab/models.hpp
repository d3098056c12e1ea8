#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "whlab/fermion.hpp"
#include "whlab/pauli.hpp"
#include "whlab/state.hpp"

namespace whlab {

enum class ModelKind { syk, pg_commuting };

struct CouplingEntry {
    std::vector<int> idx;  // strictly increasing; fermion indices (syk) or pair sites (pg)
    double value = 0;
};

struct Couplings {
    ModelKind model = ModelKind::syk;
    int N = 0;  // Majoranas per side
    int q = 0;
    double J = 0;  // interaction strength setting the coupling variance
    uint64_t seed = 0;
    std::vector<CouplingEntry> entries;  // lexicographic tuple order
};

// All-to-all q-fermion couplings, i.i.d. Gaussians with variance
// 2^{q-1} (q-1)! / (q N^{q-1}) * J^2. One entry per increasing q-tuple.
Couplings sample_syk(int N, int q, double J, uint64_t seed);

// Commuting pair-bilinear model: couples q/2 of the N/2 fermion-pair sites,
// variance 2^{q-1} (q/2-1)! (N/2-q/2)! / (N/2-1)! * J^2.
Couplings sample_pg_commuting(int N, int q, double J, uint64_t seed);

// Same couplings realized with left or right fermions; Hermitian, traceless.
OperatorSum build_hamiltonian(const Couplings& c, Side side);

// Left-right couplings at unit strength: majorana_pairs is i sum_j psi^l_j
// psi^r_j, qubit_pairs the pair-parity product version (ZZ across the cut).
enum class InteractionKind { majorana_pairs, qubit_pairs };
OperatorSum build_interaction(InteractionKind kind, int N);

// In-place exp(scale * V) where V = build_interaction(kind, N) lives at qubit
// offset inside psi's register. Exact: the per-mode factors commute and each
// squares to 1/4, so exp(a V_j) = cosh(a/2) + 2 sinh(a/2) V_j. Non-unitary
// scales (real part) are applied without renormalization.
void apply_interaction_exponential(StateVector& psi, InteractionKind kind, int N, int offset,
                                   cplx scale);

std::string couplings_to_json(const Couplings& c);
Couplings couplings_from_json(const std::string& text);

}  // namespace whlab
