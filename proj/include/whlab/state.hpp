#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whlab/pauli.hpp"

namespace whlab {

struct StateVector {
    int n = 0;  // qubit count; amplitude index bit k is qubit k
    Eigen::VectorXcd amp;

    std::size_t dim() const { return static_cast<std::size_t>(amp.size()); }
    double norm() const { return amp.norm(); }
    void normalize() { amp /= amp.norm(); }
};

struct DensityMatrix {
    int n = 0;
    Eigen::MatrixXcd rho;
};

StateVector basis_state(int n, uint64_t b);

// In-place |s> -> i^phase sigma(x, z) |s> for a single phased string.
void apply_pauli(StateVector& s, const PauliTerm& p);

// Rotates so the largest-magnitude amplitude (lowest index on ties) is real
// and positive; no-op for the zero vector.
void fix_global_phase(StateVector& s);

// Infinite-temperature double |I>, the joint vacuum of (psi^l_j + i psi^r_j).
// Every left operator acting on it has <I|A_l|I> = tr(A)/2^{N/2}.
StateVector max_entangled_state(int N);

DensityMatrix reduced_density(const StateVector& s, std::vector<int> keep);
DensityMatrix partial_trace(const DensityMatrix& d, std::vector<int> keep);

double purity(const DensityMatrix& d);

struct MeasureOutcome {
    uint64_t bits = 0;  // bit i = outcome of the i-th listed qubit
    double prob = 0;
    StateVector state;  // collapsed, renormalized, full register
};

struct MeasurePolicy {
    enum Kind { enumerate, sample } kind = enumerate;
    uint64_t seed = 0;
    double cutoff = 1e-14;  // enumerate drops outcomes at or below this probability
};

std::vector<MeasureOutcome> measure_qubits(const StateVector& s, const std::vector<int>& qubits,
                                           const MeasurePolicy& policy);

// Raw little-endian complex<double> pairs plus a JSON sidecar (same path with
// ".json" appended) recording the qubit count and amplitude convention.
void dump_state(const StateVector& s, const std::string& path);
StateVector load_state(const std::string& path);

}  // namespace whlab
