#pragma once

#include <cstdint>
#include <vector>

#include "whlab/models.hpp"
#include "whlab/state.hpp"

namespace whlab {

struct InteractionSlice {
    double time = 0;
    double mu = 0;
};

enum class ChannelKind { quantum, classical };

struct ProtocolConfig {
    int N = 0;
    double beta = 0;
    double mu = 0;
    double t0 = 0;  // injection happens at -t0
    double t1 = 0;  // extraction time
    InteractionKind interaction = InteractionKind::majorana_pairs;
    ChannelKind channel = ChannelKind::quantum;
    std::vector<InteractionSlice> schedule;  // empty means one slice (0, mu)

    // Defaulted, sorted by time, checked to lie within [-t0, t1].
    std::vector<InteractionSlice> resolved_schedule() const;
};

// Register layout: reference qubit R, insertion qubit Q, the two N/2-qubit
// fermion blocks, readout qubit T. Amplitude index bit k is qubit k.
struct ProtocolRegister {
    int N = 0;
    int r_qubit() const { return 0; }
    int q_qubit() const { return 1; }
    int left_first() const { return 2; }
    int right_first() const { return 2 + N / 2; }
    int t_qubit() const { return N + 2; }
    int n_qubits() const { return N + 3; }
};

struct ClassicalOutcome {
    uint64_t bits = 0;  // bit j = measured value of the j-th left-block qubit
    double probability = 0;
    DensityMatrix rho_TR;
    double I_RT = 0;
};

struct TeleportResult {
    DensityMatrix rho_TR;  // 4x4; index bit 0 = R, bit 1 = T
    double I_RT = 0;
    StateVector final_state;                 // quantum channel only
    std::vector<ClassicalOutcome> outcomes;  // classical channel only
};

// S_Ql (side=left, control qubit Q) or S_Tr (side=right, control qubit T):
// the projector-weighted chi ladder on the full register. Self-inverse.
OperatorSum swap_operator(Side side, int N);

// Full-register protocol: backward left evolution, left swap-in, scheduled
// interaction slices interleaved with two-sided evolution, right evolution to
// t1, right swap-out.
TeleportResult run_quantum(const ProtocolConfig& cfg, const Couplings& c);

// The same rho_TR from eight two-sided correlators on the N-qubit doubled
// space alone (no R, Q, T qubits).
DensityMatrix rho_TR_correlator(const ProtocolConfig& cfg, const Couplings& c);

double mutual_info_from_rho_TR(const DensityMatrix& rho_TR);

// Measures the left block at time 0, applies the phase operator selected by
// the outcome on the right block, evolves to t1, swaps the first right qubit
// into T, and flips T's phase on odd measured parity. Requires the qubit-pair
// interaction and the default single slice at time 0.
TeleportResult run_classical(const ProtocolConfig& cfg, const Couplings& c,
                             const MeasurePolicy& policy);

struct MiCurvePoint {
    int instantiation = 0;  // -1 marks the ensemble mean
    double t = 0;           // t0 = t1 = t
    double I_minus = 0;     // all slice couplings forced to -|mu|
    double I_plus = 0;      // all slice couplings forced to +|mu|
    double asymmetry = 0;   // I_minus - I_plus
};

// I(R:T) at t0 = t1 = t for both coupling signs, one row per (instantiation,
// t) plus mean rows (instantiation = -1). threads <= 0: hardware concurrency.
std::vector<MiCurvePoint> mi_curve(const std::vector<Couplings>& ensemble,
                                   const ProtocolConfig& base, const std::vector<double>& t_grid,
                                   int threads = 0);

struct CausalPoint {
    double t0 = 0;
    double t1_star = 0;    // asymmetry-maximizing extraction time; ties break small
    double asymmetry = 0;  // I_minus - I_plus at (t0, t1_star)
};

// For each injection offset t0, the extraction time t1 maximizing the
// mutual-information asymmetry over the t1 grid.
std::vector<CausalPoint> causal_ordering_scan(const Couplings& c, const ProtocolConfig& base,
                                              const std::vector<double>& t0_grid,
                                              const std::vector<double>& t1_grid, int threads = 0);

}  // namespace whlab
