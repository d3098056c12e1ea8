#pragma once

#include <vector>

#include "whlab/evolve.hpp"
#include "whlab/models.hpp"
#include "whlab/state.hpp"

namespace whlab {

// Renyi-2 mutual information log2( tr(rho_AB^2) / (tr(rho_A^2) tr(rho_B^2)) ).
double renyi2_mutual(const StateVector& psi, const std::vector<int>& A,
                     const std::vector<int>& B);
// Same, from a joint density matrix whose index bits split into A and B.
double renyi2_mutual(const DensityMatrix& joint, const std::vector<int>& A_bits,
                     const std::vector<int>& B_bits);

// tr(rho_S^2) for the qubit subset S of a pure state; uses the smaller of S
// and its complement (equal purity for pure global states).
double subset_purity(const StateVector& psi, const std::vector<int>& S);

struct MutualInfoRecord {
    double I_RT = 0, I_RL = 0, I_RLT = 0, I3 = 0;  // log2 units
    double p_R = 0, p_T = 0, p_L = 0;              // subsystem purities
    double p_RT = 0, p_RL = 0, p_LT = 0, p_RLT = 0;
};

// All Renyi-2 entropic quantities of the (R, L, T) partition in one pass.
MutualInfoRecord mutual_info_record(const StateVector& psi, const std::vector<int>& R,
                                    const std::vector<int>& L, const std::vector<int>& T);

// I3 = I(R:L) + I(R:T) - I(R:LT), Renyi-2 based.
double tripartite_info(const StateVector& psi, const std::vector<int>& R,
                       const std::vector<int>& L, const std::vector<int>& T);

// -i <tfd| e^{i mu V} psi^l_j(tL) e^{-i mu V} psi^r_j(tR) |tfd>, with
// psi(t) = e^{iHt} psi e^{-iHt} under the respective side's Hamiltonian.
cplx otoc_H(const Couplings& c, InteractionKind kind, double mu, double t_L, double t_R, int j,
            double beta);

// Anticommutator form C(tL, tR) = -2 Im H_{i mu}(tL, tR).
double otoc_C(const Couplings& c, InteractionKind kind, double mu, double t_L, double t_R, int j,
              double beta);

// Euclidean variant h_mu(tau1, tau2) with e^{mu V} weights and
// psi(tau) = e^{tau H} psi e^{-tau H}.
cplx otoc_h_euclidean(const Couplings& c, InteractionKind kind, double mu, double tau1,
                      double tau2, int j, double beta);

// G_j(tau) = 2 Z^-1 <I| e^{-beta H_L} psi^l_j(tau) psi^l_j(0) |I>, normalized
// so G_j(0) = 1 exactly.
double euclidean_2pt(const Couplings& c, int j, double tau, double beta);

}  // namespace whlab
