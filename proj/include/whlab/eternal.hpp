#pragma once

#include <vector>

#include "whlab/fitting.hpp"
#include "whlab/models.hpp"
#include "whlab/pauli.hpp"
#include "whlab/state.hpp"

namespace whlab {

enum class SpectrumMethod { automatic, dense, iterative };

struct SpectrumResult {
    std::vector<double> eigenvalues;    // lowest k, ascending
    double E0 = 0;
    double gap = 0;                     // ground cluster to the next cluster (1e-8 clustering)
    StateVector ground_state;
    Eigen::MatrixXcd ground_multiplet;  // orthonormal columns spanning the ground cluster
};

// Spectrum of H_left + H_right + mu * V for the chosen coupling. Positive mu
// pulls the ground state toward the maximally entangled pair state; it is the
// opposite sign of the teleportation phase convention. Dense solve at or
// below 14 qubits, deflated Lanczos with full reorthogonalization beyond.
SpectrumResult eternal_spectrum(const Couplings& c, InteractionKind kind, double mu, int k,
                                SpectrumMethod method = SpectrumMethod::automatic);

struct GapPowerLawResult {
    std::vector<double> mu;
    std::vector<double> mean_gap;  // ensemble mean at each grid point
    PowerLawFit fit;               // mean_gap ~ a mu^b + c over [fit_lo, fit_hi]
};

GapPowerLawResult gap_power_law(const std::vector<Couplings>& ensemble, InteractionKind kind,
                                const std::vector<double>& mu_grid, double fit_lo, double fit_hi,
                                int threads = 0);

struct OptimalBeta {
    double beta_star = 0;
    double overlap = 0;     // norm of tfd(beta) projected onto the ground multiplet
    bool boundary = false;  // maximum sat on a grid endpoint; no refinement done
};

// Grid scan of |<tfd(beta)|ground>| followed by golden-section refinement
// around an interior maximum.
OptimalBeta optimal_beta(const Couplings& c, InteractionKind kind, double mu,
                         const std::vector<double>& beta_grid);

// <tfd(beta)| (H - E0) |tfd(beta)> / |E0|, nonnegative by the variational
// bound. Throws when the ground energy vanishes.
double sl2r_figure_of_merit(const Couplings& c, InteractionKind kind, double mu, double beta);

// Quarter-period rotation generated by the pair coupling: the product over
// all flavors of (1 + 2i V_j) / sqrt(2). Unitary with eigenvalues in
// {1, -1, i, -i}; its square is the two-sided fermion parity.
OperatorSum q_operator(int N);

struct SymmetryReport {
    InteractionKind kind = InteractionKind::majorana_pairs;
    bool hamiltonian_invariant = false;   // pair coupling: [Q, H] = 0; pair parity: side parities commute
    bool q_squared_is_parity = false;     // Q^2 equals the product of side parities
    // Q exchanges the side parities, so left parity times Q equals total
    // parity times Q times left parity identically; on the sector of the
    // maximally entangled pair state, where total parity is (-1)^{N/2},
    // the grade reduces to a plain sign.
    bool q_parity_commutes = false;       // graded identity + even pair sector (N = 0 mod 4)
    bool q_parity_anticommutes = false;   // graded identity + odd pair sector  (N = 2 mod 4)
};

// Each check multiplies the operators out and requires the coefficients to
// cancel identically, not merely below a tolerance.
SymmetryReport discrete_symmetries(const Couplings& c, InteractionKind kind);

struct Sl2rGenerators {
    OperatorSum B;        // H_R - H_L
    OperatorSum E;        // H_L + H_R - mu V - E0
    OperatorSum P_plus;   // -(E + B)/2
    OperatorSum P_minus;  // -(E - B)/2
};

// Written with the teleportation sign of mu: the coupled Hamiltonian at
// coupling g equals E + E0 with mu = -g.
Sl2rGenerators sl2r_generators(const Couplings& c, double mu, double E0);

// || (H_R - H_L) |tfd(beta)> ||, the boost annihilation defect.
double boost_norm_on_tfd(const Couplings& c, double beta);

}  // namespace whlab
