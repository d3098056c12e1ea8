#pragma once

#include <utility>
#include <vector>

#include "whlab/fermion.hpp"
#include "whlab/models.hpp"
#include "whlab/state.hpp"

namespace whlab {

// Two notions of operator size: the Majorana count s of a basis string, or
// twice the count of qubits carrying an X or Y factor (per-qubit Majorana
// pairs collapse to a Z and do not count).
enum class SizeMeasure { majorana_count, qubit_pair_count };

SizeMeasure measure_for(InteractionKind kind);

// Coefficients of sqrt(2) psi_i(t) |tfd> in the orthonormal basis
// {Gamma_K |I>}, K ranging over all 2^N Majorana subsets of one side.
struct SizeData {
    int N = 0;
    Side side = Side::left;
    int fermion = 0;
    double t = 0;
    double beta = 0;
    SizeMeasure measure = SizeMeasure::majorana_count;
    std::vector<cplx> c;  // dense, indexed by the subset mask
};

struct SizeDistributions {
    SizeMeasure measure = SizeMeasure::majorana_count;
    std::vector<double> P;  // index s in [0, N]; odd s empty for pair counting
    std::vector<cplx> Q;
};

enum class ExpandEngine { butterfly, direct };

// The butterfly engine factorizes the basis change into one 4-way stage per
// qubit pair (O(N 2^N)); the direct engine takes inner products over the
// support of |I> (O(2^{3N/2})) and exists as a cross-check.
SizeData expand_thermal_fermion(const Couplings& c, Side side, int i, double t, double beta,
                                ExpandEngine engine = ExpandEngine::butterfly);

// P(s) = sum_{|K|=s} |c_K|^2, Q(s) = sum c_K^2 under data.measure.
SizeDistributions size_distributions(const SizeData& data);

struct SizeMoments {
    double mean = 0;
    double stddev = 0;
};

SizeMoments size_moments(const SizeDistributions& d);

// Exact relabeling under exp(i mu V): c_K picks up the eigenvalue phase
// e^{i mu (s - N/2)} of the size operator matching the interaction kind,
// which must agree with data.measure.
SizeData apply_interaction_phase(const SizeData& data, double mu, InteractionKind kind);

struct WindingFit {
    double slope = 0;  // coefficient winding rate: arg Q(s) ~ 2 (slope s + intercept)
    double intercept = 0;
    double weighted_r2 = 0;
    double coherence = 0;  // sum over populated s of min(|Q(s)|, P(s))
};

// P-weighted least squares of the unwrapped arg Q(s) over sizes with
// P(s) > 1e-8; needs at least two populated sizes. A coupling exp(i mu V)
// shifts the reported slope by exactly mu.
WindingFit winding_fit(const SizeDistributions& d);

struct ThermalSize {
    double G_half = 0;  // flavor-averaged two-point function at tau = beta/2
    double n_half = 0;  // (N/2)(1 - G_half)
};

ThermalSize thermal_size(const Couplings& c, double beta);

// Reference growth curve G(beta/2) (1 + (8 J^2 / lambda^2) sinh^2(lambda t/2)).
double largeN_growth_reference(double G_half, double littleJ, double lambda, double t);

struct ExpDecayFit {
    double lambda = 0;  // |slope|(t) ~ e^{-lambda t}
    double log_amplitude = 0;
    double rms = 0;
    int points = 0;
};

// Log-linear fit of |slope| decay over samples with t in [t_lo, t_hi];
// needs at least four in-window points, all nonzero.
ExpDecayFit lyapunov_fit(const std::vector<std::pair<double, double>>& slope_series, double t_lo,
                         double t_hi);

}  // namespace whlab
