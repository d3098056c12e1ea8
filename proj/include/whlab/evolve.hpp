#pragma once

#include <memory>
#include <optional>

#include "whlab/pauli.hpp"
#include "whlab/state.hpp"

namespace whlab {

enum class EvolveMode { real_time, imaginary_time };

struct EvolveOptions {
    int dense_threshold = 14;  // use a full eigendecomposition at or below this qubit count
    int krylov_dim = 30;
    double krylov_tol = 1e-10;
    int max_step_halvings = 24;
};

// Wraps one Hamiltonian and reuses its spectral data across evolutions.
// Engines: closed-form phases when H is diagonal, dense eigendecomposition up
// to the threshold, Lanczos with adaptive step halving beyond it.
class Evolver {
   public:
    explicit Evolver(OperatorSum H, EvolveOptions opt = {});

    // exp(-i t H) |psi>
    StateVector real_time(const StateVector& psi, double t) const;
    // exp(-tau H) |psi| renormalized; log_norm receives log ||exp(-tau H) psi||.
    StateVector imaginary_time(const StateVector& psi, double tau,
                               double* log_norm = nullptr) const;

    const OperatorSum& hamiltonian() const { return H_; }
    int n_qubits() const { return H_.n_qubits(); }

   private:
    enum class Engine { diagonal, dense, krylov };
    StateVector krylov_step(const StateVector& psi, double t, EvolveMode mode,
                            double* log_norm) const;

    OperatorSum H_;
    EvolveOptions opt_;
    Engine engine_;
    Eigen::VectorXd diag_;               // diagonal engine
    Eigen::VectorXd evals_;              // dense engine
    Eigen::MatrixXcd evecs_;
};

StateVector evolve(const StateVector& psi, const OperatorSum& H, double t, EvolveMode mode,
                   const EvolveOptions& opt = {});

// Exact dense propagator for a Hamiltonian supported on the contiguous qubit
// range [first, first + k). Single-side Hamiltonians live on one block, so
// their register evolution reduces to a 2^k x 2^k matrix acting in place.
class BlockEvolver {
   public:
    BlockEvolver(const OperatorSum& H_full, int first_qubit, int k_qubits);

    void real_time(StateVector& psi, double t) const;                   // exp(-i t H)
    void imaginary_time_unnormalized(StateVector& psi, double tau) const;  // exp(-tau H)

    int first() const { return first_; }
    int width() const { return k_; }

   private:
    Eigen::MatrixXcd propagator(cplx scale) const;  // exp(scale * H_block)
    int first_ = 0, k_ = 0;
    Eigen::VectorXd evals_;
    Eigen::MatrixXcd evecs_;
};

// In-place application of a 2^k x 2^k matrix to the qubits [first, first + k).
void apply_block_matrix(StateVector& psi, const Eigen::MatrixXcd& U, int first_qubit);

// rho_beta^{1/2} |I> normalized, computed as exp(-beta H_left / 2)|I>.
StateVector thermofield_double(const OperatorSum& H_left, double beta,
                               const EvolveOptions& opt = {});

}  // namespace whlab
