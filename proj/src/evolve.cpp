#include "whlab/evolve.hpp"

#include <cmath>
#include <stdexcept>

#include "whlab/fermion.hpp"

namespace whlab {

Evolver::Evolver(OperatorSum H, EvolveOptions opt) : H_(std::move(H)), opt_(opt) {
    if (!H_.is_hermitian(1e-10)) throw std::invalid_argument("Evolver: Hamiltonian not Hermitian");
    int n = H_.n_qubits();
    std::size_t dim = std::size_t{1} << n;
    if (H_.is_diagonal()) {
        engine_ = Engine::diagonal;
        diag_.setZero(static_cast<std::int64_t>(dim));
        for (const auto& t : H_.terms()) {
            double c = t.c.real();
            for (uint64_t b = 0; b < dim; ++b)
                diag_[static_cast<std::int64_t>(b)] += (popcnt(t.z & b) & 1) ? -c : c;
        }
    } else if (n <= opt_.dense_threshold) {
        engine_ = Engine::dense;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H_.dense());
        if (es.info() != Eigen::Success) throw std::runtime_error("Evolver: eigensolver failed");
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors();
    } else {
        engine_ = Engine::krylov;
    }
}

StateVector Evolver::real_time(const StateVector& psi, double t) const {
    if (psi.n != H_.n_qubits()) throw std::invalid_argument("Evolver: register size mismatch");
    if (t == 0.0) return psi;
    StateVector out = psi;
    switch (engine_) {
        case Engine::diagonal:
            for (std::int64_t b = 0; b < out.amp.size(); ++b)
                out.amp[b] *= std::exp(cplx(0, -t * diag_[b]));
            return out;
        case Engine::dense: {
            Eigen::VectorXcd y = evecs_.adjoint() * psi.amp;
            for (std::int64_t k = 0; k < y.size(); ++k) y[k] *= std::exp(cplx(0, -t * evals_[k]));
            out.amp = evecs_ * y;
            return out;
        }
        case Engine::krylov:
            return krylov_step(psi, t, EvolveMode::real_time, nullptr);
    }
    return out;
}

StateVector Evolver::imaginary_time(const StateVector& psi, double tau, double* log_norm) const {
    if (psi.n != H_.n_qubits()) throw std::invalid_argument("Evolver: register size mismatch");
    StateVector out = psi;
    if (tau == 0.0) {
        double nrm = out.norm();
        if (log_norm) *log_norm = std::log(nrm);
        out.amp /= nrm;
        return out;
    }
    switch (engine_) {
        case Engine::diagonal: {
            double lo = diag_.minCoeff();
            for (std::int64_t b = 0; b < out.amp.size(); ++b)
                out.amp[b] *= std::exp(-tau * (diag_[b] - lo));
            double nrm = out.norm();
            if (log_norm) *log_norm = std::log(nrm) - tau * lo;
            out.amp /= nrm;
            return out;
        }
        case Engine::dense: {
            double lo = evals_.minCoeff();
            Eigen::VectorXcd y = evecs_.adjoint() * psi.amp;
            for (std::int64_t k = 0; k < y.size(); ++k) y[k] *= std::exp(-tau * (evals_[k] - lo));
            out.amp = evecs_ * y;
            double nrm = out.norm();
            if (log_norm) *log_norm = std::log(nrm) - tau * lo;
            out.amp /= nrm;
            return out;
        }
        case Engine::krylov:
            return krylov_step(psi, tau, EvolveMode::imaginary_time, log_norm);
    }
    return out;
}

// One adaptive Lanczos propagation; halves the substep until the a-posteriori
// residual estimate beta_{m} * |u_last| falls under krylov_tol.
StateVector Evolver::krylov_step(const StateVector& psi, double t, EvolveMode mode,
                                 double* log_norm) const {
    const std::size_t dim = psi.dim();
    const int kmax = opt_.krylov_dim;
    int halvings = 0;
    int steps = 1;
    double last_resid = 0.0;

    while (halvings <= opt_.max_step_halvings) {
        double dt = t / steps;
        StateVector cur = psi;
        double lg = 0.0;
        bool ok = true;

        for (int s = 0; s < steps && ok; ++s) {
            double beta0 = cur.norm();
            if (beta0 == 0.0) throw std::runtime_error("krylov: zero state");
            std::vector<Eigen::VectorXcd> q;
            q.reserve(kmax);
            q.push_back(cur.amp / beta0);
            Eigen::VectorXd alpha(kmax), beta(kmax);
            int m = 0;
            double resid = 0.0;
            bool happy = false;
            Eigen::VectorXcd w(static_cast<std::int64_t>(dim));

            for (int k = 0; k < kmax; ++k) {
                H_.apply(q[k].data(), w.data(), dim);
                if (k > 0) w -= beta[k - 1] * q[k - 1];
                alpha[k] = std::real(q[k].dot(w));
                w -= alpha[k] * q[k];
                for (int r = 0; r <= k; ++r) w -= q[r].dot(w) * q[r];  // full reorthogonalization
                beta[k] = w.norm();
                m = k + 1;
                if (beta[k] < 1e-14 * std::max(1.0, std::abs(alpha[k]))) {
                    happy = true;
                    break;
                }
                if (k + 1 < kmax) q.push_back(w / beta[k]);
            }

            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int k = 0; k < m; ++k) {
                T(k, k) = alpha[k];
                if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            Eigen::VectorXcd u;
            double lstep = 0.0;
            if (mode == EvolveMode::real_time) {
                Eigen::VectorXcd ph(m);
                for (int k = 0; k < m; ++k) ph[k] = std::exp(cplx(0, -dt * es.eigenvalues()[k]));
                u = es.eigenvectors().cast<cplx>() *
                    ph.cwiseProduct(es.eigenvectors().row(0).transpose().cast<cplx>());
            } else {
                double lo = es.eigenvalues().minCoeff();
                Eigen::VectorXd ex(m);
                for (int k = 0; k < m; ++k) ex[k] = std::exp(-dt * (es.eigenvalues()[k] - lo));
                Eigen::VectorXd ur =
                    es.eigenvectors() * ex.cwiseProduct(es.eigenvectors().row(0).transpose());
                u = ur.cast<cplx>();
                lstep = -dt * lo;
            }
            if (!happy) {
                resid = beta[m - 1] * std::abs(u[m - 1]);
                if (resid > opt_.krylov_tol) {
                    ok = false;
                    last_resid = resid;
                    break;
                }
            }
            Eigen::VectorXcd nxt = Eigen::VectorXcd::Zero(static_cast<std::int64_t>(dim));
            for (int k = 0; k < m; ++k) nxt += u[k] * q[k];
            nxt *= beta0;
            if (mode == EvolveMode::imaginary_time) {
                double nrm = nxt.norm();
                lg += lstep + std::log(nrm);
                nxt /= nrm;
            }
            cur.amp = std::move(nxt);
        }

        if (ok) {
            if (mode == EvolveMode::imaginary_time && log_norm) *log_norm = lg;
            return cur;
        }
        steps *= 2;
        ++halvings;
    }
    throw std::runtime_error("krylov: no convergence after step halving, residual " +
                             std::to_string(last_resid));
}

StateVector evolve(const StateVector& psi, const OperatorSum& H, double t, EvolveMode mode,
                   const EvolveOptions& opt) {
    Evolver ev(H, opt);
    return mode == EvolveMode::real_time ? ev.real_time(psi, t) : ev.imaginary_time(psi, t);
}

StateVector thermofield_double(const OperatorSum& H_left, double beta, const EvolveOptions& opt) {
    StateVector I = max_entangled_state(H_left.n_qubits());
    if (beta == 0.0) return I;
    Evolver ev(H_left, opt);
    return ev.imaginary_time(I, beta / 2);
}

BlockEvolver::BlockEvolver(const OperatorSum& H_full, int first_qubit, int k_qubits)
    : first_(first_qubit), k_(k_qubits) {
    if (first_qubit < 0 || k_qubits <= 0 || first_qubit + k_qubits > H_full.n_qubits())
        throw std::invalid_argument("block evolver: range outside register");
    uint64_t block = ((k_ == 64) ? ~uint64_t(0) : ((uint64_t(1) << k_) - 1)) << first_;
    std::vector<OperatorSum::Term> raw;
    raw.reserve(H_full.size());
    for (const auto& t : H_full.terms()) {
        if ((t.x | t.z) & ~block)
            throw std::invalid_argument("block evolver: operator leaves the qubit range");
        raw.push_back({t.x >> first_, t.z >> first_, t.c});
    }
    OperatorSum h = OperatorSum::from_terms(k_, std::move(raw));
    if (!h.is_hermitian(1e-10)) throw std::invalid_argument("block evolver: non-Hermitian operator");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.dense());
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
}

Eigen::MatrixXcd BlockEvolver::propagator(cplx scale) const {
    Eigen::VectorXcd ph(evals_.size());
    for (Eigen::Index i = 0; i < evals_.size(); ++i) ph[i] = std::exp(scale * evals_[i]);
    return evecs_ * ph.asDiagonal() * evecs_.adjoint();
}

void BlockEvolver::real_time(StateVector& psi, double t) const {
    if (t == 0.0) return;
    apply_block_matrix(psi, propagator(cplx(0, -t)), first_);
}

void BlockEvolver::imaginary_time_unnormalized(StateVector& psi, double tau) const {
    if (tau == 0.0) return;
    apply_block_matrix(psi, propagator(cplx(-tau, 0)), first_);
}

void apply_block_matrix(StateVector& psi, const Eigen::MatrixXcd& U, int first_qubit) {
    const uint64_t dim = uint64_t(1) << psi.n;
    const uint64_t bdim = uint64_t(U.rows());
    if (U.cols() != U.rows() || (bdim & (bdim - 1)) != 0)
        throw std::invalid_argument("block apply: matrix must be square power of two");
    int k = 0;
    while ((uint64_t(1) << k) < bdim) ++k;
    if (first_qubit < 0 || first_qubit + k > psi.n)
        throw std::invalid_argument("block apply: range outside register");

    const uint64_t low_dim = uint64_t(1) << first_qubit;
    const uint64_t high_dim = dim >> (first_qubit + k);
    Eigen::VectorXcd in(bdim), out(bdim);
    for (uint64_t hi = 0; hi < high_dim; ++hi) {
        const uint64_t base_hi = hi << (first_qubit + k);
        for (uint64_t lo = 0; lo < low_dim; ++lo) {
            const uint64_t base = base_hi | lo;
            for (uint64_t b = 0; b < bdim; ++b) in[b] = psi.amp[base | (b << first_qubit)];
            out.noalias() = U * in;
            for (uint64_t b = 0; b < bdim; ++b) psi.amp[base | (b << first_qubit)] = out[b];
        }
    }
}

}  // namespace whlab
