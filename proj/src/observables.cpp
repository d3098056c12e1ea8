#include "whlab/observables.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace whlab {

namespace {

void check_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
    std::set<int> s(a.begin(), a.end());
    for (int q : b)
        if (s.count(q)) throw std::invalid_argument("qubit sets overlap");
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> u = a;
    u.insert(u.end(), b.begin(), b.end());
    std::sort(u.begin(), u.end());
    return u;
}

constexpr double INV_SQRT2 = 0.70710678118654752440;

}  // namespace

double subset_purity(const StateVector& psi, const std::vector<int>& S) {
    std::vector<int> keep = S;
    std::sort(keep.begin(), keep.end());
    if (2 * int(keep.size()) > psi.n) {
        std::vector<int> comp;
        std::size_t k = 0;
        for (int q = 0; q < psi.n; ++q) {
            if (k < keep.size() && keep[k] == q)
                ++k;
            else
                comp.push_back(q);
        }
        keep = std::move(comp);
    }
    return purity(reduced_density(psi, keep));
}

double renyi2_mutual(const StateVector& psi, const std::vector<int>& A,
                     const std::vector<int>& B) {
    check_disjoint(A, B);
    double pa = subset_purity(psi, A);
    double pb = subset_purity(psi, B);
    double pab = subset_purity(psi, set_union(A, B));
    return std::log2(pab / (pa * pb));
}

double renyi2_mutual(const DensityMatrix& joint, const std::vector<int>& A_bits,
                     const std::vector<int>& B_bits) {
    check_disjoint(A_bits, B_bits);
    double pa = purity(partial_trace(joint, A_bits));
    double pb = purity(partial_trace(joint, B_bits));
    double pab = purity(joint);
    return std::log2(pab / (pa * pb));
}

MutualInfoRecord mutual_info_record(const StateVector& psi, const std::vector<int>& R,
                                    const std::vector<int>& L, const std::vector<int>& T) {
    check_disjoint(R, L);
    check_disjoint(R, T);
    check_disjoint(L, T);
    MutualInfoRecord m;
    m.p_R = subset_purity(psi, R);
    m.p_T = subset_purity(psi, T);
    m.p_L = subset_purity(psi, L);
    m.p_RT = subset_purity(psi, set_union(R, T));
    m.p_RL = subset_purity(psi, set_union(R, L));
    m.p_LT = subset_purity(psi, set_union(L, T));
    m.p_RLT = subset_purity(psi, set_union(R, set_union(L, T)));
    m.I_RT = std::log2(m.p_RT / (m.p_R * m.p_T));
    m.I_RL = std::log2(m.p_RL / (m.p_R * m.p_L));
    m.I_RLT = std::log2(m.p_RLT / (m.p_R * m.p_LT));
    m.I3 = m.I_RT + m.I_RL - m.I_RLT;
    return m;
}

double tripartite_info(const StateVector& psi, const std::vector<int>& R,
                       const std::vector<int>& L, const std::vector<int>& T) {
    return mutual_info_record(psi, R, L, T).I3;
}

cplx otoc_H(const Couplings& c, InteractionKind kind, double mu, double t_L, double t_R, int j,
            double beta) {
    const int N = c.N, n2 = N / 2;
    if (j < 0 || j >= N) throw std::invalid_argument("otoc: fermion index out of range");
    OperatorSum HL = build_hamiltonian(c, Side::left);
    OperatorSum HR = build_hamiltonian(c, Side::right);
    BlockEvolver bl(HL, 0, n2), br(HR, n2, n2);

    StateVector tfd = max_entangled_state(N);
    if (beta != 0.0) {
        bl.imaginary_time_unnormalized(tfd, beta / 2);
        tfd.normalize();
    }

    StateVector ket = tfd;
    br.real_time(ket, t_R);
    apply_pauli(ket, majorana_string(Side::right, j, N));
    ket.amp *= INV_SQRT2;
    br.real_time(ket, -t_R);
    apply_interaction_exponential(ket, kind, N, 0, cplx(0, -mu));
    bl.real_time(ket, t_L);
    apply_pauli(ket, majorana_string(Side::left, j, N));
    ket.amp *= INV_SQRT2;
    bl.real_time(ket, -t_L);

    StateVector bra = tfd;
    apply_interaction_exponential(bra, kind, N, 0, cplx(0, -mu));
    return cplx(0, -1) * bra.amp.dot(ket.amp);
}

double otoc_C(const Couplings& c, InteractionKind kind, double mu, double t_L, double t_R, int j,
              double beta) {
    return -2.0 * otoc_H(c, kind, mu, t_L, t_R, j, beta).imag();
}

cplx otoc_h_euclidean(const Couplings& c, InteractionKind kind, double mu, double tau1,
                      double tau2, int j, double beta) {
    const int N = c.N, n2 = N / 2;
    if (j < 0 || j >= N) throw std::invalid_argument("otoc: fermion index out of range");
    OperatorSum HL = build_hamiltonian(c, Side::left);
    OperatorSum HR = build_hamiltonian(c, Side::right);
    BlockEvolver bl(HL, 0, n2), br(HR, n2, n2);

    StateVector tfd = max_entangled_state(N);
    if (beta != 0.0) {
        bl.imaginary_time_unnormalized(tfd, beta / 2);
        tfd.normalize();
    }

    StateVector ket = tfd;
    br.imaginary_time_unnormalized(ket, tau2);
    apply_pauli(ket, majorana_string(Side::right, j, N));
    ket.amp *= INV_SQRT2;
    br.imaginary_time_unnormalized(ket, -tau2);
    apply_interaction_exponential(ket, kind, N, 0, cplx(-mu, 0));
    bl.imaginary_time_unnormalized(ket, tau1);
    apply_pauli(ket, majorana_string(Side::left, j, N));
    ket.amp *= INV_SQRT2;
    bl.imaginary_time_unnormalized(ket, -tau1);

    StateVector bra = tfd;
    apply_interaction_exponential(bra, kind, N, 0, cplx(mu, 0));
    return cplx(0, -1) * bra.amp.dot(ket.amp);
}

double euclidean_2pt(const Couplings& c, int j, double tau, double beta) {
    const int N = c.N, n2 = N / 2;
    if (j < 0 || j >= N) throw std::invalid_argument("euclidean_2pt: fermion index out of range");
    if (tau < 0 || tau > beta) throw std::invalid_argument("euclidean_2pt: tau outside [0, beta]");
    OperatorSum HL = build_hamiltonian(c, Side::left);
    BlockEvolver bl(HL, 0, n2);

    StateVector I = max_entangled_state(N);
    StateVector z = I;
    bl.imaginary_time_unnormalized(z, beta);
    cplx Z = I.amp.dot(z.amp);

    StateVector w = I;
    apply_pauli(w, majorana_string(Side::left, j, N));
    bl.imaginary_time_unnormalized(w, tau);
    apply_pauli(w, majorana_string(Side::left, j, N));
    bl.imaginary_time_unnormalized(w, beta - tau);
    cplx num = I.amp.dot(w.amp) * 0.5;  // two 1/sqrt(2) string weights

    return (2.0 * num / Z).real();
}

}  // namespace whlab
