#pragma once

#include <random>

#include "whlab/pauli.hpp"
#include "whlab/state.hpp"

namespace whlab::testutil {

inline StateVector random_state(int n, uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d;
    StateVector s;
    s.n = n;
    s.amp.resize(std::int64_t{1} << n);
    for (std::int64_t i = 0; i < s.amp.size(); ++i) s.amp[i] = cplx(d(g), d(g));
    s.normalize();
    return s;
}

inline PauliTerm random_term(int n, std::mt19937_64& g) {
    std::uniform_int_distribution<uint64_t> bits(0, (uint64_t{1} << n) - 1);
    std::uniform_int_distribution<int> ph(0, 3);
    PauliTerm p;
    p.n = n;
    p.x = bits(g);
    p.z = bits(g);
    p.phase = static_cast<uint8_t>(ph(g));
    return p;
}

inline OperatorSum random_hermitian(int n, int terms, uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d;
    std::uniform_int_distribution<uint64_t> bits(0, (uint64_t{1} << n) - 1);
    OperatorSum s(n);
    for (int i = 0; i < terms; ++i) s.add_string(bits(g), bits(g), 0.0);  // placeholder strings
    // assign real coefficients to the Hermitian string basis
    OperatorSum out(n);
    for (const auto& t : s.terms()) out.add_string(t.x, t.z, d(g));
    return out;
}

inline double mat_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline double vec_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// max |a - e^{i phi} b| over the optimal global phase
inline double vec_diff_up_to_phase(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    cplx ov = b.dot(a);
    cplx ph = std::abs(ov) > 1e-14 ? ov / std::abs(ov) : cplx(1, 0);
    return (a - ph * b).cwiseAbs().maxCoeff();
}

}  // namespace whlab::testutil
