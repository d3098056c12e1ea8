#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "whlab/evolve.hpp"
#include "whlab/models.hpp"
#include "whlab/rng.hpp"

using namespace whlab;

TEST_CASE("all-to-all sampling is exhaustive, ordered, deterministic") {
    Couplings c = sample_syk(10, 4, 1.0, 7);
    CHECK(c.entries.size() == 210);  // C(10, 4)
    CHECK(c.entries.front().idx == std::vector<int>{0, 1, 2, 3});
    CHECK(c.entries[1].idx == std::vector<int>{0, 1, 2, 4});
    CHECK(c.entries.back().idx == std::vector<int>{6, 7, 8, 9});

    Couplings again = sample_syk(10, 4, 1.0, 7);
    for (std::size_t i = 0; i < c.entries.size(); ++i)
        CHECK(c.entries[i].value == again.entries[i].value);
    Couplings other = sample_syk(10, 4, 1.0, 8);
    CHECK(c.entries[0].value != other.entries[0].value);
}

TEST_CASE("coupling variance follows the all-to-all scaling") {
    // var = 2^{q-1} (q-1)! / (q N^{q-1}) at J = 1: 0.012 for N=10, q=4
    double sum = 0, sum2 = 0;
    std::size_t count = 0;
    for (uint64_t s = 0; s < 500; ++s) {
        Couplings c = sample_syk(10, 4, 1.0, hash64(999, s));
        for (const auto& e : c.entries) {
            sum += e.value;
            sum2 += e.value * e.value;
            ++count;
        }
    }
    double mean = sum / count;
    double var = sum2 / count - mean * mean;
    double se_var = 0.012 * std::sqrt(2.0 / (count - 1));
    CHECK(std::abs(mean) < 4 * std::sqrt(0.012 / count));
    CHECK(std::abs(var - 0.012) < 4 * se_var);
}

TEST_CASE("pair-site model counts and variance") {
    Couplings c = sample_pg_commuting(16, 4, 1.0, 3);
    CHECK(c.entries.size() == 28);  // C(8, 2)
    double target = 8.0 / 7.0;
    double sum2 = 0;
    std::size_t count = 0;
    for (uint64_t s = 0; s < 3000; ++s) {
        Couplings ci = sample_pg_commuting(16, 4, 1.0, hash64(1234, s));
        for (const auto& e : ci.entries) {
            sum2 += e.value * e.value;
            ++count;
        }
    }
    double var = sum2 / count;
    CHECK(std::abs(var - target) < 4 * target * std::sqrt(2.0 / (count - 1)));
}

TEST_CASE("hamiltonians are hermitian, traceless, and mirror across sides") {
    Couplings c = sample_syk(8, 4, 1.0, 19);
    OperatorSum HL = build_hamiltonian(c, Side::left);
    OperatorSum HR = build_hamiltonian(c, Side::right);
    CHECK(HL.is_hermitian(1e-12));
    CHECK(HR.is_hermitian(1e-12));
    CHECK(HL.trace_over_dim() == 0.0);
    CHECK(HL.size() == 70);  // C(8,4) distinct strings

    // right-side strings never touch left qubits (even products cancel chains)
    for (const auto& t : HR.terms()) {
        CHECK((t.x & 0b1111) == 0);
        CHECK((t.z & 0b1111) == 0);
    }

    StateVector I = max_entangled_state(8);
    OperatorSum diff = HL - HR;
    CHECK(diff.apply(I.amp).norm() < 1e-12);
}

TEST_CASE("pair-site hamiltonian is classical and commuting") {
    Couplings c = sample_pg_commuting(12, 4, 1.0, 4);
    OperatorSum H = build_hamiltonian(c, Side::left);
    CHECK(H.is_diagonal());
    CHECK(H.is_hermitian(1e-12));
    OperatorSum H2 = build_hamiltonian(c, Side::right);
    OperatorSum comm = H.commutator(H2);
    CHECK(comm.empty());
}

TEST_CASE("rejected model parameters") {
    CHECK_THROWS_AS(sample_syk(9, 4, 1.0, 0), std::invalid_argument);   // odd N
    CHECK_THROWS_AS(sample_syk(10, 6, 1.0, 0), std::invalid_argument);  // q = 2 mod 4
    CHECK_THROWS_AS(sample_syk(10, 3, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_syk(4, 8, 1.0, 0), std::invalid_argument);  // q > N
}

TEST_CASE("fermion-pair interaction on one pair of fermions") {
    OperatorSum V = build_interaction(InteractionKind::majorana_pairs, 2);
    // i(psi^l_0 psi^r_0 + psi^l_1 psi^r_1) = (Y0 X1 - X0 Y1)/2
    OperatorSum expect(2);
    expect.add_string(0b11, 0b01, 0.5);   // Y0 X1
    expect.add_string(0b11, 0b10, -0.5);  // X0 Y1
    OperatorSum d = V - expect;
    d.compress(1e-14);
    CHECK(d.empty());
}

TEST_CASE("interaction expectation on the doubled vacuum") {
    for (int N : {4, 6, 8}) {
        OperatorSum V = build_interaction(InteractionKind::majorana_pairs, N);
        StateVector I = max_entangled_state(N);
        cplx ev = I.amp.dot(V.apply(I.amp));
        CHECK(std::abs(ev - cplx(-N / 2.0, 0)) < 1e-12);
        // |I> is an exact eigenvector
        Eigen::VectorXcd vi = V.apply(I.amp);
        CHECK((vi + (N / 2.0) * I.amp).norm() < 1e-12);
    }
}

TEST_CASE("pair-parity interaction is the cross-cut ZZ sum") {
    const int N = 8;
    OperatorSum Vb = build_interaction(InteractionKind::qubit_pairs, N);
    OperatorSum expect(N);
    for (int k = 0; k < N / 2; ++k)
        expect.add_string(0, (uint64_t{1} << k) | (uint64_t{1} << (k + N / 2)), 1.0);
    OperatorSum d = Vb - expect;
    d.compress(1e-14);
    CHECK(d.empty());

    StateVector I = max_entangled_state(N);
    Eigen::VectorXcd vi = Vb.apply(I.amp);
    CHECK((vi + (N / 2.0) * I.amp).norm() < 1e-12);  // eigenvalue -N/2 on |I>
}

TEST_CASE("couplings json round trip") {
    Couplings c = sample_pg_commuting(8, 4, 0.7, 21);
    std::string text = couplings_to_json(c);
    Couplings back = couplings_from_json(text);
    CHECK(back.model == c.model);
    CHECK(back.N == c.N);
    CHECK(back.q == c.q);
    CHECK(back.J == c.J);
    CHECK(back.seed == c.seed);
    REQUIRE(back.entries.size() == c.entries.size());
    for (std::size_t i = 0; i < c.entries.size(); ++i) {
        CHECK(back.entries[i].idx == c.entries[i].idx);
        CHECK(back.entries[i].value == c.entries[i].value);
    }
    OperatorSum h1 = build_hamiltonian(c, Side::left);
    OperatorSum h2 = build_hamiltonian(back, Side::left);
    OperatorSum d = h1 - h2;
    d.compress(0.0);
    CHECK(d.empty());
}

namespace {

// Dense exp(scale * V) on the full register via eigendecomposition.
Eigen::VectorXcd dense_exponential(const OperatorSum& V, cplx scale, const Eigen::VectorXcd& in) {
    Eigen::MatrixXcd M = V.dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
    Eigen::VectorXcd phases = (scale * es.eigenvalues().cast<cplx>().array()).exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * in;
}

}  // namespace

TEST_CASE("interaction exponential matches dense eigensolver") {
    const int N = 6;
    for (InteractionKind kind : {InteractionKind::majorana_pairs, InteractionKind::qubit_pairs}) {
        OperatorSum V = build_interaction(kind, N);
        StateVector s = testutil::random_state(N, kind == InteractionKind::majorana_pairs ? 5 : 6);
        for (cplx scale : {cplx(0, 0.37), cplx(-0.8, 0), cplx(0.25, -0.6)}) {
            StateVector got = s;
            apply_interaction_exponential(got, kind, N, 0, scale);
            Eigen::VectorXcd want = dense_exponential(V, scale, s.amp);
            CHECK(testutil::vec_diff(got.amp, want) < 1e-12);
        }
    }
}

TEST_CASE("interaction exponential honors register offset") {
    const int N = 4, offset = 2, total = N + 3;
    OperatorSum V = build_interaction(InteractionKind::majorana_pairs, N).embedded(total, offset);
    StateVector s = testutil::random_state(total, 31);
    StateVector got = s;
    apply_interaction_exponential(got, InteractionKind::majorana_pairs, N, offset, cplx(0, -0.52));
    Evolver ev(V);
    StateVector want = ev.real_time(s, 0.52);  // exp(-i t V) with t = 0.52
    CHECK(testutil::vec_diff(got.amp, want.amp) < 1e-12);
}
