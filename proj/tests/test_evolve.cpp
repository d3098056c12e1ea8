#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "whlab/evolve.hpp"
#include "whlab/models.hpp"

using namespace whlab;

TEST_CASE("diagonal engine matches dense engine") {
    const int n = 6;
    OperatorSum H(n);
    std::mt19937_64 g(21);
    std::normal_distribution<double> d;
    for (int it = 0; it < 10; ++it)
        H.add_string(0, std::uniform_int_distribution<uint64_t>(0, 63)(g), d(g));
    REQUIRE(H.is_diagonal());
    StateVector psi = testutil::random_state(n, 5);

    Evolver diag(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.dense());
    Eigen::VectorXcd ph(psi.amp.size());
    for (std::int64_t k = 0; k < ph.size(); ++k) ph[k] = std::exp(cplx(0, -0.7 * es.eigenvalues()[k]));
    Eigen::VectorXcd expect =
        es.eigenvectors() * ph.cwiseProduct((es.eigenvectors().adjoint() * psi.amp).eval());

    StateVector got = diag.real_time(psi, 0.7);
    CHECK(testutil::vec_diff(got.amp, expect) < 1e-12);

    double lg_diag = 0;
    StateVector gi = diag.imaginary_time(psi, 0.9, &lg_diag);
    Eigen::VectorXcd ew(psi.amp.size());
    for (std::int64_t k = 0; k < ew.size(); ++k) ew[k] = std::exp(-0.9 * es.eigenvalues()[k]);
    Eigen::VectorXcd rawout =
        es.eigenvectors() * ew.cwiseProduct((es.eigenvectors().adjoint() * psi.amp).eval());
    CHECK(testutil::vec_diff(gi.amp, rawout.normalized()) < 1e-12);
    CHECK(lg_diag == doctest::Approx(std::log(rawout.norm())).epsilon(1e-10));
}

TEST_CASE("real-time evolution is unitary and composes") {
    const int n = 6;
    OperatorSum H = testutil::random_hermitian(n, 20, 77);
    Evolver ev(H);
    StateVector psi = testutil::random_state(n, 6);
    StateVector a = ev.real_time(psi, 0.8);
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
    StateVector b = ev.real_time(ev.real_time(psi, 0.3), 0.5);
    CHECK(testutil::vec_diff(a.amp, b.amp) < 1e-10);
    StateVector back = ev.real_time(a, -0.8);
    CHECK(testutil::vec_diff(back.amp, psi.amp) < 1e-10);
}

TEST_CASE("krylov engine tracks the dense result") {
    const int n = 10;
    OperatorSum H = testutil::random_hermitian(n, 40, 123);
    StateVector psi = testutil::random_state(n, 9);

    Evolver dense(H);  // n <= 14 so this is the dense engine
    EvolveOptions kopt;
    kopt.dense_threshold = 4;
    Evolver krylov(H, kopt);

    StateVector a = dense.real_time(psi, 2.0);
    StateVector b = krylov.real_time(psi, 2.0);
    CHECK(testutil::vec_diff(a.amp, b.amp) < 1e-9);

    double lga = 0, lgb = 0;
    StateVector ia = dense.imaginary_time(psi, 1.5, &lga);
    StateVector ib = krylov.imaginary_time(psi, 1.5, &lgb);
    CHECK(testutil::vec_diff(ia.amp, ib.amp) < 1e-8);
    CHECK(lga == doctest::Approx(lgb).epsilon(1e-8));
}

TEST_CASE("krylov reports non-convergence") {
    const int n = 8;
    OperatorSum H = testutil::random_hermitian(n, 30, 55);
    EvolveOptions bad;
    bad.dense_threshold = 2;
    bad.krylov_dim = 3;
    bad.krylov_tol = 1e-14;
    bad.max_step_halvings = 0;
    Evolver ev(H, bad);
    StateVector psi = testutil::random_state(n, 4);
    CHECK_THROWS_AS(ev.real_time(psi, 50.0), std::runtime_error);
}

TEST_CASE("non-hermitian hamiltonians are rejected") {
    OperatorSum H(2);
    H.add_string(1, 0, cplx(0, 1));
    CHECK_THROWS_AS(Evolver{H}, std::invalid_argument);
}

TEST_CASE("thermofield double basics") {
    Couplings c = sample_syk(8, 4, 1.0, 11);
    OperatorSum HL = build_hamiltonian(c, Side::left);
    OperatorSum HR = build_hamiltonian(c, Side::right);

    StateVector I = thermofield_double(HL, 0.0);
    StateVector Iref = max_entangled_state(8);
    CHECK(testutil::vec_diff(I.amp, Iref.amp) < 1e-13);

    StateVector tfd = thermofield_double(HL, 4.0);
    CHECK(tfd.norm() == doctest::Approx(1.0));
    // one-sided evolutions agree on it: (H_L - H_R)|tfd> = 0
    OperatorSum diff = HL - HR;
    CHECK(diff.apply(tfd.amp).norm() < 1e-10);
}

TEST_CASE("block evolver agrees with the full-space engine") {
    const int n = 6, k = 3;
    for (int first : {0, 1, 3}) {
        OperatorSum H = testutil::random_hermitian(k, 12, 100 + first).embedded(n, first);
        BlockEvolver be(H, first, k);
        Evolver ev(H);
        StateVector s = testutil::random_state(n, 7 + first);

        StateVector br = s;
        be.real_time(br, 0.83);
        CHECK(testutil::vec_diff(br.amp, ev.real_time(s, 0.83).amp) < 1e-12);

        StateVector bi = s;
        be.imaginary_time_unnormalized(bi, 1.4);
        double log_norm = 0;
        StateVector ei = ev.imaginary_time(s, 1.4, &log_norm);
        CHECK(testutil::vec_diff(bi.amp, std::exp(log_norm) * ei.amp) < 1e-10);
    }
}

TEST_CASE("block evolver rejects support outside the block") {
    OperatorSum H(4);
    H.add_string(0b1001, 0, 1.0);  // straddles any 2-qubit block
    CHECK_THROWS_AS((BlockEvolver{H, 0, 2}), std::invalid_argument);
    CHECK_THROWS_AS((BlockEvolver{H, 2, 2}), std::invalid_argument);
}

TEST_CASE("block matrix application acts on the addressed qubits only") {
    StateVector s = testutil::random_state(5, 21);
    Eigen::MatrixXcd had(2, 2);
    had << 1, 1, 1, -1;
    had /= std::sqrt(2.0);
    StateVector got = s;
    apply_block_matrix(got, had, 3);
    for (std::int64_t b = 0; b < s.amp.size(); ++b) {
        std::int64_t lo = b & ~(std::int64_t{1} << 3), hi = b | (std::int64_t{1} << 3);
        cplx want = (s.amp[lo] + ((b >> 3) & 1 ? -1.0 : 1.0) * s.amp[hi]) / std::sqrt(2.0);
        CHECK(std::abs(got.amp[b] - want) < 1e-13);
    }
}
