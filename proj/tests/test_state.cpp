#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "test_util.hpp"
#include "whlab/fermion.hpp"
#include "whlab/state.hpp"

using namespace whlab;

TEST_CASE("two fermion pairs give the singlet-like doubled vacuum") {
    StateVector I = max_entangled_state(2);
    // support on left=1/right=0 and left=0/right=1 only, second with phase i
    CHECK(std::abs(I.amp[0]) < 1e-14);
    CHECK(std::abs(I.amp[3]) < 1e-14);
    CHECK(std::abs(I.amp[1] - cplx(1 / std::sqrt(2.0), 0)) < 1e-12);
    CHECK(std::abs(I.amp[2] - cplx(0, 1 / std::sqrt(2.0))) < 1e-12);
}

TEST_CASE("annihilated by every paired combination") {
    for (int N : {4, 6, 8}) {
        StateVector I = max_entangled_state(N);
        CHECK(I.norm() == doctest::Approx(1.0));
        for (int j = 0; j < N; ++j) {
            OperatorSum c = majorana({Side::left, j}, N);
            c += cplx(0, 1) * majorana({Side::right, j}, N);
            CHECK(c.apply(I.amp).norm() < 1e-12);
        }
    }
}

TEST_CASE("left expectations reduce to normalized traces") {
    const int N = 6;
    StateVector I = max_entangled_state(N);
    std::mt19937_64 g(3);
    std::normal_distribution<double> d;
    OperatorSum A(N);
    for (int it = 0; it < 10; ++it) {
        uint64_t x = std::uniform_int_distribution<uint64_t>(0, 7)(g);
        uint64_t z = std::uniform_int_distribution<uint64_t>(0, 7)(g);
        A.add_string(x, z, d(g));  // left block only
    }
    cplx expect = I.amp.dot(A.apply(I.amp));
    CHECK(std::abs(expect - cplx(A.trace_over_dim(), 0)) < 1e-12);

    // opposite-parity pairing across the cut
    for (int k = 0; k < N / 2; ++k) {
        OperatorSum zz(N);
        zz.add_string(0, (uint64_t{1} << k) | (uint64_t{1} << (k + N / 2)), 1.0);
        Eigen::VectorXcd v = zz.apply(I.amp);
        CHECK((v + I.amp).norm() < 1e-12);
    }
}

TEST_CASE("reduced density of a Bell pair and consistency with partial trace") {
    StateVector bell = basis_state(2, 0);
    bell.amp[0] = bell.amp[3] = 1 / std::sqrt(2.0);
    DensityMatrix ra = reduced_density(bell, {0});
    CHECK(testutil::mat_diff(ra.rho, 0.5 * Eigen::MatrixXcd::Identity(2, 2)) < 1e-14);
    CHECK(purity(ra) == doctest::Approx(0.5));

    StateVector psi = testutil::random_state(3, 11);
    DensityMatrix full = reduced_density(psi, {0, 1, 2});
    CHECK(purity(full) == doctest::Approx(1.0));
    DensityMatrix direct = reduced_density(psi, {0, 2});
    DensityMatrix via = partial_trace(full, {0, 2});
    CHECK(testutil::mat_diff(direct.rho, via.rho) < 1e-12);
    CHECK(std::abs(direct.rho.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("measurement enumerates branches of a GHZ state") {
    StateVector ghz = basis_state(3, 0);
    ghz.amp[0] = ghz.amp[7] = 1 / std::sqrt(2.0);
    auto outs = measure_qubits(ghz, {0}, {});
    REQUIRE(outs.size() == 2);
    CHECK(outs[0].bits == 0);
    CHECK(outs[0].prob == doctest::Approx(0.5));
    CHECK(std::abs(outs[0].state.amp[0] - 1.0) < 1e-14);
    CHECK(outs[1].bits == 1);
    CHECK(std::abs(outs[1].state.amp[7] - 1.0) < 1e-14);

    // zero-probability branches are dropped
    auto outs2 = measure_qubits(ghz, {0, 1}, {});
    REQUIRE(outs2.size() == 2);
    CHECK(outs2[0].bits == 0b00);
    CHECK(outs2[1].bits == 0b11);

    MeasurePolicy sample{MeasurePolicy::sample, 42, 1e-14};
    auto one = measure_qubits(ghz, {0}, sample);
    REQUIRE(one.size() == 1);
    auto again = measure_qubits(ghz, {0}, sample);
    CHECK(one[0].bits == again[0].bits);
}

TEST_CASE("listed qubit order controls outcome bit order") {
    StateVector s = basis_state(2, 0b01);  // qubit0 = 1, qubit1 = 0
    auto a = measure_qubits(s, {0, 1}, {});
    REQUIRE(a.size() == 1);
    CHECK(a[0].bits == 0b01);
    auto b = measure_qubits(s, {1, 0}, {});
    REQUIRE(b.size() == 1);
    CHECK(b[0].bits == 0b10);
}

TEST_CASE("dump and load round trip") {
    StateVector s = testutil::random_state(4, 99);
    std::string path = "state_roundtrip.bin";
    dump_state(s, path);
    StateVector t = load_state(path);
    CHECK(t.n == 4);
    CHECK(testutil::vec_diff(s.amp, t.amp) == 0.0);
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}

TEST_CASE("global phase fix prefers the lowest maximal amplitude") {
    StateVector s;
    s.n = 2;
    s.amp.resize(4);
    s.amp << cplx(0, 0.5), cplx(0, -0.5), cplx(0.5, 0), cplx(-0.5, 0);
    fix_global_phase(s);
    CHECK(s.amp[0].real() == doctest::Approx(0.5));
    CHECK(std::abs(s.amp[0].imag()) < 1e-15);
}
