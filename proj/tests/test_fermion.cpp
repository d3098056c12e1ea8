#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "whlab/fermion.hpp"

using namespace whlab;

TEST_CASE("two-fermion-per-side strings") {
    // left 0 -> X0, left 1 -> Y0, right 0 -> Z0 X1, right 1 -> Z0 Y1
    PauliTerm l0 = majorana_string(Side::left, 0, 2);
    CHECK(l0.x == 0b01);
    CHECK(l0.z == 0b00);
    CHECK(l0.phase == 0);
    PauliTerm l1 = majorana_string(Side::left, 1, 2);
    CHECK(l1.x == 0b01);
    CHECK(l1.z == 0b01);
    PauliTerm r0 = majorana_string(Side::right, 0, 2);
    CHECK(r0.x == 0b10);
    CHECK(r0.z == 0b01);
    PauliTerm r1 = majorana_string(Side::right, 1, 2);
    CHECK(r1.x == 0b10);
    CHECK(r1.z == 0b11);
}

TEST_CASE("general convention targets and chains") {
    // N=6: left j=4 sits on qubit 2 behind Z0 Z1; right j=3 on qubit 4 (odd -> Y)
    PauliTerm a = majorana_string(Side::left, 4, 6);
    CHECK(a.x == 0b000100);
    CHECK(a.z == 0b000011);
    PauliTerm b = majorana_string(Side::right, 3, 6);
    CHECK(b.x == 0b010000);
    CHECK(b.z == 0b011111);
}

TEST_CASE("anticommutation relations across both sides") {
    const int N = 6;
    std::vector<OperatorSum> psi;
    for (Side s : {Side::left, Side::right})
        for (int j = 0; j < N; ++j) psi.push_back(majorana({s, j}, N));
    for (std::size_t a = 0; a < psi.size(); ++a)
        for (std::size_t b = 0; b < psi.size(); ++b) {
            OperatorSum anti = psi[a] * psi[b] + psi[b] * psi[a];
            if (a == b) anti -= OperatorSum::identity(N);
            anti.compress(1e-14);
            CHECK(anti.empty());
        }
}

TEST_CASE("gamma operators square to one and carry the right prefactor") {
    // 2 i psi_0 psi_1 on one qubit block reduces to -Z
    OperatorSum g2 = gamma_operator({Side::left, {0, 1}}, 2);
    REQUIRE(g2.size() == 1);
    CHECK(g2.terms()[0].x == 0);
    CHECK(g2.terms()[0].z == 0b01);
    CHECK(g2.terms()[0].c.real() == doctest::Approx(-1.0));
    CHECK(std::abs(g2.terms()[0].c.imag()) < 1e-15);

    std::mt19937_64 g(5);
    const int N = 6;
    for (int it = 0; it < 20; ++it) {
        uint64_t mask = std::uniform_int_distribution<uint64_t>(1, (1 << N) - 1)(g);
        GammaIndex gi{it % 2 ? Side::left : Side::right, {}};
        for (int j = 0; j < N; ++j)
            if ((mask >> j) & 1) gi.indices.push_back(j);
        OperatorSum gop = gamma_operator(gi, N);
        CHECK(gop.is_hermitian(1e-12));
        OperatorSum sq = gop * gop;
        sq -= OperatorSum::identity(N);
        sq.compress(1e-12);
        CHECK(sq.empty());
    }
}

TEST_CASE("gamma table agrees with one-at-a-time construction") {
    const int N = 6;
    for (Side s : {Side::left, Side::right}) {
        auto tab = gamma_table(s, N);
        REQUIRE(tab.size() == 64);
        std::mt19937_64 g(7);
        for (int it = 0; it < 40; ++it) {
            uint64_t K = std::uniform_int_distribution<uint64_t>(0, 63)(g);
            GammaIndex gi{s, {}};
            for (int j = 0; j < N; ++j)
                if ((K >> j) & 1) gi.indices.push_back(j);
            OperatorSum ref = gamma_operator(gi, N);
            REQUIRE(ref.size() == 1);
            PauliTerm t = tab[K];
            OperatorSum viat(N);
            viat.add(t, 1.0);
            viat -= ref;
            viat.compress(1e-14);
            CHECK(viat.empty());
        }
    }
}

TEST_CASE("parity strings are signed Z products") {
    OperatorSum pl = parity_string(Side::left, 4);
    REQUIRE(pl.size() == 1);
    CHECK(pl.terms()[0].x == 0);
    CHECK(pl.terms()[0].z == 0b0011);
    CHECK(pl.terms()[0].c.real() == doctest::Approx(-1.0));  // i^{N/2} = i^2
    OperatorSum pr = parity_string(Side::right, 4);
    CHECK(pr.terms()[0].z == 0b1100);
    CHECK(pr.terms()[0].c.real() == doctest::Approx(-1.0));
}

TEST_CASE("chi ladder algebra") {
    const int N = 4;
    OperatorSum chi = chi_op(Side::left, N), chid = chi_dag(Side::left, N);
    OperatorSum sq = chi * chi;
    sq.compress(1e-14);
    CHECK(sq.empty());
    OperatorSum anti = chi * chid + chid * chi;
    anti -= OperatorSum::identity(N);
    anti.compress(1e-14);
    CHECK(anti.empty());
    // chi+ chi = (1 + Gamma2_0)/2 and chi chi+ = (1 - Gamma2_0)/2
    OperatorSum g2 = gamma_operator({Side::left, {0, 1}}, N);
    OperatorSum lhs = chid * chi;
    lhs -= 0.5 * (OperatorSum::identity(N) + g2);
    lhs.compress(1e-14);
    CHECK(lhs.empty());
    OperatorSum rhs = chi * chid;
    rhs -= 0.5 * (OperatorSum::identity(N) - g2);
    rhs.compress(1e-14);
    CHECK(rhs.empty());
}
