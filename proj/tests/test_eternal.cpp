#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "whlab/eternal.hpp"
#include "whlab/evolve.hpp"
#include "whlab/models.hpp"
#include "whlab/state.hpp"

using namespace whlab;

namespace {

// Dense matrix of a sum supported on the contiguous qubits [first, first+k).
Eigen::MatrixXcd side_block(const OperatorSum& h, int first, int k) {
    std::vector<OperatorSum::Term> raw;
    for (const auto& t : h.terms()) raw.push_back({t.x >> first, t.z >> first, t.c});
    return OperatorSum::from_terms(k, std::move(raw)).dense();
}

OperatorSum coupled_hamiltonian(const Couplings& c, InteractionKind kind, double mu) {
    OperatorSum h = build_hamiltonian(c, Side::left) + build_hamiltonian(c, Side::right);
    if (mu != 0.0) {
        OperatorSum v = build_interaction(kind, c.N);
        v *= mu;
        h += v;
    }
    return h;
}

}  // namespace

TEST_CASE("decoupled spectrum is the sum of the side spectra") {
    const Couplings c = sample_syk(6, 4, 1.0, 31337);
    const auto full = eternal_spectrum(c, InteractionKind::majorana_pairs, 0.0, 64);
    REQUIRE(full.eigenvalues.size() == 64);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> el(
        side_block(build_hamiltonian(c, Side::left), 0, 3));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> er(
        side_block(build_hamiltonian(c, Side::right), 3, 3));
    std::vector<double> sums;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) sums.push_back(el.eigenvalues()[i] + er.eigenvalues()[j]);
    std::sort(sums.begin(), sums.end());

    for (int i = 0; i < 64; ++i) CHECK(full.eigenvalues[i] == doctest::Approx(sums[i]).epsilon(1e-9));
}

TEST_CASE("ground state solves the eigenproblem and the list is ordered") {
    const Couplings c = sample_syk(8, 4, 1.0, 2218);
    const auto sr = eternal_spectrum(c, InteractionKind::majorana_pairs, 0.3, 6);
    REQUIRE(sr.eigenvalues.size() == 6);
    for (std::size_t i = 1; i < sr.eigenvalues.size(); ++i)
        CHECK(sr.eigenvalues[i] >= sr.eigenvalues[i - 1]);
    CHECK(sr.gap > 0);
    CHECK(sr.E0 == doctest::Approx(sr.eigenvalues[0]).epsilon(1e-14));

    const OperatorSum h = coupled_hamiltonian(c, InteractionKind::majorana_pairs, 0.3);
    const Eigen::VectorXcd resid = h.apply(sr.ground_state.amp) - sr.E0 * sr.ground_state.amp;
    CHECK(resid.norm() < 1e-9);
    CHECK(sr.ground_state.norm() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(eternal_spectrum(c, InteractionKind::majorana_pairs, 0.3, 1),
                    std::invalid_argument);
}

TEST_CASE("dense and iterative eigensolvers agree") {
    const Couplings c = sample_syk(10, 4, 1.0, 77);
    const auto d =
        eternal_spectrum(c, InteractionKind::majorana_pairs, 0.3, 10, SpectrumMethod::dense);
    const auto it =
        eternal_spectrum(c, InteractionKind::majorana_pairs, 0.3, 10, SpectrumMethod::iterative);
    REQUIRE(d.eigenvalues.size() == 10);
    REQUIRE(it.eigenvalues.size() == 10);
    for (int i = 0; i < 10; ++i)
        CHECK(std::abs(d.eigenvalues[i] - it.eigenvalues[i]) < 1e-9);

    const OperatorSum h = coupled_hamiltonian(c, InteractionKind::majorana_pairs, 0.3);
    const Eigen::VectorXcd resid = h.apply(it.ground_state.amp) - it.E0 * it.ground_state.amp;
    CHECK(resid.norm() < 1e-8);
}

TEST_CASE("pair parity coupling gives a doubly degenerate spectrum at N mod 4 = 2") {
    const Couplings c = sample_syk(10, 4, 1.0, 424242);
    const auto sr = eternal_spectrum(c, InteractionKind::qubit_pairs, 0.3, 8);
    REQUIRE(sr.eigenvalues.size() == 8);
    for (int p = 0; p < 4; ++p)
        CHECK(sr.eigenvalues[2 * p + 1] - sr.eigenvalues[2 * p] < 1e-8);
    CHECK(sr.gap > 1e-8);
    CHECK(sr.ground_multiplet.cols() == 2);
}

TEST_CASE("gap power law runs on a desk ensemble and validates its inputs") {
    std::vector<Couplings> ens;
    for (uint64_t i = 0; i < 2; ++i) ens.push_back(sample_syk(8, 4, 1.0, 9100 + i));
    std::vector<double> grid;
    for (int i = 1; i <= 8; ++i) grid.push_back(0.05 * i);

    const auto r = gap_power_law(ens, InteractionKind::majorana_pairs, grid, 0.0, 0.3);
    REQUIRE(r.mean_gap.size() == grid.size());
    for (double g : r.mean_gap) CHECK(g > 0);
    CHECK(r.mean_gap.back() > r.mean_gap.front());
    CHECK(r.fit.converged);
    // A two instance ensemble at this size pins the exponent poorly, so only
    // require a sane positive growth law here.
    CHECK(r.fit.b > 0.05);
    CHECK(std::isfinite(r.fit.b));

    CHECK_THROWS_AS(gap_power_law({}, InteractionKind::majorana_pairs, grid, 0.0, 0.3),
                    std::invalid_argument);
    CHECK_THROWS_AS(gap_power_law(ens, InteractionKind::majorana_pairs, {0.1, 0.2, 0.3}, 0.0, 0.3),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        gap_power_law(ens, InteractionKind::majorana_pairs, {-0.1, 0.1, 0.2, 0.3}, 0.0, 0.3),
        std::invalid_argument);
    CHECK_THROWS_AS(gap_power_law(ens, InteractionKind::majorana_pairs, grid, 0.0, 0.12),
                    std::invalid_argument);
}

TEST_CASE("optimal beta tracks the coupling strength") {
    const Couplings c = sample_syk(8, 4, 1.0, 5);
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.5 * i);

    // Strong coupling: the ground state approaches the pair state tfd(0).
    const auto strong = optimal_beta(c, InteractionKind::majorana_pairs, 8.0, grid);
    CHECK(strong.overlap > 0.98);
    CHECK(strong.beta_star <= 0.5);

    const auto mid = optimal_beta(c, InteractionKind::majorana_pairs, 2.0, grid);
    const auto weak = optimal_beta(c, InteractionKind::majorana_pairs, 0.5, grid);
    CHECK(weak.beta_star > mid.beta_star);

    for (double mu : {0.3, 0.6, 1.0}) {
        const auto r = optimal_beta(c, InteractionKind::majorana_pairs, mu, grid);
        CHECK(r.overlap > 0.8);
        CHECK(r.overlap <= 1.0 + 1e-12);
        CHECK_FALSE(r.boundary);
    }

    CHECK_THROWS_AS(optimal_beta(c, InteractionKind::majorana_pairs, 0.5, {0.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(optimal_beta(c, InteractionKind::majorana_pairs, 0.5, {1.0, 0.5, 2.0}),
                    std::invalid_argument);
}

TEST_CASE("figure of merit is a small variational excess at tuned coupling") {
    const Couplings c = sample_syk(8, 4, 1.0, 5);
    const auto sr = eternal_spectrum(c, InteractionKind::majorana_pairs, 1.0, 4);
    double best = 1e300;
    for (double beta = 1.0; beta <= 8.0; beta += 0.5)
        best = std::min(best, sl2r_figure_of_merit(c, InteractionKind::majorana_pairs, 1.0, beta));
    CHECK(best >= 0);
    CHECK(best < sr.gap / std::abs(sr.E0));
}

TEST_CASE("discrete symmetries cancel identically") {
    for (int N : {8, 10}) {
        const Couplings c = sample_syk(N, 4, 1.0, 99);
        const auto rep = discrete_symmetries(c, InteractionKind::majorana_pairs);
        CHECK(rep.hamiltonian_invariant);
        CHECK(rep.q_squared_is_parity);
        if (N % 4 == 0) {
            CHECK(rep.q_parity_commutes);
            CHECK_FALSE(rep.q_parity_anticommutes);
        } else {
            CHECK_FALSE(rep.q_parity_commutes);
            CHECK(rep.q_parity_anticommutes);
        }
    }
    const Couplings c10 = sample_syk(10, 4, 1.0, 99);
    CHECK(discrete_symmetries(c10, InteractionKind::qubit_pairs).hamiltonian_invariant);
}

TEST_CASE("charge operator is unitary with fourth roots of unity") {
    const OperatorSum q = q_operator(6);
    const Eigen::MatrixXcd qd = q.dense();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(64, 64);
    CHECK((qd * qd.adjoint() - eye).norm() < 1e-9);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(qd);
    for (int i = 0; i < 64; ++i) {
        const cplx ev = es.eigenvalues()[i];
        double d = 1e300;
        for (cplx root : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)})
            d = std::min(d, std::abs(ev - root));
        CHECK(d < 1e-9);
    }
}

TEST_CASE("boost annihilates the time symmetric state and the null generators close") {
    const Couplings c = sample_syk(8, 4, 1.0, 5);
    CHECK(boost_norm_on_tfd(c, 4.0) < 1e-9);

    const double E0 = eternal_spectrum(c, InteractionKind::majorana_pairs, 0.3, 2).E0;
    const auto g = sl2r_generators(c, -0.3, E0);
    OperatorSum closure = g.P_plus + g.P_minus + g.E;
    CHECK(closure.max_abs_coeff() < 1e-12);

    // The generator expectation reproduces the figure of merit at matched signs.
    const StateVector tfd = thermofield_double(build_hamiltonian(c, Side::left), 4.0);
    const double via_e = std::real(tfd.amp.dot(g.E.apply(tfd.amp))) / std::abs(E0);
    const double fom = sl2r_figure_of_merit(c, InteractionKind::majorana_pairs, 0.3, 4.0);
    CHECK(via_e == doctest::Approx(fom).epsilon(1e-9));
}
