#include "whlab/eternal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "whlab/evolve.hpp"
#include "whlab/fermion.hpp"
#include "whlab/parallel.hpp"
#include "whlab/rng.hpp"

namespace whlab {
namespace {

constexpr double CLUSTER_TOL = 1e-8;

OperatorSum block_restriction(const OperatorSum& H, int first, int k) {
    const uint64_t block = ((k == 64) ? ~uint64_t(0) : ((uint64_t(1) << k) - 1)) << first;
    std::vector<OperatorSum::Term> raw;
    raw.reserve(H.size());
    for (const auto& t : H.terms()) {
        if ((t.x | t.z) & ~block)
            throw std::invalid_argument("block restriction: support outside the block");
        raw.push_back({t.x >> first, t.z >> first, t.c});
    }
    return OperatorSum::from_terms(k, std::move(raw));
}

// H = HL (x) 1 + 1 (x) HR + mu V with the left block on the low qubits, so a
// state reshapes to a dl x dr matrix and the side terms become products.
struct SplitHamiltonian {
    Eigen::MatrixXcd hl, hr;
    OperatorSum v;  // interaction already scaled by mu
    bool has_v = false;
    Eigen::Index dl = 0, dr = 0;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& in) const {
        Eigen::VectorXcd out(in.size());
        Eigen::Map<const Eigen::MatrixXcd> m(in.data(), dl, dr);
        Eigen::Map<Eigen::MatrixXcd> o(out.data(), dl, dr);
        o.noalias() = hl * m;
        o.noalias() += m * hr.transpose();
        if (has_v) out += v.apply(in);
        return out;
    }
};

SplitHamiltonian split_hamiltonian(const Couplings& c, InteractionKind kind, double mu) {
    SplitHamiltonian s;
    const int n2 = c.N / 2;
    s.dl = Eigen::Index(1) << n2;
    s.dr = s.dl;
    s.hl = block_restriction(build_hamiltonian(c, Side::left), 0, n2).dense();
    s.hr = block_restriction(build_hamiltonian(c, Side::right), n2, n2).dense();
    if (mu != 0.0) {
        s.v = build_interaction(kind, c.N);
        s.v *= mu;
        s.has_v = true;
    }
    return s;
}

Eigen::MatrixXcd dense_full(const SplitHamiltonian& s) {
    const Eigen::Index dim = s.dl * s.dr;
    Eigen::MatrixXcd h = s.has_v ? s.v.dense() : Eigen::MatrixXcd::Zero(dim, dim).eval();
    for (Eigen::Index r = 0; r < s.dr; ++r) h.block(r * s.dl, r * s.dl, s.dl, s.dl) += s.hl;
    for (Eigen::Index a = 0; a < s.dr; ++a)
        for (Eigen::Index b = 0; b < s.dr; ++b) {
            const cplx e = s.hr(a, b);
            if (e == cplx(0, 0)) continue;
            for (Eigen::Index i = 0; i < s.dl; ++i) h(a * s.dl + i, b * s.dl + i) += e;
        }
    return h;
}

struct EigenPairs {
    std::vector<double> vals;  // ascending
    Eigen::MatrixXcd vecs;     // matching columns
};

// Deflated Lanczos with full reorthogonalization: each round converges the
// lowest eigenpair of the complement of the pairs already found, so exact
// degeneracies are recovered copy by copy.
EigenPairs lowest_eigenpairs(const SplitHamiltonian& s, int k) {
    const Eigen::Index dim = s.dl * s.dr;
    EigenPairs out;
    out.vecs.resize(dim, k);
    GaussianStream gs(hash64(0x7a1c3b5d, uint64_t(dim)));
    const int m_max = static_cast<int>(std::min<Eigen::Index>(dim, 400));
    for (int round = 0; round < k; ++round) {
        Eigen::VectorXcd v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx(gs.next(), gs.next());
        for (int pass = 0; pass < 2; ++pass)
            for (int f = 0; f < round; ++f) v -= out.vecs.col(f).dot(v) * out.vecs.col(f);
        v.normalize();

        std::vector<Eigen::VectorXcd> basis{v};
        std::vector<double> alpha, beta;
        double theta = 0;
        Eigen::VectorXd ritz;
        bool done = false;
        for (int j = 0; j < m_max && !done; ++j) {
            Eigen::VectorXcd w = s.apply(basis[j]);
            const double a = std::real(basis[j].dot(w));
            alpha.push_back(a);
            w -= a * basis[j];
            if (j > 0) w -= beta[j - 1] * basis[j - 1];
            for (int pass = 0; pass < 2; ++pass) {
                for (int f = 0; f < round; ++f) w -= out.vecs.col(f).dot(w) * out.vecs.col(f);
                for (const auto& b : basis) w -= b.dot(w) * b;
            }
            const double bnorm = w.norm();

            const int m = j + 1;
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                t(i, i) = alpha[i];
                if (i) t(i, i - 1) = t(i - 1, i) = beta[i - 1];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
            theta = es.eigenvalues()[0];
            ritz = es.eigenvectors().col(0);
            const double scale = std::max(1.0, std::abs(theta));
            const double resid = bnorm * std::abs(ritz[m - 1]);
            if (resid <= 1e-12 * scale || bnorm <= 1e-13 * scale ||
                Eigen::Index(m) + round >= dim) {
                done = true;
            } else if (j + 1 < m_max) {
                beta.push_back(bnorm);
                basis.push_back(w / bnorm);
            }
        }
        if (!done) throw std::runtime_error("eternal spectrum: eigensolver did not converge");

        Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim);
        for (std::size_t i = 0; i < std::size_t(ritz.size()); ++i) y += ritz[Eigen::Index(i)] * basis[i];
        for (int f = 0; f < round; ++f) y -= out.vecs.col(f).dot(y) * out.vecs.col(f);
        y.normalize();
        out.vecs.col(round) = y;
        out.vals.push_back(theta);
    }
    std::vector<int> order(out.vals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return out.vals[a] < out.vals[b]; });
    EigenPairs sorted;
    sorted.vecs.resize(dim, k);
    for (int i = 0; i < k; ++i) {
        sorted.vals.push_back(out.vals[order[i]]);
        sorted.vecs.col(i) = out.vecs.col(order[i]);
    }
    return sorted;
}

// Unnormalized product of the per-flavor rotation numerators (1 - G_j) with
// G_j the left-right pair string; coefficients stay exact Gaussian integers,
// which keeps the symmetry checks free of rounding.
OperatorSum q_raw(int N) {
    OperatorSum q = OperatorSum::identity(N);
    for (int j = 0; j < N; ++j) {
        const PauliTerm g =
            pauli_mul(majorana_string(Side::left, j, N), majorana_string(Side::right, j, N));
        OperatorSum f(N);
        f.add_string(0, 0, 1.0);
        f.add(g, -1.0);
        q = q * f;
    }
    return q;
}

bool vanishes_exactly(OperatorSum s) {
    s.compress(0.0);
    return s.empty();
}

OperatorSum full_parity(Side side, int N) {
    std::vector<int> all(N);
    std::iota(all.begin(), all.end(), 0);
    return gamma_operator(GammaIndex{side, all}, N);
}

}  // namespace

SpectrumResult eternal_spectrum(const Couplings& c, InteractionKind kind, double mu, int k,
                                SpectrumMethod method) {
    if (c.N < 2 || c.N % 2) throw std::invalid_argument("eternal spectrum: N must be positive and even");
    if (k < 2) throw std::invalid_argument("eternal spectrum: k must be at least 2");
    const Eigen::Index dim = Eigen::Index(1) << c.N;
    if (Eigen::Index(k) > dim) k = static_cast<int>(dim);

    const SplitHamiltonian s = split_hamiltonian(c, kind, mu);
    std::vector<double> vals;
    Eigen::MatrixXcd vecs;
    const bool dense = method == SpectrumMethod::dense ||
                       (method == SpectrumMethod::automatic && c.N <= 14);
    if (dense) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_full(s));
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eternal spectrum: eigensolver did not converge");
        vals.assign(es.eigenvalues().data(), es.eigenvalues().data() + dim);
        std::size_t g = 1;
        while (g < vals.size() && vals[g] - vals[g - 1] <= CLUSTER_TOL) ++g;
        vecs = es.eigenvectors().leftCols(Eigen::Index(std::max<std::size_t>(g, std::size_t(k))));
    } else {
        EigenPairs p = lowest_eigenpairs(s, k);
        vals = std::move(p.vals);
        vecs = std::move(p.vecs);
    }

    std::size_t g = 1;
    while (g < vals.size() && vals[g] - vals[g - 1] <= CLUSTER_TOL) ++g;
    if (g >= vals.size())
        throw std::runtime_error("eternal spectrum: gap unresolved; increase k");

    SpectrumResult r;
    r.E0 = vals[0];
    r.gap = vals[g] - vals[0];
    r.eigenvalues.assign(vals.begin(), vals.begin() + std::min<std::size_t>(k, vals.size()));
    r.ground_multiplet = vecs.leftCols(Eigen::Index(g));
    r.ground_state = StateVector{c.N, r.ground_multiplet.col(0)};
    return r;
}

GapPowerLawResult gap_power_law(const std::vector<Couplings>& ensemble, InteractionKind kind,
                                const std::vector<double>& mu_grid, double fit_lo, double fit_hi,
                                int threads) {
    if (ensemble.empty()) throw std::invalid_argument("gap power law: empty ensemble");
    if (mu_grid.size() < 4)
        throw std::invalid_argument("gap power law: need at least four grid points");
    if (mu_grid.front() <= 0)
        throw std::invalid_argument("gap power law: grid must be positive");
    for (std::size_t i = 1; i < mu_grid.size(); ++i)
        if (mu_grid[i] <= mu_grid[i - 1])
            throw std::invalid_argument("gap power law: grid must be strictly increasing");
    if (!(fit_lo < fit_hi)) throw std::invalid_argument("gap power law: empty fit window");

    const std::size_t ni = ensemble.size(), ng = mu_grid.size();
    std::vector<double> gaps(ni * ng);
    parallel_for(ni * ng, threads, [&](std::size_t w) {
        const std::size_t i = w / ng, g = w % ng;
        gaps[w] = eternal_spectrum(ensemble[i], kind, mu_grid[g], 6).gap;
    });

    GapPowerLawResult r;
    r.mu = mu_grid;
    r.mean_gap.resize(ng, 0.0);
    for (std::size_t g = 0; g < ng; ++g) {
        for (std::size_t i = 0; i < ni; ++i) r.mean_gap[g] += gaps[i * ng + g];
        r.mean_gap[g] /= double(ni);
    }

    std::vector<double> xs, ys;
    for (std::size_t g = 0; g < ng; ++g)
        if (mu_grid[g] >= fit_lo && mu_grid[g] <= fit_hi) {
            xs.push_back(mu_grid[g]);
            ys.push_back(r.mean_gap[g]);
        }
    if (xs.size() < 4)
        throw std::invalid_argument("gap power law: fewer than four points in the fit window");
    r.fit = fit_power_law(xs, ys);
    return r;
}

OptimalBeta optimal_beta(const Couplings& c, InteractionKind kind, double mu,
                         const std::vector<double>& beta_grid) {
    if (beta_grid.size() < 3)
        throw std::invalid_argument("optimal beta: need at least three grid points");
    if (beta_grid.front() < 0) throw std::invalid_argument("optimal beta: beta must be nonnegative");
    for (std::size_t i = 1; i < beta_grid.size(); ++i)
        if (beta_grid[i] <= beta_grid[i - 1])
            throw std::invalid_argument("optimal beta: grid must be strictly increasing");

    const SpectrumResult sr = eternal_spectrum(c, kind, mu, 4);
    const StateVector istate = max_entangled_state(c.N);
    const BlockEvolver bl(build_hamiltonian(c, Side::left), 0, c.N / 2);
    auto overlap = [&](double beta) {
        StateVector t = istate;
        bl.imaginary_time_unnormalized(t, beta / 2);
        t.normalize();
        return (sr.ground_multiplet.adjoint() * t.amp).norm();
    };

    std::size_t best = 0;
    std::vector<double> f(beta_grid.size());
    for (std::size_t i = 0; i < beta_grid.size(); ++i) {
        f[i] = overlap(beta_grid[i]);
        if (f[i] > f[best]) best = i;
    }
    if (best == 0 || best + 1 == beta_grid.size())
        return {beta_grid[best], f[best], true};

    // Golden-section ascent on the bracketing interval.
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double a = beta_grid[best - 1], b = beta_grid[best + 1];
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = overlap(x1), f2 = overlap(x2);
    for (int it = 0; it < 200 && b - a > 1e-10 * (1 + b); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = overlap(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = overlap(x1);
        }
    }
    const double mid = 0.5 * (a + b);
    return {mid, overlap(mid), false};
}

double sl2r_figure_of_merit(const Couplings& c, InteractionKind kind, double mu, double beta) {
    const SpectrumResult sr = eternal_spectrum(c, kind, mu, 2);
    if (std::abs(sr.E0) < 1e-12)
        throw std::runtime_error("figure of merit: ground energy vanishes");
    const StateVector tfd = thermofield_double(build_hamiltonian(c, Side::left), beta);
    OperatorSum h = build_hamiltonian(c, Side::left) + build_hamiltonian(c, Side::right);
    if (mu != 0.0) {
        OperatorSum v = build_interaction(kind, c.N);
        v *= mu;
        h += v;
    }
    double num = std::real(tfd.amp.dot(h.apply(tfd.amp))) - sr.E0;
    if (num < 0 && num > -1e-10) num = 0;  // roundoff on the variational bound
    return num / std::abs(sr.E0);
}

OperatorSum q_operator(int N) {
    if (N < 2 || N % 2) throw std::invalid_argument("q operator: N must be positive and even");
    OperatorSum q = q_raw(N);
    q *= std::exp2(-0.5 * N);
    return q;
}

SymmetryReport discrete_symmetries(const Couplings& c, InteractionKind kind) {
    const int N = c.N;
    const OperatorSum qraw = q_raw(N);
    const OperatorSum g5l = full_parity(Side::left, N);
    const OperatorSum g5r = full_parity(Side::right, N);
    const OperatorSum hs = build_hamiltonian(c, Side::left) + build_hamiltonian(c, Side::right);
    const OperatorSum v = build_interaction(kind, N);

    SymmetryReport rep;
    rep.kind = kind;
    if (kind == InteractionKind::majorana_pairs) {
        rep.hamiltonian_invariant =
            vanishes_exactly(qraw * hs - hs * qraw) && vanishes_exactly(qraw * v - v * qraw);
    } else {
        const OperatorSum hb = hs + v;
        rep.hamiltonian_invariant = vanishes_exactly(qraw * hb - hb * qraw) &&
                                    vanishes_exactly(g5l * hb - hb * g5l) &&
                                    vanishes_exactly(g5r * hb - hb * g5r);
    }
    const OperatorSum gamma5 = g5l * g5r;
    OperatorSum parity = gamma5;
    parity *= std::exp2(double(N));  // q_raw = 2^{N/2} Q, so q_raw^2 = 2^N Q^2
    rep.q_squared_is_parity = vanishes_exactly(qraw * qraw - parity);

    // Q swaps the side parities, so the exact identity is graded by the total
    // parity: G5_L Q = G5 Q G5_L. The pair state lives in the sector with
    // G5 = (-1)^{N/2}, which turns the grade into a plain sign there.
    const bool graded = vanishes_exactly(g5l * qraw - gamma5 * qraw * g5l);
    const StateVector pair = max_entangled_state(N);
    const double sector = std::real(pair.amp.dot(gamma5.apply(pair.amp)));
    rep.q_parity_commutes = graded && sector > 0.5;
    rep.q_parity_anticommutes = graded && sector < -0.5;
    return rep;
}

Sl2rGenerators sl2r_generators(const Couplings& c, double mu, double E0) {
    const OperatorSum hl = build_hamiltonian(c, Side::left);
    const OperatorSum hr = build_hamiltonian(c, Side::right);
    Sl2rGenerators g;
    g.B = hr - hl;
    g.E = hl + hr;
    if (mu != 0.0) {
        OperatorSum v = build_interaction(InteractionKind::majorana_pairs, c.N);
        v *= mu;
        g.E -= v;
    }
    g.E.add_string(0, 0, -E0);
    g.P_plus = g.E + g.B;
    g.P_plus *= -0.5;
    g.P_minus = g.E - g.B;
    g.P_minus *= -0.5;
    return g;
}

double boost_norm_on_tfd(const Couplings& c, double beta) {
    const OperatorSum hl = build_hamiltonian(c, Side::left);
    const OperatorSum hr = build_hamiltonian(c, Side::right);
    const StateVector tfd = thermofield_double(hl, beta);
    return (hr.apply(tfd.amp) - hl.apply(tfd.amp)).norm();
}

}  // namespace whlab
