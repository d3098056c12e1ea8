#include "whlab/models.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "whlab/rng.hpp"

namespace whlab {

namespace {

// Visits strictly increasing k-tuples from [0, count) in lexicographic order.
template <typename F>
void for_each_tuple(int count, int k, F&& fn) {
    std::vector<int> t(k);
    for (int i = 0; i < k; ++i) t[i] = i;
    if (k > count) return;
    while (true) {
        fn(t);
        int pos = k - 1;
        while (pos >= 0 && t[pos] == count - k + pos) --pos;
        if (pos < 0) break;
        ++t[pos];
        for (int i = pos + 1; i < k; ++i) t[i] = t[i - 1] + 1;
    }
}

void check_model_args(int N, int q) {
    if (N <= 0 || N % 2 != 0) throw std::invalid_argument("model: N must be positive and even");
    if (q <= 0 || q > N) throw std::invalid_argument("model: need 0 < q <= N");
    // Real couplings keep a plain Majorana product Hermitian only when the
    // reversal sign (-1)^{q(q-1)/2} is +1.
    if (q % 4 != 0) throw std::invalid_argument("model: q must be a multiple of 4");
}

}  // namespace

Couplings sample_syk(int N, int q, double J, uint64_t seed) {
    check_model_args(N, q);
    double var = std::pow(2.0, q - 1) * std::tgamma(static_cast<double>(q)) /
                 (q * std::pow(static_cast<double>(N), q - 1)) * J * J;
    double sigma = std::sqrt(var);
    Couplings c{ModelKind::syk, N, q, J, seed, {}};
    GaussianStream g(seed);
    for_each_tuple(N, q, [&](const std::vector<int>& t) {
        c.entries.push_back({t, sigma * g.next()});
    });
    return c;
}

Couplings sample_pg_commuting(int N, int q, double J, uint64_t seed) {
    check_model_args(N, q);
    int sites = N / 2, k = q / 2;
    double var = std::pow(2.0, q - 1) * std::tgamma(static_cast<double>(k)) *
                 std::tgamma(static_cast<double>(sites - k + 1)) /
                 std::tgamma(static_cast<double>(sites)) * J * J;
    double sigma = std::sqrt(var);
    Couplings c{ModelKind::pg_commuting, N, q, J, seed, {}};
    GaussianStream g(seed);
    for_each_tuple(sites, k, [&](const std::vector<int>& t) {
        c.entries.push_back({t, sigma * g.next()});
    });
    return c;
}

OperatorSum build_hamiltonian(const Couplings& c, Side side) {
    std::vector<OperatorSum::Term> raw;
    raw.reserve(c.entries.size());
    for (const CouplingEntry& e : c.entries) {
        PauliTerm acc;
        acc.n = c.N;
        double w = e.value;
        if (c.model == ModelKind::syk) {
            for (int j : e.idx) {
                acc = pauli_mul(acc, majorana_string(side, j, c.N));
                w *= 0.70710678118654752440;  // 1/sqrt(2) per fermion
            }
        } else {
            // pair-site k carries psi_{2k} psi_{2k+1}, weight 1/2 per site
            for (int k : e.idx) {
                acc = pauli_mul(acc, majorana_string(side, 2 * k, c.N));
                acc = pauli_mul(acc, majorana_string(side, 2 * k + 1, c.N));
                w *= 0.5;
            }
        }
        raw.push_back({acc.x, acc.z, w * acc.phase_value()});
    }
    OperatorSum H = OperatorSum::from_terms(c.N, std::move(raw));
    H.compress(0.0);
    return H;
}

OperatorSum build_interaction(InteractionKind kind, int N) {
    if (N <= 0 || N % 2 != 0) throw std::invalid_argument("build_interaction: N must be even");
    std::vector<OperatorSum::Term> raw;
    if (kind == InteractionKind::majorana_pairs) {
        for (int j = 0; j < N; ++j) {
            PauliTerm p = pauli_mul(majorana_string(Side::left, j, N),
                                    majorana_string(Side::right, j, N));
            raw.push_back({p.x, p.z, cplx(0, 0.5) * p.phase_value()});  // i * (1/2 weights)
        }
    } else {
        for (int k = 0; k < N / 2; ++k) {
            GammaIndex gl{Side::left, {2 * k, 2 * k + 1}};
            GammaIndex gr{Side::right, {2 * k, 2 * k + 1}};
            OperatorSum prod = gamma_operator(gl, N) * gamma_operator(gr, N);
            for (const auto& t : prod.terms()) raw.push_back(t);
        }
    }
    return OperatorSum::from_terms(N, std::move(raw));
}

void apply_interaction_exponential(StateVector& psi, InteractionKind kind, int N, int offset,
                                   cplx scale) {
    if (N <= 0 || N % 2 != 0)
        throw std::invalid_argument("interaction exponential: N must be even");
    if (offset < 0 || offset + N > psi.n)
        throw std::invalid_argument("interaction exponential: fermion block outside register");
    const uint64_t dim = uint64_t(1) << psi.n;
    const int n2 = N / 2;

    if (kind == InteractionKind::qubit_pairs) {
        // Diagonal: eigenvalue n2 - 2 * (pair mismatches) per basis state.
        std::vector<cplx> weight(n2 + 1);
        for (int m = 0; m <= n2; ++m) weight[m] = std::exp(scale * double(n2 - 2 * m));
        const uint64_t mask = (uint64_t(1) << n2) - 1;
        for (uint64_t b = 0; b < dim; ++b) {
            uint64_t mism = ((b >> offset) ^ (b >> (offset + n2))) & mask;
            psi.amp[Eigen::Index(b)] *= weight[popcnt(mism)];
        }
        return;
    }

    const cplx ch = std::cosh(scale * 0.5);
    const cplx sh = std::sinh(scale * 0.5);  // exp(a V_j) = cosh(a/2) + 2 sinh(a/2) V_j
    for (int j = 0; j < N; ++j) {
        PauliTerm p =
            pauli_mul(majorana_string(Side::left, j, N), majorana_string(Side::right, j, N));
        PauliTerm q{psi.n, p.x << offset, p.z << offset, p.phase};
        const cplx f = sh * cplx(0, 1);  // 2 sinh(a/2) * (i/2) string weight
        const uint64_t x = q.x;
        for (uint64_t b = 0; b < dim; ++b) {
            if (b & x & (~x + 1)) continue;  // visit each {b, b^x} pair once
            const uint64_t b2 = b ^ x;
            const cplx a0 = psi.amp[Eigen::Index(b)], a1 = psi.amp[Eigen::Index(b2)];
            psi.amp[Eigen::Index(b)] = ch * a0 + f * pauli_basis_amp(q, b2) * a1;
            psi.amp[Eigen::Index(b2)] = ch * a1 + f * pauli_basis_amp(q, b) * a0;
        }
    }
}

std::string couplings_to_json(const Couplings& c) {
    nlohmann::json j;
    j["model"] = c.model == ModelKind::syk ? "syk" : "pg_commuting";
    j["N"] = c.N;
    j["q"] = c.q;
    j["J"] = c.J;
    j["seed"] = c.seed;
    j["entries"] = nlohmann::json::array();
    for (const CouplingEntry& e : c.entries)
        j["entries"].push_back({{"idx", e.idx}, {"value", e.value}});
    return j.dump(2);
}

Couplings couplings_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Couplings c;
    std::string model = j.at("model").get<std::string>();
    if (model == "syk")
        c.model = ModelKind::syk;
    else if (model == "pg_commuting")
        c.model = ModelKind::pg_commuting;
    else
        throw std::invalid_argument("couplings_from_json: unknown model " + model);
    c.N = j.at("N").get<int>();
    c.q = j.at("q").get<int>();
    c.J = j.at("J").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    for (const auto& e : j.at("entries")) {
        CouplingEntry ce;
        ce.idx = e.at("idx").get<std::vector<int>>();
        ce.value = e.at("value").get<double>();
        c.entries.push_back(std::move(ce));
    }
    return c;
}

}  // namespace whlab
