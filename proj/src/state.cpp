#include "whlab/state.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "whlab/fermion.hpp"

namespace whlab {

StateVector basis_state(int n, uint64_t b) {
    StateVector s;
    s.n = n;
    s.amp = Eigen::VectorXcd::Zero(std::int64_t{1} << n);
    s.amp[static_cast<std::int64_t>(b)] = 1.0;
    return s;
}

void fix_global_phase(StateVector& s) {
    std::int64_t best = -1;
    double mx = 0.0;
    for (std::int64_t i = 0; i < s.amp.size(); ++i) {
        double a = std::abs(s.amp[i]);
        if (a > mx) {
            mx = a;
            best = i;
        }
    }
    if (best < 0 || mx == 0.0) return;
    s.amp *= std::conj(s.amp[best]) / mx;
}

StateVector max_entangled_state(int N) {
    if (N <= 0 || N % 2 != 0) throw std::invalid_argument("max_entangled_state: N must be even");
    int half = N / 2;
    // Seed with left block all 0, right block all 1: that configuration is in
    // the support of |I> for any N.
    uint64_t seed_bits = ((uint64_t{1} << half) - 1) << half;
    StateVector s = basis_state(N, seed_bits);
    Eigen::VectorXcd tmp(s.amp.size());
    for (int j = 0; j < N; ++j) {
        // Project onto ker(psi^l_j + i psi^r_j) with (1 - 2i psi^l_j psi^r_j)/2;
        // the N projectors commute.
        PauliTerm prod =
            pauli_mul(majorana_string(Side::left, j, N), majorana_string(Side::right, j, N));
        OperatorSum b(N);
        b.add(prod, cplx(0, 1));  // 2i * (1/2 string weights) = i
        b.apply(s.amp.data(), tmp.data(), s.dim());
        s.amp = 0.5 * (s.amp - tmp);
    }
    double nrm = s.norm();
    if (nrm < 1e-12) throw std::runtime_error("max_entangled_state: projection annihilated seed");
    s.amp /= nrm;
    fix_global_phase(s);
    return s;
}

namespace {

// Scatters the k bits of `sub` into the positions listed in `qs` (ascending).
uint64_t expand_bits(uint64_t sub, const std::vector<int>& qs) {
    uint64_t out = 0;
    for (std::size_t i = 0; i < qs.size(); ++i)
        if ((sub >> i) & 1) out |= uint64_t{1} << qs[i];
    return out;
}

uint64_t gather_bits(uint64_t b, const std::vector<int>& qs) {
    uint64_t out = 0;
    for (std::size_t i = 0; i < qs.size(); ++i)
        if ((b >> qs[i]) & 1) out |= uint64_t{1} << i;
    return out;
}

void check_qubits(int n, const std::vector<int>& qs) {
    for (std::size_t i = 0; i < qs.size(); ++i) {
        if (qs[i] < 0 || qs[i] >= n) throw std::invalid_argument("qubit index out of range");
        if (i > 0 && qs[i] <= qs[i - 1]) throw std::invalid_argument("qubit list must be sorted");
    }
}

}  // namespace

DensityMatrix reduced_density(const StateVector& s, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    check_qubits(s.n, keep);
    int k = static_cast<int>(keep.size());
    int r = s.n - k;
    std::vector<int> rest;
    rest.reserve(r);
    for (int q = 0, i = 0; q < s.n; ++q) {
        if (i < k && keep[i] == q)
            ++i;
        else
            rest.push_back(q);
    }
    // M(a, b) = amplitude with kept bits a, traced bits b; rho = M M^dagger.
    Eigen::MatrixXcd M(std::int64_t{1} << k, std::int64_t{1} << r);
    for (uint64_t a = 0; a < (uint64_t{1} << k); ++a) {
        uint64_t abits = expand_bits(a, keep);
        for (uint64_t b = 0; b < (uint64_t{1} << r); ++b)
            M(a, b) = s.amp[static_cast<std::int64_t>(abits | expand_bits(b, rest))];
    }
    DensityMatrix d;
    d.n = k;
    d.rho = M * M.adjoint();
    return d;
}

DensityMatrix partial_trace(const DensityMatrix& dm, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    check_qubits(dm.n, keep);
    int k = static_cast<int>(keep.size());
    int r = dm.n - k;
    std::vector<int> rest;
    for (int q = 0, i = 0; q < dm.n; ++q) {
        if (i < k && keep[i] == q)
            ++i;
        else
            rest.push_back(q);
    }
    DensityMatrix out;
    out.n = k;
    out.rho = Eigen::MatrixXcd::Zero(std::int64_t{1} << k, std::int64_t{1} << k);
    for (uint64_t a = 0; a < (uint64_t{1} << k); ++a)
        for (uint64_t b = 0; b < (uint64_t{1} << k); ++b) {
            cplx acc = 0;
            for (uint64_t e = 0; e < (uint64_t{1} << r); ++e) {
                uint64_t ebits = expand_bits(e, rest);
                acc += dm.rho(static_cast<std::int64_t>(expand_bits(a, keep) | ebits),
                              static_cast<std::int64_t>(expand_bits(b, keep) | ebits));
            }
            out.rho(a, b) = acc;
        }
    return out;
}

double purity(const DensityMatrix& d) { return (d.rho * d.rho).trace().real(); }

std::vector<MeasureOutcome> measure_qubits(const StateVector& s, const std::vector<int>& qubits,
                                           const MeasurePolicy& policy) {
    std::vector<int> qs = qubits;
    std::sort(qs.begin(), qs.end());
    check_qubits(s.n, qs);
    // Map back: outcome bit i refers to qubits[i] as listed by the caller.
    std::size_t patterns = std::size_t{1} << qs.size();
    std::vector<double> prob(patterns, 0.0);
    for (std::int64_t b = 0; b < s.amp.size(); ++b)
        prob[gather_bits(static_cast<uint64_t>(b), qubits)] += std::norm(s.amp[b]);

    auto collapse = [&](uint64_t pat) {
        MeasureOutcome o;
        o.bits = pat;
        o.prob = prob[pat];
        o.state.n = s.n;
        o.state.amp = Eigen::VectorXcd::Zero(s.amp.size());
        for (std::int64_t b = 0; b < s.amp.size(); ++b)
            if (gather_bits(static_cast<uint64_t>(b), qubits) == pat) o.state.amp[b] = s.amp[b];
        o.state.amp /= std::sqrt(o.prob);
        return o;
    };

    std::vector<MeasureOutcome> out;
    if (policy.kind == MeasurePolicy::enumerate) {
        for (uint64_t pat = 0; pat < patterns; ++pat)
            if (prob[pat] > policy.cutoff) out.push_back(collapse(pat));
    } else {
        std::mt19937_64 rng(policy.seed);
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        double acc = 0.0;
        uint64_t pick = patterns - 1;
        for (uint64_t pat = 0; pat < patterns; ++pat) {
            acc += prob[pat];
            if (u < acc) {
                pick = pat;
                break;
            }
        }
        out.push_back(collapse(pick));
    }
    return out;
}

void apply_pauli(StateVector& s, const PauliTerm& p) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s.amp.size());
    const uint64_t dim = uint64_t(1) << s.n;
    for (uint64_t b = 0; b < dim; ++b)
        out[Eigen::Index(b ^ p.x)] = pauli_basis_amp(p, b) * s.amp[Eigen::Index(b)];
    s.amp = std::move(out);
}

void dump_state(const StateVector& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dump_state: cannot open " + path);
    f.write(reinterpret_cast<const char*>(s.amp.data()),
            static_cast<std::streamsize>(s.dim() * sizeof(cplx)));
    nlohmann::json j;
    j["n_qubits"] = s.n;
    j["format"] = "complex128-little-endian-v1";
    std::ofstream side(path + ".json");
    side << j.dump(2) << "\n";
}

StateVector load_state(const std::string& path) {
    std::ifstream side(path + ".json");
    if (!side) throw std::runtime_error("load_state: missing sidecar for " + path);
    nlohmann::json j;
    side >> j;
    StateVector s;
    s.n = j.at("n_qubits").get<int>();
    s.amp.resize(std::int64_t{1} << s.n);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_state: cannot open " + path);
    f.read(reinterpret_cast<char*>(s.amp.data()),
           static_cast<std::streamsize>(s.dim() * sizeof(cplx)));
    if (!f) throw std::runtime_error("load_state: truncated file " + path);
    return s;
}

}  // namespace whlab
