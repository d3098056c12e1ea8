#include "whlab/size_winding.hpp"

#include <cmath>
#include <stdexcept>

#include "whlab/evolve.hpp"
#include "whlab/fitting.hpp"
#include "whlab/observables.hpp"

namespace whlab {

namespace {

// In-place basis-change transform: entry (u low bits, x high bits) starts as
// conj(<u,x| extended from |I>) style input; after one 4-way stage per qubit
// the entry at ((xm^zm) + (zm << n2)) is the contraction against the literal
// Pauli string sigma(xm, zm) on the block.
void butterfly(std::vector<cplx>& T, int n2) {
    const std::size_t dim = T.size();
    for (int k = 0; k < n2; ++k) {
        const std::size_t rk = std::size_t{1} << k, ck = std::size_t{1} << (n2 + k);
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & (rk | ck)) continue;
            cplx a00 = T[base], a10 = T[base | rk], a01 = T[base | ck], a11 = T[base | rk | ck];
            T[base] = a00 + a11;              // identity slot
            T[base | rk] = a01 + a10;         // X slot
            T[base | ck] = cplx(0, 1) * (a01 - a10);  // Y slot
            T[base | rk | ck] = a00 - a11;    // Z slot
        }
    }
}

StateVector thermal_double(const OperatorSum& HL, int n2, double beta) {
    StateVector tfd = max_entangled_state(2 * n2);
    if (beta != 0.0) {
        BlockEvolver bl(HL, 0, n2);
        bl.imaginary_time_unnormalized(tfd, beta / 2);
        tfd.normalize();
    }
    return tfd;
}

int pair_size(const PauliTerm& p) { return 2 * popcnt(p.x); }

std::vector<int> size_table(const SizeData& data) {
    std::vector<int> s(data.c.size());
    if (data.measure == SizeMeasure::majorana_count) {
        for (std::size_t K = 0; K < s.size(); ++K) s[K] = popcnt(K);
    } else {
        std::vector<PauliTerm> tab = gamma_table(data.side, data.N);
        for (std::size_t K = 0; K < s.size(); ++K) s[K] = pair_size(tab[K]);
    }
    return s;
}

}  // namespace

SizeMeasure measure_for(InteractionKind kind) {
    return kind == InteractionKind::majorana_pairs ? SizeMeasure::majorana_count
                                                   : SizeMeasure::qubit_pair_count;
}

SizeData expand_thermal_fermion(const Couplings& c, Side side, int i, double t, double beta,
                                ExpandEngine engine) {
    const int N = c.N, n2 = N / 2;
    if (i < 0 || i >= N) throw std::invalid_argument("expand: fermion index out of range");
    OperatorSum HL = build_hamiltonian(c, Side::left);
    StateVector I = max_entangled_state(N);
    StateVector w = thermal_double(HL, n2, beta);

    OperatorSum Hside = side == Side::left ? HL : build_hamiltonian(c, Side::right);
    BlockEvolver bs(Hside, side == Side::left ? 0 : n2, n2);
    bs.real_time(w, t);
    apply_pauli(w, majorana_string(side, i, N));
    bs.real_time(w, -t);

    std::vector<PauliTerm> tab = gamma_table(side, N);
    SizeData data;
    data.N = N;
    data.side = side;
    data.fermion = i;
    data.t = t;
    data.beta = beta;
    data.c.assign(std::size_t{1} << N, cplx(0, 0));

    const std::size_t block = std::size_t{1} << n2, mask = block - 1;
    if (engine == ExpandEngine::direct) {
        // c_K = sum over the support of |I> of conj(amp(Gamma_K |I>)) w.
        for (std::size_t K = 0; K < data.c.size(); ++K) {
            const PauliTerm& p = tab[K];
            cplx acc(0, 0);
            for (std::size_t x = 0; x < block; ++x) {
                std::size_t b = x | ((~x & mask) << n2);
                acc += std::conj(pauli_basis_amp(p, b) * I.amp[Eigen::Index(b)]) *
                       w.amp[Eigen::Index(b ^ p.x)];
            }
            data.c[K] = acc;
        }
        return data;
    }

    if (side == Side::left) {
        std::vector<cplx> T(data.c.size());
        for (std::size_t x = 0; x < block; ++x) {
            std::size_t xb = (~x & mask) << n2;
            cplx phase = std::conj(I.amp[Eigen::Index(x | xb)]);
            for (std::size_t u = 0; u < block; ++u)
                T[u | (x << n2)] = phase * w.amp[Eigen::Index(u | xb)];
        }
        butterfly(T, n2);
        for (std::size_t K = 0; K < data.c.size(); ++K) {
            const PauliTerm& p = tab[K];
            std::size_t slot = (p.x ^ p.z) | (p.z << n2);
            data.c[K] = IPOW[(4 - p.phase) & 3] * T[slot];
        }
    } else {
        // Odd strings carry a Z chain across the whole left block; the two
        // parities need separate transforms.
        std::vector<cplx> T0(data.c.size()), T1(data.c.size());
        for (std::size_t y = 0; y < block; ++y) {
            std::size_t yb = ~y & mask;
            cplx phase = std::conj(I.amp[Eigen::Index(yb | (y << n2))]);
            double sgn = (popcnt(yb) & 1) ? -1.0 : 1.0;
            for (std::size_t v = 0; v < block; ++v) {
                cplx val = phase * w.amp[Eigen::Index(yb | (v << n2))];
                T0[v | (y << n2)] = val;
                T1[v | (y << n2)] = sgn * val;
            }
        }
        butterfly(T0, n2);
        butterfly(T1, n2);
        for (std::size_t K = 0; K < data.c.size(); ++K) {
            const PauliTerm& p = tab[K];
            std::size_t xr = p.x >> n2, zr = p.z >> n2;
            std::size_t slot = (xr ^ zr) | (zr << n2);
            const std::vector<cplx>& T = (popcnt(K) & 1) ? T1 : T0;
            data.c[K] = IPOW[(4 - p.phase) & 3] * T[slot];
        }
    }
    return data;
}

SizeDistributions size_distributions(const SizeData& data) {
    if (data.c.empty()) throw std::invalid_argument("size_distributions: empty coefficients");
    SizeDistributions d;
    d.measure = data.measure;
    d.P.assign(data.N + 1, 0.0);
    d.Q.assign(data.N + 1, cplx(0, 0));
    std::vector<int> s = size_table(data);
    for (std::size_t K = 0; K < data.c.size(); ++K) {
        d.P[s[K]] += std::norm(data.c[K]);
        d.Q[s[K]] += data.c[K] * data.c[K];
    }
    return d;
}

SizeMoments size_moments(const SizeDistributions& d) {
    double m1 = 0, m2 = 0;
    for (std::size_t s = 0; s < d.P.size(); ++s) {
        m1 += double(s) * d.P[s];
        m2 += double(s) * double(s) * d.P[s];
    }
    return {m1, std::sqrt(std::max(m2 - m1 * m1, 0.0))};
}

SizeData apply_interaction_phase(const SizeData& data, double mu, InteractionKind kind) {
    if (measure_for(kind) != data.measure)
        throw std::invalid_argument("apply_interaction_phase: interaction kind does not match "
                                    "the data's size measure");
    SizeData out = data;
    std::vector<int> s = size_table(data);
    const double half = data.N / 2.0;
    for (std::size_t K = 0; K < out.c.size(); ++K)
        out.c[K] *= std::exp(cplx(0, mu * (double(s[K]) - half)));
    return out;
}

WindingFit winding_fit(const SizeDistributions& d) {
    std::vector<double> xs, ys, ws;
    double coherence = 0;
    for (std::size_t s = 0; s < d.P.size(); ++s) {
        if (d.P[s] <= 1e-8) continue;
        xs.push_back(double(s));
        ys.push_back(std::arg(d.Q[s]));
        ws.push_back(d.P[s]);
        coherence += std::min(std::abs(d.Q[s]), d.P[s]);
    }
    if (xs.size() < 2) throw std::invalid_argument("winding_fit: fewer than 2 populated sizes");
    ys = unwrap_phases(std::move(ys));
    LinearFit lf = weighted_linear_fit(xs, ys, ws);
    WindingFit f;
    // arg Q is twice the coefficient phase, so halve to report the c-level
    // winding rate (alpha/N of the winding ansatz).
    f.slope = lf.slope / 2;
    f.intercept = lf.intercept / 2;
    f.weighted_r2 = lf.weighted_r2;
    f.coherence = coherence;
    return f;
}

ThermalSize thermal_size(const Couplings& c, double beta) {
    if (beta < 0) throw std::invalid_argument("thermal_size: negative beta");
    double g = 0;
    for (int j = 0; j < c.N; ++j) g += euclidean_2pt(c, j, beta / 2, beta);
    ThermalSize ts;
    ts.G_half = g / c.N;
    ts.n_half = (c.N / 2.0) * (1.0 - ts.G_half);
    return ts;
}

double largeN_growth_reference(double G_half, double littleJ, double lambda, double t) {
    if (lambda <= 0) throw std::invalid_argument("growth reference: lambda must be positive");
    double sh = std::sinh(lambda * t / 2);
    return G_half * (1.0 + (8.0 * littleJ * littleJ / (lambda * lambda)) * sh * sh);
}

ExpDecayFit lyapunov_fit(const std::vector<std::pair<double, double>>& slope_series, double t_lo,
                         double t_hi) {
    std::vector<double> xs, ys, ws;
    for (const auto& [t, slope] : slope_series) {
        if (t < t_lo || t > t_hi) continue;
        double mag = std::abs(slope);
        if (mag <= 0) throw std::invalid_argument("lyapunov_fit: zero slope inside the window");
        xs.push_back(t);
        ys.push_back(std::log(mag));
        ws.push_back(1.0);
    }
    if (xs.size() < 4)
        throw std::invalid_argument("lyapunov_fit: need at least 4 points in the window");
    LinearFit lf = weighted_linear_fit(xs, ys, ws);
    ExpDecayFit f;
    f.lambda = -lf.slope;
    f.log_amplitude = lf.intercept;
    f.points = int(xs.size());
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = lf.intercept + lf.slope * xs[i] - ys[i];
        ss += r * r;
    }
    f.rms = std::sqrt(ss / double(xs.size()));
    return f;
}

}  // namespace whlab
