#include "whlab/teleport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "whlab/evolve.hpp"
#include "whlab/fermion.hpp"
#include "whlab/observables.hpp"
#include "whlab/parallel.hpp"

namespace whlab {

namespace {

constexpr double INV_SQRT2 = 0.70710678118654752440;

void check_config(const ProtocolConfig& cfg, const Couplings& c) {
    if (cfg.N < 2 || cfg.N % 2 != 0) throw std::invalid_argument("protocol: N must be even >= 2");
    if (c.N != cfg.N) throw std::invalid_argument("protocol: couplings N mismatch");
    if (cfg.t0 < 0 || cfg.t1 < 0) throw std::invalid_argument("protocol: t0, t1 must be >= 0");
    if (cfg.beta < 0) throw std::invalid_argument("protocol: beta must be >= 0");
}

StateVector doubled_tfd(const OperatorSum& H_left, int N, double beta) {
    StateVector s = max_entangled_state(N);
    if (beta != 0.0) {
        BlockEvolver bl(H_left, 0, N / 2);
        bl.imaginary_time_unnormalized(s, beta / 2);
        s.normalize();
    }
    return s;
}

// (|00> + |11>)_RQ / sqrt(2) x |tfd> x |0>_T on the N+3 qubit register.
StateVector initial_register(const StateVector& tfd, int N) {
    ProtocolRegister reg{N};
    StateVector psi;
    psi.n = reg.n_qubits();
    psi.amp = Eigen::VectorXcd::Zero(std::int64_t{1} << psi.n);
    for (std::int64_t s = 0; s < tfd.amp.size(); ++s) {
        psi.amp[s << 2] = tfd.amp[s] * INV_SQRT2;
        psi.amp[(s << 2) | 3] = tfd.amp[s] * INV_SQRT2;
    }
    return psi;
}

// Evolves both blocks and applies the slice phases, taking the state from the
// given left/right clock readings to (last slice, last slice), then the right
// block alone to t1. The left evolution after the last slice cannot change
// any purity-derived record and is dropped.
void slice_sequence(StateVector& psi, const BlockEvolver& bl, const BlockEvolver& br,
                    const std::vector<InteractionSlice>& slices, InteractionKind kind, int N,
                    int offset, double left_at, double right_at, double t1) {
    for (const auto& s : slices) {
        bl.real_time(psi, s.time - left_at);
        br.real_time(psi, s.time - right_at);
        left_at = right_at = s.time;
        apply_interaction_exponential(psi, kind, N, offset, cplx(0, s.mu));
    }
    br.real_time(psi, t1 - right_at);
}

}  // namespace

std::vector<InteractionSlice> ProtocolConfig::resolved_schedule() const {
    std::vector<InteractionSlice> s =
        schedule.empty() ? std::vector<InteractionSlice>{{0.0, mu}} : schedule;
    std::stable_sort(s.begin(), s.end(),
                     [](const InteractionSlice& a, const InteractionSlice& b) {
                         return a.time < b.time;
                     });
    if (s.front().time < -t0 - 1e-12 || s.back().time > t1 + 1e-12)
        throw std::invalid_argument("protocol: schedule time outside [-t0, t1]");
    return s;
}

OperatorSum swap_operator(Side side, int N) {
    ProtocolRegister reg{N};
    const int n = reg.n_qubits();
    const int ctrl = side == Side::left ? reg.q_qubit() : reg.t_qubit();
    const uint64_t cbit = uint64_t{1} << ctrl;

    OperatorSum chi = chi_op(side, N).embedded(n, reg.left_first());
    OperatorSum chid = chi_dag(side, N).embedded(n, reg.left_first());

    OperatorSum p0(n), p1(n), sp(n);
    p0.add_string(0, 0, 0.5).add_string(0, cbit, 0.5);    // |0><0| on the control
    p1.add_string(0, 0, 0.5).add_string(0, cbit, -0.5);   // |1><1|
    sp.add_string(cbit, 0, 0.5).add_string(cbit, cbit, cplx(0, 0.5));  // |0><1|
    OperatorSum sm = sp.adjoint();

    return p0 * (chi * chid) + sp * chid + sm * chi + p1 * (chid * chi);
}

TeleportResult run_quantum(const ProtocolConfig& cfg, const Couplings& c) {
    if (cfg.channel != ChannelKind::quantum)
        throw std::invalid_argument("run_quantum: channel must be quantum");
    check_config(cfg, c);
    const auto slices = cfg.resolved_schedule();
    ProtocolRegister reg{cfg.N};
    const int n2 = cfg.N / 2;

    OperatorSum HL = build_hamiltonian(c, Side::left);
    OperatorSum HR = build_hamiltonian(c, Side::right);
    StateVector psi = initial_register(doubled_tfd(HL, cfg.N, cfg.beta), cfg.N);

    BlockEvolver bl(HL.embedded(reg.n_qubits(), reg.left_first()), reg.left_first(), n2);
    BlockEvolver br(HR.embedded(reg.n_qubits(), reg.left_first()), reg.right_first(), n2);

    bl.real_time(psi, -cfg.t0);
    psi.amp = swap_operator(Side::left, cfg.N).apply(psi.amp);
    slice_sequence(psi, bl, br, slices, cfg.interaction, cfg.N, reg.left_first(), -cfg.t0, 0.0,
                   cfg.t1);
    psi.amp = swap_operator(Side::right, cfg.N).apply(psi.amp);

    TeleportResult res;
    res.rho_TR = reduced_density(psi, {reg.r_qubit(), reg.t_qubit()});
    res.I_RT = mutual_info_from_rho_TR(res.rho_TR);
    res.final_state = std::move(psi);
    return res;
}

DensityMatrix rho_TR_correlator(const ProtocolConfig& cfg, const Couplings& c) {
    if (cfg.channel != ChannelKind::quantum)
        throw std::invalid_argument("rho_TR_correlator: channel must be quantum");
    check_config(cfg, c);
    const auto slices = cfg.resolved_schedule();
    const int N = cfg.N, n2 = N / 2;

    OperatorSum HL = build_hamiltonian(c, Side::left);
    OperatorSum HR = build_hamiltonian(c, Side::right);
    BlockEvolver bl(HL, 0, n2), br(HR, n2, n2);
    StateVector tfd = max_entangled_state(N);
    if (cfg.beta != 0.0) {
        bl.imaginary_time_unnormalized(tfd, cfg.beta / 2);
        tfd.normalize();
    }

    OperatorSum chi = chi_op(Side::left, N);
    OperatorSum chid = chi_dag(Side::left, N);
    // Bra-side operators enter through their adjoints, so the same four
    // states serve both sides of every entry.
    const OperatorSum left_ops[4] = {chi * chid, chid, chi, chid * chi};
    enum { LLd = 0, Ld = 1, L = 2, LdL = 3 };

    StateVector s[4];
    for (int k = 0; k < 4; ++k) {
        StateVector w = tfd;
        bl.real_time(w, -cfg.t0);
        w.amp = left_ops[k].apply(w.amp);
        bl.real_time(w, cfg.t0);
        slice_sequence(w, bl, br, slices, cfg.interaction, N, 0, 0.0, 0.0, cfg.t1);
        s[k] = std::move(w);
    }

    OperatorSum chr = chi_op(Side::right, N);
    OperatorSum chrd = chi_dag(Side::right, N);
    const OperatorSum RRd = chr * chrd, Rd = chrd, RdR = chrd * chr;
    auto entry = [&](const OperatorSum& op, int a, int b) {
        return s[a].amp.dot(op.apply(s[b].amp));
    };

    cplx r11 = entry(RRd, LLd, LLd) + entry(RRd, L, L);
    cplx r14 = entry(Rd, Ld, LLd) + entry(Rd, LdL, L);
    cplx r22 = entry(RRd, Ld, Ld) + entry(RRd, LdL, LdL);
    cplx r23 = entry(Rd, LLd, Ld) + entry(Rd, L, LdL);
    cplx r33 = entry(RdR, LLd, LLd) + entry(RdR, L, L);
    cplx r44 = entry(RdR, Ld, Ld) + entry(RdR, LdL, LdL);

    DensityMatrix d;
    d.n = 2;
    d.rho = Eigen::MatrixXcd::Zero(4, 4);
    d.rho(0, 0) = 0.5 * r11.real();
    d.rho(0, 3) = 0.5 * r14;
    d.rho(3, 0) = 0.5 * std::conj(r14);
    d.rho(1, 1) = 0.5 * r22.real();
    d.rho(1, 2) = 0.5 * r23;
    d.rho(2, 1) = 0.5 * std::conj(r23);
    d.rho(2, 2) = 0.5 * r33.real();
    d.rho(3, 3) = 0.5 * r44.real();
    return d;
}

double mutual_info_from_rho_TR(const DensityMatrix& rho_TR) {
    return renyi2_mutual(rho_TR, {0}, {1});
}

TeleportResult run_classical(const ProtocolConfig& cfg, const Couplings& c,
                             const MeasurePolicy& policy) {
    if (cfg.channel != ChannelKind::classical)
        throw std::invalid_argument("run_classical: channel must be classical");
    if (cfg.interaction != InteractionKind::qubit_pairs)
        throw std::invalid_argument(
            "run_classical: only the qubit-pair interaction admits a classical channel");
    check_config(cfg, c);
    const auto slices = cfg.resolved_schedule();
    if (slices.size() != 1 || slices[0].time != 0.0)
        throw std::invalid_argument("run_classical: requires a single slice at time 0");
    const double mu = slices[0].mu;

    ProtocolRegister reg{cfg.N};
    const int n2 = cfg.N / 2;
    OperatorSum HL = build_hamiltonian(c, Side::left);
    OperatorSum HR = build_hamiltonian(c, Side::right);
    StateVector psi = initial_register(doubled_tfd(HL, cfg.N, cfg.beta), cfg.N);

    BlockEvolver bl(HL.embedded(reg.n_qubits(), reg.left_first()), reg.left_first(), n2);
    BlockEvolver br(HR.embedded(reg.n_qubits(), reg.left_first()), reg.right_first(), n2);

    bl.real_time(psi, -cfg.t0);
    psi.amp = swap_operator(Side::left, cfg.N).apply(psi.amp);
    bl.real_time(psi, cfg.t0);

    std::vector<int> left_qubits(n2);
    std::iota(left_qubits.begin(), left_qubits.end(), reg.left_first());
    auto measured = measure_qubits(psi, left_qubits, policy);

    const uint64_t rmask = (uint64_t{1} << n2) - 1;
    const uint64_t tbit = uint64_t{1} << reg.t_qubit();
    const uint64_t rbit = uint64_t{1} << reg.right_first();

    TeleportResult res;
    Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(4, 4);
    double total_prob = 0;
    for (auto& o : measured) {
        StateVector state = std::move(o.state);
        // Phase operator exp(i mu sum_j s_j Z_j) on the right block, with
        // s_j the measured Z eigenvalue of left qubit j.
        std::vector<cplx> mult(std::size_t{1} << n2);
        for (uint64_t r = 0; r <= rmask; ++r) {
            int acc = 0;
            for (int j = 0; j < n2; ++j) {
                int sj = ((o.bits >> j) & 1) ? -1 : 1;
                int zj = ((r >> j) & 1) ? -1 : 1;
                acc += sj * zj;
            }
            mult[r] = std::exp(cplx(0, mu * acc));
        }
        for (std::int64_t b = 0; b < state.amp.size(); ++b)
            state.amp[b] *= mult[(uint64_t(b) >> reg.right_first()) & rmask];

        br.real_time(state, cfg.t1);

        // Plain qubit swap of the first right qubit into T.
        for (std::int64_t b = 0; b < state.amp.size(); ++b) {
            uint64_t ub = uint64_t(b);
            if ((ub & rbit) && !(ub & tbit)) std::swap(state.amp[b], state.amp[b ^ rbit ^ tbit]);
        }
        // Parity correction: odd measured occupation flips T's phase.
        if (popcnt(o.bits) & 1)
            for (std::int64_t b = 0; b < state.amp.size(); ++b)
                if (uint64_t(b) & tbit) state.amp[b] = -state.amp[b];

        ClassicalOutcome co;
        co.bits = o.bits;
        co.probability = o.prob;
        co.rho_TR = reduced_density(state, {reg.r_qubit(), reg.t_qubit()});
        co.I_RT = mutual_info_from_rho_TR(co.rho_TR);
        avg += o.prob * co.rho_TR.rho;
        total_prob += o.prob;
        res.outcomes.push_back(std::move(co));
    }
    if (res.outcomes.empty()) throw std::runtime_error("run_classical: no measurement outcomes");
    res.rho_TR.n = 2;
    res.rho_TR.rho = avg / total_prob;
    res.I_RT = mutual_info_from_rho_TR(res.rho_TR);
    return res;
}

namespace {

// Asymmetry pair for one coupling set at (t0, t1): both signed variants of
// the base schedule, magnitudes kept per slice.
std::pair<double, double> signed_pair(const ProtocolConfig& base, const Couplings& c, double t0,
                                      double t1) {
    ProtocolConfig cfg = base;
    cfg.channel = ChannelKind::quantum;
    cfg.t0 = t0;
    cfg.t1 = t1;
    cfg.schedule = cfg.resolved_schedule();
    for (auto& s : cfg.schedule) s.mu = -std::abs(s.mu);
    cfg.mu = -std::abs(base.mu);
    double I_minus = mutual_info_from_rho_TR(rho_TR_correlator(cfg, c));
    for (auto& s : cfg.schedule) s.mu = std::abs(s.mu);
    cfg.mu = std::abs(base.mu);
    double I_plus = mutual_info_from_rho_TR(rho_TR_correlator(cfg, c));
    return {I_minus, I_plus};
}

}  // namespace

std::vector<MiCurvePoint> mi_curve(const std::vector<Couplings>& ensemble,
                                   const ProtocolConfig& base, const std::vector<double>& t_grid,
                                   int threads) {
    if (ensemble.empty()) throw std::invalid_argument("mi_curve: empty ensemble");
    const std::size_t ni = ensemble.size(), nt = t_grid.size();
    std::vector<MiCurvePoint> rows(ni * nt);
    parallel_for(ni * nt, threads, [&](std::size_t w) {
        std::size_t i = w / nt, k = w % nt;
        auto [im, ip] = signed_pair(base, ensemble[i], t_grid[k], t_grid[k]);
        rows[w] = {int(i), t_grid[k], im, ip, im - ip};
    });
    // Mean rows follow the per-instantiation block, one per grid point.
    for (std::size_t k = 0; k < nt; ++k) {
        MiCurvePoint m{-1, t_grid[k], 0, 0, 0};
        for (std::size_t i = 0; i < ni; ++i) {
            m.I_minus += rows[i * nt + k].I_minus;
            m.I_plus += rows[i * nt + k].I_plus;
        }
        m.I_minus /= double(ni);
        m.I_plus /= double(ni);
        m.asymmetry = m.I_minus - m.I_plus;
        rows.push_back(m);
    }
    return rows;
}

std::vector<CausalPoint> causal_ordering_scan(const Couplings& c, const ProtocolConfig& base,
                                              const std::vector<double>& t0_grid,
                                              const std::vector<double>& t1_grid, int threads) {
    for (const auto* g : {&t0_grid, &t1_grid}) {
        if (g->empty()) throw std::invalid_argument("causal_ordering_scan: empty grid");
        for (std::size_t i = 1; i < g->size(); ++i)
            if ((*g)[i] <= (*g)[i - 1])
                throw std::invalid_argument("causal_ordering_scan: grid not strictly increasing");
    }
    const std::size_t n0 = t0_grid.size(), n1 = t1_grid.size();
    std::vector<double> asym(n0 * n1);
    parallel_for(n0 * n1, threads, [&](std::size_t w) {
        std::size_t i = w / n1, k = w % n1;
        auto [im, ip] = signed_pair(base, c, t0_grid[i], t1_grid[k]);
        asym[w] = im - ip;
    });
    std::vector<CausalPoint> out(n0);
    for (std::size_t i = 0; i < n0; ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < n1; ++k)
            if (asym[i * n1 + k] > asym[i * n1 + best]) best = k;
        out[i] = {t0_grid[i], t1_grid[best], asym[i * n1 + best]};
    }
    return out;
}

}  // namespace whlab
