#include "whlab/pauli.hpp"

#include <algorithm>
#include <stdexcept>

namespace whlab {

std::string PauliTerm::to_string() const {
    static const char* pre[4] = {"", "i * ", "-", "-i * "};
    std::string s = pre[phase & 3];
    for (int k = 0; k < n; ++k) {
        bool bx = (x >> k) & 1, bz = (z >> k) & 1;
        s += bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
    }
    return s;
}

Eigen::MatrixXcd PauliTerm::dense() const {
    std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (uint64_t b = 0; b < dim; ++b) m(b ^ x, b) = pauli_basis_amp(*this, b);
    return m;
}

PauliTerm pauli_mul(const PauliTerm& a, const PauliTerm& b) {
    if (a.n != b.n) throw std::invalid_argument("pauli_mul: qubit count mismatch");
    PauliTerm r;
    r.n = a.n;
    r.x = a.x ^ b.x;
    r.z = a.z ^ b.z;
    // sigma(a) sigma(b) = i^g sigma(r) with g from resolving Y factors and
    // commuting Z's of a past X's of b.
    int g = popcnt(a.x & a.z) + popcnt(b.x & b.z) + 2 * popcnt(a.z & b.x) - popcnt(r.x & r.z);
    r.phase = static_cast<uint8_t>((a.phase + b.phase + g) & 3);
    return r;
}

OperatorSum OperatorSum::identity(int n_qubits) {
    OperatorSum s(n_qubits);
    s.terms_.push_back({0, 0, cplx(1, 0)});
    return s;
}

OperatorSum& OperatorSum::add(const PauliTerm& t, cplx coeff) {
    if (t.n != n_) throw std::invalid_argument("OperatorSum::add: qubit count mismatch");
    return add_string(t.x, t.z, coeff * t.phase_value());
}

OperatorSum OperatorSum::from_terms(int n_qubits, std::vector<Term> raw) {
    OperatorSum s(n_qubits);
    s.terms_ = std::move(raw);
    s.sort_and_merge();
    return s;
}

OperatorSum& OperatorSum::add_string(uint64_t x, uint64_t z, cplx coeff) {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), Term{x, z, {}},
                               [](const Term& a, const Term& b) {
                                   return a.z != b.z ? a.z < b.z : a.x < b.x;
                               });
    if (it != terms_.end() && it->x == x && it->z == z)
        it->c += coeff;
    else
        terms_.insert(it, {x, z, coeff});
    return *this;
}

OperatorSum& OperatorSum::operator+=(const OperatorSum& o) {
    if (o.n_ != n_) throw std::invalid_argument("OperatorSum: qubit count mismatch");
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    sort_and_merge();
    return *this;
}

OperatorSum& OperatorSum::operator-=(const OperatorSum& o) {
    if (o.n_ != n_) throw std::invalid_argument("OperatorSum: qubit count mismatch");
    for (const Term& t : o.terms_) terms_.push_back({t.x, t.z, -t.c});
    sort_and_merge();
    return *this;
}

OperatorSum& OperatorSum::operator*=(cplx s) {
    for (Term& t : terms_) t.c *= s;
    return *this;
}

OperatorSum operator*(const OperatorSum& a, const OperatorSum& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("OperatorSum: qubit count mismatch");
    OperatorSum r(a.n_);
    r.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_)
        for (const auto& tb : b.terms_) {
            uint64_t x = ta.x ^ tb.x, z = ta.z ^ tb.z;
            int g = popcnt(ta.x & ta.z) + popcnt(tb.x & tb.z) + 2 * popcnt(ta.z & tb.x) -
                    popcnt(x & z);
            r.terms_.push_back({x, z, ta.c * tb.c * IPOW[g & 3]});
        }
    r.sort_and_merge();
    return r;
}

OperatorSum OperatorSum::adjoint() const {
    OperatorSum r(n_);
    r.terms_ = terms_;
    for (Term& t : r.terms_) t.c = std::conj(t.c);  // strings are Hermitian
    return r;
}

OperatorSum OperatorSum::commutator(const OperatorSum& o) const {
    OperatorSum ab = *this * o;
    OperatorSum ba = o * *this;
    ab -= ba;
    ab.compress(0.0);
    return ab;
}

bool OperatorSum::is_hermitian(double tol) const {
    for (const Term& t : terms_)
        if (std::abs(t.c.imag()) > tol) return false;
    return true;
}

bool OperatorSum::is_diagonal() const {
    for (const Term& t : terms_)
        if (t.x != 0) return false;
    return true;
}

double OperatorSum::trace_over_dim() const {
    for (const Term& t : terms_)
        if (t.x == 0 && t.z == 0) return t.c.real();
    return 0.0;
}

double OperatorSum::max_abs_coeff() const {
    double m = 0.0;
    for (const Term& t : terms_) m = std::max(m, std::abs(t.c));
    return m;
}

void OperatorSum::compress(double tol) {
    std::erase_if(terms_, [tol](const Term& t) { return std::abs(t.c) <= tol; });
}

OperatorSum OperatorSum::embedded(int new_n, int offset) const {
    if (offset < 0 || n_ + offset > new_n)
        throw std::invalid_argument("OperatorSum::embedded: register too small");
    OperatorSum r(new_n);
    r.terms_ = terms_;
    for (Term& t : r.terms_) {
        t.x <<= offset;
        t.z <<= offset;
    }
    return r;
}

void OperatorSum::apply(const cplx* in, cplx* out, std::size_t dim) const {
    if (dim != (std::size_t{1} << n_)) throw std::invalid_argument("OperatorSum::apply: bad dim");
    std::fill(out, out + dim, cplx(0, 0));
    for (const Term& t : terms_) {
        cplx base = t.c * IPOW[popcnt(t.x & t.z) & 3];
        for (uint64_t b = 0; b < dim; ++b) {
            cplx amp = (popcnt(t.z & b) & 1) ? -base : base;
            out[b ^ t.x] += amp * in[b];
        }
    }
}

Eigen::VectorXcd OperatorSum::apply(const Eigen::VectorXcd& in) const {
    Eigen::VectorXcd out(in.size());
    apply(in.data(), out.data(), static_cast<std::size_t>(in.size()));
    return out;
}

Eigen::MatrixXcd OperatorSum::dense() const {
    std::size_t dim = std::size_t{1} << n_;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const Term& t : terms_) {
        cplx base = t.c * IPOW[popcnt(t.x & t.z) & 3];
        for (uint64_t b = 0; b < dim; ++b)
            m(b ^ t.x, b) += (popcnt(t.z & b) & 1) ? -base : base;
    }
    return m;
}

void OperatorSum::sort_and_merge() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
        return a.z != b.z ? a.z < b.z : a.x < b.x;
    });
    std::size_t w = 0;
    for (std::size_t i = 0; i < terms_.size();) {
        Term acc = terms_[i];
        std::size_t j = i + 1;
        while (j < terms_.size() && terms_[j].x == acc.x && terms_[j].z == acc.z)
            acc.c += terms_[j++].c;
        terms_[w++] = acc;
        i = j;
    }
    terms_.resize(w);
}

}  // namespace whlab
