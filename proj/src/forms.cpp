#include "bergman/forms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace bergman {

MultiIndex::MultiIndex(std::vector<int> e) : exponents(std::move(e)) {
    for (int a : exponents)
        if (a < 0) throw std::invalid_argument("MultiIndex: negative exponent");
}

int MultiIndex::order() const {
    int s = 0;
    for (int a : exponents) s += a;
    return s;
}

double MultiIndex::factorial() const {
    double p = 1.0;
    for (int a : exponents)
        for (int j = 2; j <= a; ++j) p *= j;
    return p;
}

double MultiIndex::log_factorial() const {
    double s = 0.0;
    for (int a : exponents) s += std::lgamma(double(a) + 1.0);
    return s;
}

std::vector<MultiIndex> multi_indices_up_to(int n, int degree_cap) {
    if (n <= 0) throw std::invalid_argument("multi_indices_up_to: n must be positive");
    if (degree_cap < 0) throw std::invalid_argument("multi_indices_up_to: negative cap");
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<size_t>(n), 0);
    // graded: total degree ascending, lexicographic within a degree
    for (int d = 0; d <= degree_cap; ++d) {
        std::function<void(int, int)> rec = [&](int pos, int rem) {
            if (pos == n - 1) {
                cur[static_cast<size_t>(pos)] = rem;
                out.emplace_back(cur);
                return;
            }
            for (int a = rem; a >= 0; --a) {
                cur[static_cast<size_t>(pos)] = a;
                rec(pos + 1, rem - a);
            }
        };
        rec(0, d);
    }
    return out;
}

FormIndex::FormIndex(std::vector<int> idx) : indices(std::move(idx)) {
    for (size_t i = 0; i + 1 < indices.size(); ++i)
        if (indices[i] >= indices[i + 1])
            throw std::invalid_argument("FormIndex: entries must be strictly increasing");
    if (!indices.empty() && indices.front() < 1)
        throw std::invalid_argument("FormIndex: entries are 1-based");
}

bool FormIndex::contains(int i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
}

int FormIndex::position(int i) const {
    auto it = std::lower_bound(indices.begin(), indices.end(), i);
    if (it == indices.end() || *it != i) return -1;
    return static_cast<int>(it - indices.begin());
}

std::string FormIndex::str() const {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < indices.size(); ++i) {
        if (i) os << ',';
        os << indices[i];
    }
    os << ')';
    return os.str();
}

std::vector<FormIndex> form_indices(int n, int q) {
    if (n <= 0) throw std::invalid_argument("form_indices: n must be positive");
    if (q < 0 || q > n) throw std::invalid_argument("form_indices: need 0 <= q <= n");
    std::vector<FormIndex> out;
    std::vector<int> cur(static_cast<size_t>(q));
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == q) {
            out.emplace_back(cur);
            return;
        }
        for (int i = start; i <= n - (q - pos - 1); ++i) {
            cur[static_cast<size_t>(pos)] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 1);
    return out;
}

int form_index_rank(int n, const FormIndex& I) {
    // lexicographic rank within J_{q,n}
    int q = I.degree();
    int rank = 0;
    int prev = 0;
    for (int pos = 0; pos < q; ++pos) {
        int ip = I.indices[static_cast<size_t>(pos)];
        for (int t = prev + 1; t < ip; ++t)
            rank += static_cast<int>(binomial(n - t, q - pos - 1));
        prev = ip;
    }
    return rank;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return std::round(r);
}

FormValue::FormValue(int n_, int q_) : n(n_), q(q_) {
    if (q < 0 || q > n) throw std::invalid_argument("FormValue: need 0 <= q <= n");
    coeff = CVector::Zero(static_cast<Eigen::Index>(binomial(n, q)));
}

FormValue FormValue::basis(int n, const FormIndex& I) {
    FormValue v(n, I.degree());
    v.coeff[form_index_rank(n, I)] = 1.0;
    return v;
}

Complex FormValue::operator[](const FormIndex& I) const {
    return coeff[form_index_rank(n, I)];
}

Complex& FormValue::at(const FormIndex& I) { return coeff[form_index_rank(n, I)]; }

FormValue FormValue::operator+(const FormValue& o) const {
    if (n != o.n || q != o.q) throw std::invalid_argument("FormValue: degree mismatch");
    FormValue r(n, q);
    r.coeff = coeff + o.coeff;
    return r;
}

FormValue FormValue::operator-(const FormValue& o) const {
    if (n != o.n || q != o.q) throw std::invalid_argument("FormValue: degree mismatch");
    FormValue r(n, q);
    r.coeff = coeff - o.coeff;
    return r;
}

FormValue FormValue::operator*(Complex s) const {
    FormValue r(n, q);
    r.coeff = coeff * s;
    return r;
}

KernelValue::KernelValue(int n_, int q_) : n(n_), q(q_) {
    auto c = static_cast<Eigen::Index>(binomial(n, q));
    m = CMatrix::Zero(c, c);
}

FormValue KernelValue::apply(const FormValue& u) const {
    if (u.n != n || u.q != q) throw std::invalid_argument("KernelValue: degree mismatch");
    FormValue r(n, q);
    r.coeff = m * u.coeff;
    return r;
}

KernelValue KernelValue::operator-(const KernelValue& o) const {
    KernelValue r(n, q);
    r.m = m - o.m;
    return r;
}

bool wedge_insert_sign(const FormIndex& I, int i, FormIndex& out, int& sign) {
    if (I.contains(i)) return false;
    std::vector<int> merged;
    merged.reserve(I.indices.size() + 1);
    int p = 0;
    bool placed = false;
    for (int j : I.indices) {
        if (!placed && i < j) {
            merged.push_back(i);
            placed = true;
        }
        if (!placed) ++p;
        merged.push_back(j);
    }
    if (!placed) merged.push_back(i);
    out = FormIndex(std::move(merged));
    sign = (p % 2 == 0) ? 1 : -1;
    return true;
}

bool flat_interior_sign(const FormIndex& I, int i, FormIndex& out, int& sign) {
    int p = I.position(i);
    if (p < 0) return false;
    std::vector<int> rest;
    rest.reserve(I.indices.size() - 1);
    for (int j : I.indices)
        if (j != i) rest.push_back(j);
    out = FormIndex(std::move(rest));
    sign = (p % 2 == 0) ? 1 : -1;
    return true;
}

FormValue wedge(const FormValue& eta, const FormValue& u) {
    if (eta.q != 1) throw std::invalid_argument("wedge: eta must have degree 1");
    if (eta.n != u.n) throw std::invalid_argument("wedge: dimension mismatch");
    if (u.q + 1 > u.n) throw std::invalid_argument("wedge: degree overflow (q+1 > n)");
    FormValue r(u.n, u.q + 1);
    auto idx = form_indices(u.n, u.q);
    for (int a = 0; a < static_cast<int>(idx.size()); ++a) {
        Complex cu = u.coeff[a];
        if (cu == 0.0) continue;
        for (int i = 1; i <= u.n; ++i) {
            Complex ce = eta.coeff[i - 1];
            if (ce == 0.0) continue;
            FormIndex J;
            int s;
            if (wedge_insert_sign(idx[static_cast<size_t>(a)], i, J, s))
                r.at(J) += double(s) * ce * cu;
        }
    }
    return r;
}

static void check_metric(int n, const CMatrix& h) {
    if (h.rows() != n || h.cols() != n)
        throw std::invalid_argument("metric: wrong size");
    double nrm = h.cwiseAbs().maxCoeff();
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(nrm, 1.0))
        throw std::invalid_argument("metric: not Hermitian");
    Eigen::LLT<CMatrix> llt(h);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("metric: not positive definite");
}

CMatrix frame_gram(int n, int q, const CMatrix& h) {
    check_metric(n, h);
    CMatrix hinv = h.inverse();
    auto idx = form_indices(n, q);
    auto c = static_cast<Eigen::Index>(idx.size());
    CMatrix G(c, c);
    for (Eigen::Index a = 0; a < c; ++a) {
        for (Eigen::Index b = 0; b < c; ++b) {
            CMatrix sub(q, q);
            for (int l = 0; l < q; ++l)
                for (int k = 0; k < q; ++k)
                    sub(l, k) = hinv(idx[static_cast<size_t>(a)].indices[static_cast<size_t>(l)] - 1,
                                     idx[static_cast<size_t>(b)].indices[static_cast<size_t>(k)] - 1);
            G(a, b) = (q == 0) ? Complex(1.0) : std::conj(Complex(sub.determinant()));
        }
    }
    return G;
}

Complex pointwise_inner(const FormValue& u, const FormValue& v, const CMatrix& h) {
    if (u.n != v.n || u.q != v.q)
        throw std::invalid_argument("pointwise_inner: degree mismatch");
    CMatrix G = frame_gram(u.n, u.q, h);
    CVector gv = G * v.coeff.conjugate();
    return u.coeff.cwiseProduct(gv).sum();
}

FormValue contract(const FormValue& eta, const FormValue& u, const CMatrix& h) {
    if (eta.q != 1) throw std::invalid_argument("contract: eta must have degree 1");
    if (u.q < 1) throw std::invalid_argument("contract: degree underflow (q = 0)");
    if (eta.n != u.n) throw std::invalid_argument("contract: dimension mismatch");
    int n = u.n, q = u.q;

    bool flat = h.isIdentity(1e-14);
    if (flat) {
        FormValue r(n, q - 1);
        auto idx = form_indices(n, q);
        for (int a = 0; a < static_cast<int>(idx.size()); ++a) {
            Complex cu = u.coeff[a];
            if (cu == 0.0) continue;
            for (int i : idx[static_cast<size_t>(a)].indices) {
                FormIndex J;
                int s;
                flat_interior_sign(idx[static_cast<size_t>(a)], i, J, s);
                r.at(J) += double(s) * std::conj(eta.coeff[i - 1]) * cu;
            }
        }
        return r;
    }

    // general metric: adjoint of the wedge matrix under the frame Grams
    auto lo = form_indices(n, q - 1);
    auto hi = form_indices(n, q);
    CMatrix W = CMatrix::Zero(static_cast<Eigen::Index>(hi.size()),
                              static_cast<Eigen::Index>(lo.size()));
    for (int b = 0; b < static_cast<int>(lo.size()); ++b) {
        FormValue w = wedge(eta, FormValue::basis(n, lo[static_cast<size_t>(b)]));
        W.col(b) = w.coeff;
    }
    CMatrix Glo = frame_gram(n, q - 1, h);
    CMatrix Ghi = frame_gram(n, q, h);
    // <W v|u>_hi = <v|r>_lo for all v  =>  r = Glo^{-1} W^H Ghi u
    // (with G_{IJ} = <I|J>, <a|b> = a^T G conj(b): W^T Ghi conj(u) = Glo conj(r))
    FormValue r(n, q - 1);
    CVector rhs = (W.transpose() * Ghi * u.coeff.conjugate()).conjugate();
    r.coeff = Glo.conjugate().ldlt().solve(rhs);
    return r;
}

}  // namespace bergman
