#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace bergman {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Point = CVector;  // point of C^n

/// Exponent vector alpha in N_0^n indexing monomials z^alpha.
struct MultiIndex {
    std::vector<int> exponents;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e);

    int dim() const { return static_cast<int>(exponents.size()); }
    int order() const;               // |alpha|
    double factorial() const;        // alpha!, floating accumulation
    double log_factorial() const;    // log(alpha!)
    int operator[](int i) const { return exponents[static_cast<size_t>(i)]; }
    bool operator==(const MultiIndex& o) const { return exponents == o.exponents; }
};

/// All multi-indices with |alpha| <= degree_cap, graded lexicographic order.
std::vector<MultiIndex> multi_indices_up_to(int n, int degree_cap);

/// Strictly increasing q-tuple (1-based entries <= n); the empty tuple is the
/// unique index of degree 0.
struct FormIndex {
    std::vector<int> indices;

    FormIndex() = default;
    explicit FormIndex(std::vector<int> idx);

    int degree() const { return static_cast<int>(indices.size()); }
    bool contains(int i) const;
    /// 0-based position of i, or -1.
    int position(int i) const;
    bool operator==(const FormIndex& o) const { return indices == o.indices; }
    bool operator<(const FormIndex& o) const { return indices < o.indices; }
    std::string str() const;   // "(1,3)"; "()" for degree 0
};

/// J_{q,n} in lexicographic order; length C(n,q).
std::vector<FormIndex> form_indices(int n, int q);

/// Rank of a FormIndex inside form_indices(n, q).
int form_index_rank(int n, const FormIndex& I);

double binomial(int n, int k);

/// Coefficients of a (0,q)-form over the frame {dzbar^I}, I in J_{q,n},
/// stored densely in lexicographic order.
struct FormValue {
    int n = 0;
    int q = 0;
    CVector coeff;   // length C(n,q)

    FormValue() = default;
    FormValue(int n_, int q_);

    static FormValue basis(int n, const FormIndex& I);   // dzbar^I
    Complex operator[](const FormIndex& I) const;
    Complex& at(const FormIndex& I);

    FormValue operator+(const FormValue& o) const;
    FormValue operator-(const FormValue& o) const;
    FormValue operator*(Complex s) const;
    double norm_inf() const { return coeff.size() ? coeff.cwiseAbs().maxCoeff() : 0.0; }
};

/// Pointwise value of a kernel section: rows indexed by I (z side), columns
/// by J (w side), both over J_{q,n}. Acts linearly on FormValue.
struct KernelValue {
    int n = 0;
    int q = 0;
    CMatrix m;   // C(n,q) x C(n,q)

    KernelValue() = default;
    KernelValue(int n_, int q_);

    FormValue apply(const FormValue& u) const;
    KernelValue operator-(const KernelValue& o) const;
    double norm_inf() const { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
};

/// eta ^ u for a (0,1)-form eta and a (0,q)-form u. Inserting index i into I
/// at position p carries sign (-1)^p.
FormValue wedge(const FormValue& eta, const FormValue& u);

/// Gram matrix of the frame {dzbar^I} under the metric h on T^{(1,0)}
/// (h Hermitian positive definite): G_{IJ} = conj(det [hinv_{i_l, j_m}]).
/// Determinant convention, no 1/q! factor; flat h gives the identity.
CMatrix frame_gram(int n, int q, const CMatrix& h);

/// <u|v>_h, linear in u, conjugate-linear in v.
Complex pointwise_inner(const FormValue& u, const FormValue& v, const CMatrix& h);

/// Metric adjoint of wedge(eta, .): for all v of degree q-1,
/// <wedge(eta,v)|u>_h = <v|contract(eta,u,h)>_h. Conjugate-linear in eta.
FormValue contract(const FormValue& eta, const FormValue& u, const CMatrix& h);

/// Fast path used by the Laplacian assembly: interior product
/// (dzbar^i ^*) dzbar^I under the flat metric, with its sign; returns false
/// when i is not in I.
bool flat_interior_sign(const FormIndex& I, int i, FormIndex& out, int& sign);

/// dzbar^i ^ dzbar^I with sign; returns false when i is already in I.
bool wedge_insert_sign(const FormIndex& I, int i, FormIndex& out, int& sign);

}  // namespace bergman
