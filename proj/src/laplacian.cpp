#include "bergman/laplacian.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace bergman {

namespace {

void enumerate_simplex(int axes, int cap, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(static_cast<size_t>(axes), 0);
    std::function<void(int, int)> rec = [&](int axis, int used) {
        if (axis == axes) {
            out.push_back(cur);
            return;
        }
        for (int m = 0; m <= cap - used; ++m) {
            cur[static_cast<size_t>(axis)] = m;
            rec(axis + 1, used + m);
        }
    };
    rec(0, 0);
}

long box_index(const std::vector<int>& tuple, int box_levels) {
    long idx = 0;
    long stride = 1;
    for (int m : tuple) {
        idx += m * stride;
        stride *= box_levels;
    }
    return idx;
}

}  // namespace

OscillatorBasis oscillator_basis(const WeightModel& weight, int q, int levels) {
    if (q < 0 || q > weight.dim())
        throw std::invalid_argument("oscillator_basis: need 0 <= q <= n");
    if (levels < 1) throw std::invalid_argument("oscillator_basis: need at least one level");
    OscillatorBasis b;
    b.n = weight.dim();
    b.q = q;
    b.levels = levels;
    b.lambdas = weight.lambdas();
    b.forms = form_indices(b.n, q);
    enumerate_simplex(b.axes(), levels - 1, b.tuples);
    return b;
}

/// polynomial parts eta_m(t) of the oscillator functions chi_m = eta_m e^{-s t^2 / 2}
static void hermite_poly_values(double s, int levels, double t, std::vector<double>& out) {
    out.resize(static_cast<size_t>(levels));
    double c = std::pow(s / M_PI, 0.25);
    out[0] = c;
    if (levels == 1) return;
    double root2s = std::sqrt(2.0 * s);
    out[1] = root2s * t * c;
    for (int m = 1; m + 1 < levels; ++m)
        out[static_cast<size_t>(m + 1)] =
            (root2s * t * out[static_cast<size_t>(m)] -
             std::sqrt(double(m)) * out[static_cast<size_t>(m - 1)]) /
            std::sqrt(double(m + 1));
}

CVector OscillatorBasis::scalar_values(const Point& z) const {
    std::vector<std::vector<double>> vals(static_cast<size_t>(axes()));
    for (int a = 0; a < axes(); ++a) {
        int coord = a / 2;
        double s = envelope(coord);
        double t = (a % 2 == 0) ? z[coord].real() : z[coord].imag();
        hermite_poly_values(s, levels, t, vals[static_cast<size_t>(a)]);
        double env = std::exp(-0.5 * s * t * t);
        for (double& v : vals[static_cast<size_t>(a)]) v *= env;
    }
    CVector out(scalar_dim());
    for (long s = 0; s < scalar_dim(); ++s) {
        double p = 1.0;
        const auto& tup = tuples[static_cast<size_t>(s)];
        for (int a = 0; a < axes(); ++a)
            p *= vals[static_cast<size_t>(a)][static_cast<size_t>(tup[static_cast<size_t>(a)])];
        out[s] = p;
    }
    return out;
}

// ---------------------------------------------------------------------------
// per-axis matrices
// ---------------------------------------------------------------------------

/// <chi_a | t^p chi_b> by Gauss quadrature with the envelope folded into the
/// rule; entries outside the band/parity pattern are structurally zero.
static Eigen::MatrixXd axis_power_matrix(double s_env, int levels, int p, int quad_order) {
    QuadratureAxis ax = gauss_axis(quad_order, 0.5 * s_env);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(levels, levels);
    std::vector<double> eta;
    for (size_t i = 0; i < ax.nodes.size(); ++i) {
        double t = ax.nodes[i];
        hermite_poly_values(s_env, levels, t, eta);
        double w = ax.weights[i] * std::pow(t, p);
        for (int a = 0; a < levels; ++a)
            for (int b = 0; b < levels; ++b)
                M(a, b) += w * eta[static_cast<size_t>(a)] * eta[static_cast<size_t>(b)];
    }
    for (int a = 0; a < levels; ++a)
        for (int b = 0; b < levels; ++b)
            if (std::abs(a - b) > p || ((a + b + p) % 2) != 0) M(a, b) = 0.0;
    return M;
}

/// d/dt in the oscillator basis (exact ladder relation)
static Eigen::MatrixXd axis_derivative_matrix(double s_env, int levels) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(levels, levels);
    double c = std::sqrt(0.5 * s_env);
    for (int m = 0; m < levels; ++m) {
        if (m - 1 >= 0) D(m - 1, m) = c * std::sqrt(double(m));
        if (m + 1 < levels) D(m + 1, m) = -c * std::sqrt(double(m + 1));
    }
    return D;
}

static SparseC to_sparse(const Eigen::MatrixXcd& M) { return M.sparseView(1.0, 1e-300); }

static SparseC sparse_identity(long d) {
    SparseC I(d, d);
    I.setIdentity();
    return I;
}

static SparseC kron(const SparseC& A, const SparseC& B) {
    SparseC out(A.rows() * B.rows(), A.cols() * B.cols());
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<size_t>(A.nonZeros()) * static_cast<size_t>(B.nonZeros()));
    for (int ka = 0; ka < A.outerSize(); ++ka)
        for (SparseC::InnerIterator ia(A, ka); ia; ++ia)
            for (int kb = 0; kb < B.outerSize(); ++kb)
                for (SparseC::InnerIterator ib(B, kb); ib; ++ib)
                    trip.emplace_back(ia.row() * B.rows() + ib.row(),
                                      ia.col() * B.cols() + ib.col(), ia.value() * ib.value());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

static Complex unit_power(int e) {
    switch (((e % 4) + 4) % 4) {  // i^e
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

namespace {

/// Scalar-space operators on the uniform box of `levels` per-axis functions;
/// callers restrict rows/columns to simplex subsets afterwards.
class ScalarOps {
  public:
    ScalarOps(const OscillatorBasis& proto, int levels, int max_power)
        : n_(proto.n), levels_(levels) {
        int order = levels + max_power + 2;
        powers_.resize(static_cast<size_t>(n_));
        deriv_.resize(static_cast<size_t>(n_));
        for (int j = 0; j < n_; ++j) {
            double s = proto.envelope(j);
            for (int p = 0; p <= max_power; ++p)
                powers_[static_cast<size_t>(j)].push_back(
                    to_sparse(axis_power_matrix(s, levels, p, order).cast<Complex>()));
            deriv_[static_cast<size_t>(j)] =
                to_sparse(axis_derivative_matrix(s, levels).cast<Complex>());
        }
    }

    long dim() const {
        long d = 1;
        for (int a = 0; a < 2 * n_; ++a) d *= levels_;
        return d;
    }

    /// multiplication by c * z^a zbar^b
    SparseC mult_term(const PolyTerm& t) const {
        SparseC op;
        bool first = true;
        for (int j = n_ - 1; j >= 0; --j) {
            SparseC coord = coord_mult(j, t.a[j], t.b[j]);
            op = first ? coord : kron(op, coord);
            first = false;
        }
        return t.coeff * op;
    }

    SparseC mult_poly(const Polynomial& p) const {
        SparseC acc(dim(), dim());
        for (const auto& t : p.terms) {
            if (t.coeff == 0.0) continue;
            acc = acc + mult_term(t);
        }
        return acc;
    }

    /// d/dzbar^j = (d/dx + i d/dy) / 2 on coordinate j (1-based)
    SparseC dbar(int j) const { return wirtinger(j, Complex(0.0, 1.0)); }
    /// d/dz^j = (d/dx - i d/dy) / 2
    SparseC dz(int j) const { return wirtinger(j, Complex(0.0, -1.0)); }

  private:
    SparseC wirtinger(int j1, Complex iy) const {
        int j = j1 - 1;
        SparseC ident = sparse_identity(levels_);
        SparseC two_axis = kron(ident, deriv_[static_cast<size_t>(j)]) +
                           iy * kron(deriv_[static_cast<size_t>(j)], ident);
        two_axis = Complex(0.5) * two_axis;
        SparseC op;
        bool first = true;
        for (int c = n_ - 1; c >= 0; --c) {
            SparseC f = (c == j) ? two_axis : kron(ident, ident);
            op = first ? f : kron(op, f);
            first = false;
        }
        return op;
    }

    /// z^a zbar^b on coordinate j (0-based): binomial expansion into x/y powers
    SparseC coord_mult(int j, int a, int b) const {
        long d2 = static_cast<long>(levels_) * levels_;
        SparseC acc(d2, d2);
        for (int r = 0; r <= a; ++r) {
            for (int u = 0; u <= b; ++u) {
                Complex c = binomial(a, r) * binomial(b, u) * unit_power(a - r) *
                            unit_power(-(b - u));
                int px = r + u;
                int py = (a - r) + (b - u);
                acc = acc + c * kron(powers_[static_cast<size_t>(j)][static_cast<size_t>(py)],
                                     powers_[static_cast<size_t>(j)][static_cast<size_t>(px)]);
            }
        }
        return acc;
    }

    int n_;
    int levels_;
    std::vector<std::vector<SparseC>> powers_;  // [coord][p]
    std::vector<SparseC> deriv_;
};

int degree_growth(const WeightModel& w) { return std::max(1, w.perturbation().degree() - 1); }

/// box-to-simplex bookkeeping for one scalar space
struct SimplexMap {
    long box_dim = 0;
    std::vector<long> to_box;    // simplex index -> box index
    std::vector<long> from_box;  // box index -> simplex index or -1

    SimplexMap(const OscillatorBasis& basis, int box_levels) {
        box_dim = 1;
        for (int a = 0; a < basis.axes(); ++a) box_dim *= box_levels;
        from_box.assign(static_cast<size_t>(box_dim), -1);
        to_box.resize(basis.tuples.size());
        for (size_t s = 0; s < basis.tuples.size(); ++s) {
            long bi = box_index(basis.tuples[s], box_levels);
            to_box[s] = bi;
            from_box[static_cast<size_t>(bi)] = static_cast<long>(s);
        }
    }
};

/// assemble a (q -> q2) operator from per-coordinate scalar components:
/// block (J, I) = sum over index transitions of sign * comp[l]
AssembledOperator assemble_first_order(const OscillatorBasis& basis, int k, int q2,
                                       AssembledOperator::Which which,
                                       const std::vector<SparseC>& comp, int box_levels,
                                       bool wedge_direction) {
    OscillatorBasis codomain = basis;
    codomain.q = q2;
    codomain.forms = form_indices(basis.n, q2);
    codomain.levels = box_levels;
    codomain.tuples.clear();
    enumerate_simplex(codomain.axes(), box_levels - 1, codomain.tuples);

    SimplexMap dom_map(basis, box_levels);
    SimplexMap cod_map(codomain, box_levels);

    long nsmall = basis.scalar_dim();
    long nbig = codomain.scalar_dim();
    std::vector<Eigen::Triplet<Complex>> trip;
    for (size_t bi = 0; bi < basis.forms.size(); ++bi) {
        const FormIndex& I = basis.forms[bi];
        for (int l = 1; l <= basis.n; ++l) {
            FormIndex J;
            int sign;
            if (wedge_direction) {
                if (!wedge_insert_sign(I, l, J, sign)) continue;
            } else {
                if (!flat_interior_sign(I, l, J, sign)) continue;
            }
            long row0 = form_index_rank(basis.n, J) * nbig;
            long col0 = static_cast<long>(bi) * nsmall;
            const SparseC& A = comp[static_cast<size_t>(l - 1)];
            for (long s = 0; s < nsmall; ++s) {
                long sb = dom_map.to_box[static_cast<size_t>(s)];
                for (SparseC::InnerIterator it(A, static_cast<int>(sb)); it; ++it) {
                    long rs = cod_map.from_box[static_cast<size_t>(it.row())];
                    if (rs < 0) continue;  // degree growth keeps the image inside the cap
                    trip.emplace_back(row0 + rs, col0 + s, double(sign) * it.value());
                }
            }
        }
    }
    AssembledOperator out;
    out.which = which;
    out.domain = basis;
    out.codomain = codomain;
    out.k = k;
    out.matrix = SparseC(codomain.dim(), basis.dim());
    out.matrix.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace

AssembledOperator assemble_dbar(const OscillatorBasis& basis, const WeightModel& weight, int k) {
    if (basis.q >= basis.n)
        throw std::invalid_argument("assemble_dbar: degree overflow (q = n)");
    if (k < 1) throw std::invalid_argument("assemble_dbar: k must be >= 1");
    WeightModel phik = scaled_weight(weight, double(k));
    int g = degree_growth(weight);
    int box_levels = basis.levels + g;

    ScalarOps ops(basis, box_levels, std::max(1, phik.perturbation().degree()));
    std::vector<SparseC> comp;  // A_l = d/dzbar_l + mult(d phi_(k) / dzbar_l)
    for (int l = 1; l <= basis.n; ++l)
        comp.push_back(ops.dbar(l) + ops.mult_poly(phik.dbar_component(l)));
    return assemble_first_order(basis, k, basis.q + 1, AssembledOperator::Which::dbar, comp,
                                box_levels, true);
}

AssembledOperator assemble_dbar_adjoint(const OscillatorBasis& basis, const WeightModel& weight,
                                        int k) {
    if (k < 1) throw std::invalid_argument("assemble_dbar_adjoint: k must be >= 1");
    if (basis.q == 0) {
        AssembledOperator out;
        out.which = AssembledOperator::Which::dbar_adjoint;
        out.domain = basis;
        out.codomain = basis;
        out.k = k;
        out.matrix = SparseC(0, basis.dim());
        return out;
    }
    WeightModel phik = scaled_weight(weight, double(k));
    int g = degree_growth(weight);
    int box_levels = basis.levels + g;

    ScalarOps ops(basis, box_levels, std::max(1, phik.perturbation().degree()));
    std::vector<SparseC> comp;  // B_i = -d/dz_i + mult(d phi_(k) / dz_i)
    for (int i = 1; i <= basis.n; ++i)
        comp.push_back(Complex(-1.0) * ops.dz(i) + ops.mult_poly(phik.d_component(i)));
    return assemble_first_order(basis, k, basis.q - 1, AssembledOperator::Which::dbar_adjoint,
                                comp, box_levels, false);
}

AssembledOperator assemble_laplacian(const OscillatorBasis& basis, const WeightModel& weight,
                                     int k) {
    AssembledOperator out;
    out.which = AssembledOperator::Which::laplacian;
    out.domain = basis;
    out.codomain = basis;
    out.k = k;

    SparseC acc(basis.dim(), basis.dim());
    if (basis.q < basis.n) {
        AssembledOperator D = assemble_dbar(basis, weight, k);
        SparseC Dh = D.matrix.adjoint();
        acc = acc + SparseC(Dh * D.matrix);
    }
    if (basis.q > 0) {
        AssembledOperator E = assemble_dbar_adjoint(basis, weight, k);
        SparseC Eh = E.matrix.adjoint();
        acc = acc + SparseC(Eh * E.matrix);
    }
    // enforce exact Hermiticity against roundoff
    SparseC accH = acc.adjoint();
    out.matrix = Complex(0.5) * (acc + accH);
    return out;
}

CVector embed_coefficients(const OscillatorBasis& from, const OscillatorBasis& to,
                           const CVector& u) {
    if (from.n != to.n || from.q != to.q || to.levels < from.levels)
        throw std::invalid_argument("embed_coefficients: incompatible bases");
    SimplexMap to_map(to, to.levels);
    CVector out = CVector::Zero(to.dim());
    long nsf = from.scalar_dim();
    long nst = to.scalar_dim();
    for (size_t f = 0; f < from.forms.size(); ++f) {
        for (long s = 0; s < nsf; ++s) {
            long bi = box_index(from.tuples[static_cast<size_t>(s)], to.levels);
            long st = to_map.from_box[static_cast<size_t>(bi)];
            out[static_cast<long>(f) * nst + st] = u[static_cast<long>(f) * nsf + s];
        }
    }
    return out;
}

SpectralData laplacian_spectrum(const AssembledOperator& op) {
    if (op.which != AssembledOperator::Which::laplacian)
        throw std::invalid_argument("laplacian_spectrum: operator is not a Laplacian");
    return hermitian_eigh(op.dense());
}

CMatrix spectral_projection_matrix(const SpectralData& spec, double threshold) {
    if (threshold < 0.0)
        throw std::invalid_argument("spectral_projection_matrix: threshold must be >= 0");
    double mu_max = spec.eigenvalues.size() ? spec.eigenvalues[spec.eigenvalues.size() - 1] : 0.0;
    double tol = 1e-9 * std::abs(mu_max);
    Eigen::Index count = 0;
    while (count < spec.eigenvalues.size() && spec.eigenvalues[count] <= threshold + tol) ++count;
    CMatrix V = spec.vectors.leftCols(count);
    return V * V.adjoint();
}

KernelValue spectral_projection_kernel(const SpectralData& spec, const OscillatorBasis& basis,
                                       double threshold, const Point& z, const Point& w) {
    if (threshold < 0.0)
        throw std::invalid_argument("spectral_projection_kernel: threshold must be >= 0");
    double mu_max = spec.eigenvalues.size() ? spec.eigenvalues[spec.eigenvalues.size() - 1] : 0.0;
    double tol = 1e-9 * std::abs(mu_max);
    Eigen::Index count = 0;
    while (count < spec.eigenvalues.size() && spec.eigenvalues[count] <= threshold + tol) ++count;

    KernelValue K(basis.n, basis.q);
    if (count == 0) return K;

    long nscal = basis.scalar_dim();
    auto nforms = static_cast<Eigen::Index>(basis.forms.size());
    CVector bz = basis.scalar_values(z);
    CVector bw = basis.scalar_values(w);

    CMatrix Uz(nforms, count), Uw(nforms, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index f = 0; f < nforms; ++f) {
            CVector seg = spec.vectors.col(i).segment(f * nscal, nscal);
            Uz(f, i) = bz.cwiseProduct(seg).sum();
            Uw(f, i) = bw.cwiseProduct(seg).sum();
        }
    }
    K.m = std::pow(2.0, -basis.n) * (Uz * Uw.adjoint());
    return K;
}

SpectralGap spectral_gap(const SpectralData& spec, double zero_tol) {
    if (spec.eigenvalues.size() == 0)
        throw std::invalid_argument("spectral_gap: empty spectrum");
    double mu_max = spec.eigenvalues[spec.eigenvalues.size() - 1];
    double tol = zero_tol * std::abs(mu_max);
    SpectralGap g;
    Eigen::Index i = 0;
    while (i < spec.eigenvalues.size() && spec.eigenvalues[i] <= tol) ++i;
    g.kernel_dim = static_cast<int>(i);
    if (i == spec.eigenvalues.size())
        throw std::runtime_error(
            "spectral_gap: degenerate spectrum (all eigenvalues below tolerance)");
    g.gap = spec.eigenvalues[i];
    return g;
}

}  // namespace bergman
