#include "bergman/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace bergman {

QuadratureAxis gauss_axis(int order, double scale) {
    if (order < 1) throw std::invalid_argument("gauss_axis: order must be >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("gauss_axis: scale must be positive");

    // Hermite weight exp(-t^2): Jacobi matrix with off-diagonals sqrt(i/2)
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) {
        double b = std::sqrt(0.5 * i);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mass = std::sqrt(M_PI);  // integral of exp(-t^2)

    QuadratureAxis ax;
    ax.scale = scale;
    ax.nodes.resize(static_cast<size_t>(order));
    ax.weights.resize(static_cast<size_t>(order));
    double stretch = 1.0 / std::sqrt(2.0 * scale);  // t = sqrt(2 s) x
    for (int i = 0; i < order; ++i) {
        double w = mass * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        ax.nodes[static_cast<size_t>(i)] = es.eigenvalues()[i] * stretch;
        ax.weights[static_cast<size_t>(i)] = w * stretch;
    }
    return ax;
}

QuadratureRule tensor_gauss_rule(int order, const std::vector<double>& scales_per_axis) {
    QuadratureRule r;
    r.order = order;
    for (double s : scales_per_axis) r.axes.push_back(gauss_axis(order, s));
    return r;
}

std::int64_t QuadratureRule::node_count() const {
    std::int64_t c = 1;
    for (size_t i = 0; i < axes.size(); ++i) c *= order;
    return c;
}

double QuadratureRule::total_mass() const {
    double m = 1.0;
    for (const auto& ax : axes) {
        double s = 0.0;
        for (double w : ax.weights) s += w;
        m *= s;
    }
    return m;
}

void QuadratureRule::for_each_node(
    const std::function<void(const Point&, double)>& visit) const {
    int na = n_axes();
    if (na % 2 != 0)
        throw std::invalid_argument("QuadratureRule: need an even number of real axes");
    int n = na / 2;
    std::vector<int> idx(static_cast<size_t>(na), 0);
    Point z(n);
    for (;;) {
        double w = 1.0;
        for (int a = 0; a < na; ++a) w *= axes[static_cast<size_t>(a)].weights[static_cast<size_t>(idx[static_cast<size_t>(a)])];
        for (int j = 0; j < n; ++j)
            z[j] = Complex(axes[static_cast<size_t>(2 * j)].nodes[static_cast<size_t>(idx[static_cast<size_t>(2 * j)])],
                           axes[static_cast<size_t>(2 * j + 1)].nodes[static_cast<size_t>(idx[static_cast<size_t>(2 * j + 1)])]);
        visit(z, w);
        int a = 0;
        while (a < na) {
            if (++idx[static_cast<size_t>(a)] < order) break;
            idx[static_cast<size_t>(a)] = 0;
            ++a;
        }
        if (a == na) break;
    }
}

SpectralData hermitian_eigh(const CMatrix& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("hermitian_eigh: matrix not square");
    if (!A.allFinite()) throw std::invalid_argument("hermitian_eigh: non-finite entries");
    double nrm = A.cwiseAbs().maxCoeff();
    if (nrm > 0.0 && (A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * nrm)
        throw std::invalid_argument("hermitian_eigh: matrix not Hermitian");
    CMatrix H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eigh: solver failed");
    SpectralData s;
    s.eigenvalues = es.eigenvalues();
    s.vectors = es.eigenvectors();
    s.basis_dim = static_cast<int>(A.rows());
    return s;
}

GramOrthonormalization gram_orthonormalize(const CMatrix& G, double rel_tol) {
    Eigen::Index N = G.rows();
    if (G.cols() != N) throw std::invalid_argument("gram_orthonormalize: matrix not square");
    double nrm = N ? G.cwiseAbs().maxCoeff() : 0.0;
    if (N && (G - G.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(nrm, 1.0))
        throw std::invalid_argument("gram_orthonormalize: matrix not Hermitian");

    // Unit-diagonal prescaling first: monomial Grams carry diagonals spanning
    // many orders of magnitude, and the relative drop rule must not discard
    // small-norm basis elements that are perfectly independent.
    RVector scale(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        double d = G(i, i).real();
        scale[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
    }
    CMatrix A = 0.5 * (G + G.adjoint());
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) A(i, j) *= scale[i] * scale[j];

    // pivoted Cholesky, largest remaining diagonal first
    std::vector<int> perm(static_cast<size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) perm[static_cast<size_t>(i)] = static_cast<int>(i);
    double dmax0 = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) dmax0 = std::max(dmax0, A(i, i).real());
    double drop = rel_tol * std::max(dmax0, 0.0);
    double indef = -1e-12 * std::max(A.cwiseAbs().maxCoeff(), 1.0);

    CMatrix L = CMatrix::Zero(N, N);
    Eigen::Index r = 0;
    for (; r < N; ++r) {
        // select pivot
        Eigen::Index p = r;
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = r; i < N; ++i) {
            double d = A(i, i).real();
            if (d > best) {
                best = d;
                p = i;
            }
        }
        if (best < indef)
            throw std::runtime_error("gram_orthonormalize: matrix indefinite beyond tolerance");
        if (best <= drop) break;
        if (p != r) {
            A.row(p).swap(A.row(r));
            A.col(p).swap(A.col(r));
            L.row(p).swap(L.row(r));
            std::swap(perm[static_cast<size_t>(p)], perm[static_cast<size_t>(r)]);
        }
        double piv = std::sqrt(A(r, r).real());
        L(r, r) = piv;
        for (Eigen::Index i = r + 1; i < N; ++i) L(i, r) = A(i, r) / piv;
        for (Eigen::Index j = r + 1; j < N; ++j)
            for (Eigen::Index i = r + 1; i < N; ++i)
                A(i, j) -= L(i, r) * std::conj(L(j, r));
    }

    // columns of T solve G t_i = orthonormal directions: with P^T G P = L L^H
    // (on the retained block), T = P [L^{-H} restricted]; then T^H G T = I.
    GramOrthonormalization out;
    out.retained.assign(perm.begin(), perm.begin() + r);
    CMatrix Lr = L.topLeftCorner(r, r);
    CMatrix Linv = Lr.triangularView<Eigen::Lower>().solve(CMatrix::Identity(r, r));
    CMatrix T = CMatrix::Zero(N, r);
    // rows of the retained block in permuted order: original index perm[i];
    // undo the diagonal prescaling on the way out
    for (Eigen::Index i = 0; i < r; ++i)
        T.row(perm[static_cast<size_t>(i)]) =
            scale[perm[static_cast<size_t>(i)]] * Linv.col(i).adjoint();
    out.transform = T;
    return out;
}

}  // namespace bergman
