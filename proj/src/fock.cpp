#include "bergman/fock.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bergman {

static CVector monomial_values(const std::vector<MultiIndex>& mono, const Point& z) {
    CVector m(static_cast<Eigen::Index>(mono.size()));
    for (size_t a = 0; a < mono.size(); ++a) {
        Complex v = 1.0;
        for (int i = 0; i < mono[a].dim(); ++i)
            for (int p = 0; p < mono[a][i]; ++p) v *= z[i];
        m[static_cast<Eigen::Index>(a)] = v;
    }
    return m;
}

GramBasis monomial_gram(const WeightModel& weight, const MetricModel& metric, int k,
                        int degree_cap, int quad_order, double pivot_tol) {
    int n = weight.dim();
    for (int i = 0; i < n; ++i)
        if (weight.lambdas()[i] <= 0.0)
            throw std::invalid_argument(
                "monomial_gram: unsupported signature (lambda_i <= 0); use the Laplacian "
                "pipeline for q > 0 / mixed-signature weights");
    if (k < 1) throw std::invalid_argument("monomial_gram: k must be a positive integer");
    if (degree_cap < 0) throw std::invalid_argument("monomial_gram: negative degree cap");
    if (quad_order <= 0) quad_order = (n == 1) ? 64 : 24;

    GramBasis basis{n,
                    k,
                    degree_cap,
                    quad_order,
                    multi_indices_up_to(n, degree_cap),
                    CMatrix(),
                    CMatrix(),
                    {},
                    weight,
                    metric,
                    {}};

    std::vector<double> scales;
    for (int i = 0; i < n; ++i) {
        scales.push_back(double(k) * weight.lambdas()[i]);
        scales.push_back(double(k) * weight.lambdas()[i]);
    }
    QuadratureRule rule = tensor_gauss_rule(quad_order, scales);

    auto N = static_cast<Eigen::Index>(basis.monomials.size());
    CMatrix G = CMatrix::Zero(N, N);
    const double vol = std::pow(2.0, n);  // dV_{omega_0} = 2^n dm
    const Polynomial& pert = weight.perturbation();
    double min_exponent = 0.0;

    rule.for_each_node([&](const Point& z, double w) {
        double expo = pert.empty() ? 0.0 : -2.0 * k * pert.eval(z).real();
        min_exponent = std::min(min_exponent, expo);
        double f = w * vol * std::exp(expo) * metric.det_at(z);
        CVector m = monomial_values(basis.monomials, z);
        G.selfadjointView<Eigen::Lower>().rankUpdate(m.conjugate(), f);
    });
    G.triangularView<Eigen::StrictlyUpper>() = G.adjoint().triangularView<Eigen::StrictlyUpper>();
    basis.gram = G;

    if (min_exponent < -690.0) {
        std::ostringstream os;
        os << "quadrature underflow: exp(-2k*pert) reaches " << min_exponent
           << " in log at some node";
        basis.warnings.push_back(os.str());
    }

    auto orth = gram_orthonormalize(G, pivot_tol);
    basis.transform = orth.transform;
    basis.retained = orth.retained;
    return basis;
}

static CVector orthonormal_values(const GramBasis& basis, const Point& z) {
    CVector m = monomial_values(basis.monomials, z);
    return basis.transform.transpose() * m;
}

Complex bergman_kernel_trivialized(const GramBasis& basis, const Point& z, const Point& w) {
    CVector pz = orthonormal_values(basis, z);
    CVector pw = orthonormal_values(basis, w);
    double phi_w = basis.weight.value(w, double(basis.k));
    return pz.cwiseProduct(pw.conjugate()).sum() * std::exp(-2.0 * phi_w);
}

Complex localize_kernel(Complex trivialized, const WeightModel& weight, int k, const Point& z,
                        const Point& w) {
    if (trivialized == 0.0) return 0.0;
    double expo = -weight.value(z, double(k)) + weight.value(w, double(k));
    double mag = std::log(std::abs(trivialized)) + expo;
    double arg = std::arg(trivialized);
    return std::polar(std::exp(mag), arg);
}

Complex localized_kernel(const GramBasis& basis, const Point& z, const Point& w) {
    CVector pz = orthonormal_values(basis, z);
    CVector pw = orthonormal_values(basis, w);
    double phi_z = basis.weight.value(z, double(basis.k));
    double phi_w = basis.weight.value(w, double(basis.k));
    return pz.cwiseProduct(pw.conjugate()).sum() * std::exp(-phi_z - phi_w);
}

KernelValue gram_scaled_localized(const GramBasis& basis, const Point& z, const Point& w) {
    double root = std::sqrt(double(basis.k));
    KernelValue K(basis.n, 0);
    K.m(0, 0) = localized_kernel(basis, Point(z / root), Point(w / root)) *
                std::pow(double(basis.k), -basis.n);
    return K;
}

double trivialized_diagonal_origin(const GramBasis& basis) {
    Point origin = Point::Zero(basis.n);
    CVector p0 = orthonormal_values(basis, origin);
    return p0.squaredNorm();
}

}  // namespace bergman
