#include <doctest.h>

#include <random>

#include "bergman/laplacian.hpp"

using namespace bergman;

namespace {

std::mt19937 rng(46692u);

Point rand_point(int n, double radius = 1.0) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Point z(n);
    for (int i = 0; i < n; ++i) z[i] = Complex(u(rng), u(rng));
    return z;
}

RVector lam(std::initializer_list<double> v) {
    RVector r(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) r[i++] = x;
    return r;
}

WeightModel quartic_weight(double lambda, double delta) {
    Polynomial p(1);
    PolyTerm t;
    t.a = MultiIndex({2});
    t.b = MultiIndex({2});
    t.coeff = delta;
    p.terms.push_back(t);
    return WeightModel(lam({lambda}), p);
}

/// scalar-basis coefficients of P(z,zbar) * exp(-sum |lambda_i| |z_i|^2),
/// projected by a quadrature exact for the polynomial part
CVector project_scalar(const OscillatorBasis& basis, const Polynomial& P) {
    std::vector<double> scales;
    for (int i = 0; i < basis.n; ++i) {
        scales.push_back(std::abs(basis.lambdas[i]));
        scales.push_back(std::abs(basis.lambdas[i]));
    }
    int order = basis.levels + P.degree() + 2;
    QuadratureRule rule = tensor_gauss_rule(order, scales);
    CVector coef = CVector::Zero(basis.scalar_dim());
    rule.for_each_node([&](const Point& z, double w) {
        // both Gaussians live in the rule weight; the basis values carry one,
        // so divide it back out and keep the bare polynomial on the other side
        double env = 0.0;
        for (int i = 0; i < basis.n; ++i) env += std::abs(basis.lambdas[i]) * std::norm(z[i]);
        CVector vals = basis.scalar_values(z) * std::exp(env);
        coef += w * P.eval(z) * vals.conjugate();
    });
    return coef;
}

Polynomial monom(int n, std::vector<int> a, std::vector<int> b, Complex c = 1.0) {
    Polynomial p(n);
    PolyTerm t;
    t.a = MultiIndex(std::move(a));
    t.b = MultiIndex(std::move(b));
    t.coeff = c;
    p.terms.push_back(t);
    return p;
}

/// exact 2-jet of P(z, zbar) * exp(-sum c_i |z_i|^2) built from the
/// polynomial derivative algebra (independent of the Galerkin machinery)
JetFunction poly_gauss_jet(const Polynomial& P, const RVector& c) {
    int n = P.n;
    return [P, c, n](const Point& z) {
        ScalarJet2 j;
        double env = 0.0;
        for (int i = 0; i < n; ++i) env += c[i] * std::norm(z[i]);
        double e = std::exp(-env);
        j.value = P.eval(z) * e;
        j.d_z = CVector::Zero(n);
        j.d_zbar = CVector::Zero(n);
        j.d_zbar_z = CVector::Zero(n);
        for (int i = 0; i < n; ++i) {
            Polynomial Pz = P.d_z(i + 1);
            Polynomial Pzb = P.d_zbar(i + 1);
            Complex zi = z[i], zbi = std::conj(z[i]);
            j.d_z[i] = (Pz.eval(z) - c[i] * zbi * P.eval(z)) * e;
            j.d_zbar[i] = (Pzb.eval(z) - c[i] * zi * P.eval(z)) * e;
            j.d_zbar_z[i] = (Pz.d_zbar(i + 1).eval(z) - c[i] * P.eval(z) -
                             c[i] * zbi * Pzb.eval(z) - c[i] * zi * Pz.eval(z) +
                             c[i] * c[i] * std::norm(z[i]) * P.eval(z)) *
                            e;
        }
        return j;
    };
}

/// general flat-metric pointwise Laplacian, written out from the composition
/// of the localized factors; derivatives of u supplied by the caller, weight
/// derivatives exact
FormValue box_pointwise(const WeightModel& w, double k, const JetFunction& f, const FormIndex& I,
                        const Point& z) {
    int n = w.dim();
    WeightJet pj = w.eval(z, k);
    ScalarJet2 j = f(z);
    FormValue out(n, I.degree());
    Complex diag = 0.0;
    double constant = 0.0;
    for (int i = 0; i < n; ++i) {
        diag += -j.d_zbar_z[i] + pj.grad_z[i] * j.d_zbar[i] - pj.grad_zbar[i] * j.d_z[i];
        constant += std::norm(pj.grad_zbar[i]) - pj.hess_z_zbar(i, i).real();
    }
    out.at(I) += diag + constant * j.value;
    // 2 sum_{i,j} phi_{z_i zbar_j} f dzbar^j ^ (dzbar^i ^*) dzbar^I
    for (int i = 1; i <= n; ++i) {
        FormIndex drop;
        int s1;
        if (!flat_interior_sign(I, i, drop, s1)) continue;
        for (int jj = 1; jj <= n; ++jj) {
            FormIndex J;
            int s2;
            if (!wedge_insert_sign(drop, jj, J, s2)) continue;
            out.at(J) += 2.0 * pj.hess_z_zbar(i - 1, jj - 1) * double(s1 * s2) * j.value;
        }
    }
    return out;
}

/// numeric 2-jet by central differences in the real coordinates
JetFunction fd_jet(const std::function<Complex(const Point&)>& f, double h = 1e-4) {
    return [f, h](const Point& z) {
        int n = static_cast<int>(z.size());
        ScalarJet2 j;
        j.value = f(z);
        j.d_z = CVector::Zero(n);
        j.d_zbar = CVector::Zero(n);
        j.d_zbar_z = CVector::Zero(n);
        for (int i = 0; i < n; ++i) {
            Point xp = z, xm = z, yp = z, ym = z;
            xp[i] += h;
            xm[i] -= h;
            yp[i] += Complex(0, h);
            ym[i] -= Complex(0, h);
            Complex fx = (f(xp) - f(xm)) / (2 * h);
            Complex fy = (f(yp) - f(ym)) / (2 * h);
            j.d_z[i] = 0.5 * (fx - Complex(0, 1) * fy);
            j.d_zbar[i] = 0.5 * (fx + Complex(0, 1) * fy);
            Complex fxx = (f(xp) - 2.0 * f(z) + f(xm)) / (h * h);
            Complex fyy = (f(yp) - 2.0 * f(z) + f(ym)) / (h * h);
            j.d_zbar_z[i] = 0.25 * (fxx + fyy);
        }
        return j;
    };
}

}  // namespace

TEST_CASE("dbar on explicit Gaussians") {
    WeightModel w = WeightModel::quadratic(lam({1.0}));
    OscillatorBasis b = oscillator_basis(w, 0, 12);
    AssembledOperator D = assemble_dbar(b, w, 1);

    // dbar_s (zbar e^{-|z|^2}) = e^{-|z|^2} dzbar
    CVector u = project_scalar(b, monom(1, {0}, {1}));
    CVector expect = project_scalar(D.codomain, monom(1, {0}, {0}));
    CVector got = D.matrix * u;
    CHECK((got - expect).norm() < 1e-10 * expect.norm());

    // holomorphic x Gaussian lies in the kernel
    for (int m = 0; m <= 10; ++m) {
        CVector h = project_scalar(b, monom(1, {m}, {0}));
        CHECK((D.matrix * h).norm() <= 1e-8 * h.norm());
    }

    CHECK_THROWS_AS(assemble_dbar(oscillator_basis(w, 1, 6), w, 1), std::invalid_argument);
}

TEST_CASE("dbar and its adjoint are adjoint") {
    WeightModel w = quartic_weight(1.0, 0.05);
    for (int q : {0, 1}) {
        OscillatorBasis bq = oscillator_basis(w, q, 8);
        if (q == 1) {
            AssembledOperator E = assemble_dbar_adjoint(bq, w, 4);
            OscillatorBasis blo = oscillator_basis(w, 0, 8);
            AssembledOperator D = assemble_dbar(blo, w, 4);
            REQUIRE(D.codomain.levels == E.codomain.levels);
            for (int t = 0; t < 100; ++t) {
                CVector u = CVector::Random(blo.dim());
                CVector v = CVector::Random(bq.dim());
                // <dbar u, v> = <u, dbar* v> in L^2(dm)
                CVector Du = D.matrix * u;
                CVector vb = embed_coefficients(bq, D.codomain, v);
                CVector Ev = E.matrix * v;
                CVector ub = embed_coefficients(blo, E.codomain, u);
                Complex lhs = Du.dot(vb);   // conj(Du) . vb
                Complex rhs = ub.dot(Ev);
                CHECK(std::abs(std::conj(lhs) - std::conj(rhs)) <=
                      1e-9 * (1.0 + std::abs(lhs)));
            }
        } else {
            AssembledOperator E0 = assemble_dbar_adjoint(bq, w, 4);
            CHECK(E0.matrix.rows() == 0);  // zero operator on functions
        }
    }
}

TEST_CASE("Rayleigh quotient of the Gaussian one-form through the adjoint") {
    // lambda > 0 in degree one: dbar*_s(e^{-lambda|z|^2} dzbar) = 2 lambda zbar e^{...},
    // so the Rayleigh quotient of the Gaussian is exactly 2 lambda
    double lambda = 1.0;
    WeightModel w = WeightModel::quadratic(lam({lambda}));
    OscillatorBasis b = oscillator_basis(w, 1, 14);
    AssembledOperator E = assemble_dbar_adjoint(b, w, 1);
    CVector u = CVector::Zero(b.dim());
    u.head(b.scalar_dim()) = project_scalar(b, monom(1, {0}, {0}));
    double rq = (E.matrix * u).squaredNorm() / u.squaredNorm();
    CHECK(rq == doctest::Approx(2.0 * lambda).epsilon(1e-10));
}

TEST_CASE("model Landau spectrum, q = 0") {
    WeightModel w = WeightModel::quadratic(lam({1.0}));
    OscillatorBasis b = oscillator_basis(w, 0, 24);
    AssembledOperator box = assemble_laplacian(b, w, 1);
    SpectralData s = laplacian_spectrum(box);

    CHECK(std::abs(s.eigenvalues[0]) < 1e-8);
    SpectralGap g = spectral_gap(s, 1e-7);
    CHECK(g.kernel_dim >= 10);   // truncation-limited zero modes z^a e^{-|z|^2}
    CHECK(g.kernel_dim == 24);   // exactly the representable |a| <= 23
    CHECK(g.gap == doctest::Approx(2.0).epsilon(1e-6));

    // next Landau level appears at 4
    double next = 0.0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
        if (s.eigenvalues[i] > 2.5) {
            next = s.eigenvalues[i];
            break;
        }
    CHECK(next == doctest::Approx(4.0).epsilon(1e-6));

    // PSD and Hermitian
    CMatrix A = box.dense();
    CHECK((A - A.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * A.cwiseAbs().maxCoeff());
    CHECK(s.eigenvalues.minCoeff() >= -1e-9 * s.eigenvalues.maxCoeff());
}

TEST_CASE("model spectrum in degree one") {
    // wrong signature: lambda = +1, q = 1 has no zero modes, bottom at 2
    WeightModel wp = WeightModel::quadratic(lam({1.0}));
    OscillatorBasis bp = oscillator_basis(wp, 1, 24);
    SpectralData sp = laplacian_spectrum(assemble_laplacian(bp, wp, 1));
    SpectralGap gp = spectral_gap(sp, 1e-7);
    CHECK(gp.kernel_dim == 0);
    CHECK(sp.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-6));

    // matching signature: lambda = -1, q = 1 keeps the Gaussian zero mode
    WeightModel wm = WeightModel::quadratic(lam({-1.0}));
    OscillatorBasis bm = oscillator_basis(wm, 1, 24);
    SpectralData sm = laplacian_spectrum(assemble_laplacian(bm, wm, 1));
    CHECK(std::abs(sm.eigenvalues[0]) < 1e-10);
    // the zero cluster is degenerate, so test the overlap of Psi_0 with the
    // whole cluster: Psi_0 = (1/sqrt 2) chi_0 chi_0 dzbar is basis vector 0
    SpectralGap gm = spectral_gap(sm, 1e-7);
    double overlap2 = 0.0;
    for (int i = 0; i < gm.kernel_dim; ++i) overlap2 += std::norm(sm.vectors(0, i));
    CHECK(overlap2 >= 1.0 - 1e-8);
}

TEST_CASE("zero-mode count matches the signature") {
    for (double l : {1.0, -1.0}) {
        WeightModel w = WeightModel::quadratic(lam({l}));
        for (int q : {0, 1}) {
            OscillatorBasis b = oscillator_basis(w, q, 10);
            SpectralData s = laplacian_spectrum(assemble_laplacian(b, w, 1));
            SpectralGap g = spectral_gap(s, 1e-7);
            bool expect_modes = (q == (l < 0 ? 1 : 0));
            CHECK((g.kernel_dim > 0) == expect_modes);
        }
    }
    // n = 2 mixed signature: modes exactly in degree 1 with the
    // truncation-limited count #{alpha : |alpha| <= M - 1}
    WeightModel w2 = WeightModel::quadratic(lam({-1.0, 3.0}));
    for (int q : {0, 1, 2}) {
        OscillatorBasis b = oscillator_basis(w2, q, 5);
        SpectralData s = laplacian_spectrum(assemble_laplacian(b, w2, 1));
        SpectralGap g = spectral_gap(s, 1e-7);
        if (q == 1)
            CHECK(g.kernel_dim == 15);  // C(4 + 2, 2)
        else
            CHECK(g.kernel_dim == 0);
    }
}

TEST_CASE("block diagonality for the quadratic weight") {
    WeightModel w = WeightModel::quadratic(lam({1.0, 2.0}));
    OscillatorBasis b = oscillator_basis(w, 1, 4);
    AssembledOperator box = assemble_laplacian(b, w, 1);
    CMatrix A = box.dense();
    long ns = b.scalar_dim();
    double off = A.block(0, ns, ns, ns).cwiseAbs().maxCoeff();
    double off2 = A.block(ns, 0, ns, ns).cwiseAbs().maxCoeff();
    double nrm = A.cwiseAbs().maxCoeff();
    CHECK(off <= 1e-9 * nrm);
    CHECK(off2 <= 1e-9 * nrm);
}

TEST_CASE("complex structure of the factors") {
    for (const WeightModel& w :
         {WeightModel::quadratic(lam({1.0})), quartic_weight(1.0, 0.05)}) {
        int k = 4;
        OscillatorBasis b0 = oscillator_basis(w, 0, 10);
        AssembledOperator D = assemble_dbar(b0, w, k);
        // box = D^H D + E^H E as a matrix identity
        OscillatorBasis b1 = oscillator_basis(w, 1, 10);
        AssembledOperator E1 = assemble_dbar_adjoint(b1, w, k);
        AssembledOperator box0 = assemble_laplacian(b0, w, k);
        CMatrix lhs0 = box0.dense();
        CMatrix rhs0 = D.dense().adjoint() * D.dense();
        CHECK((lhs0 - rhs0).cwiseAbs().maxCoeff() <= 1e-9 * lhs0.cwiseAbs().maxCoeff());
        AssembledOperator box1 = assemble_laplacian(b1, w, k);
        CMatrix lhs1 = box1.dense();
        CMatrix rhs1 = E1.dense().adjoint() * E1.dense();  // n = 1: no dbar out of q = 1
        CHECK((lhs1 - rhs1).cwiseAbs().maxCoeff() <= 1e-9 * lhs1.cwiseAbs().maxCoeff());

        // dbar o dbar = 0 through the enlarged space (n = 2 for a nonzero target)
        RVector two = lam({1.0, 2.0});
        Polynomial pert2(2);
        if (!w.perturbation().empty()) {
            PolyTerm t;
            t.a = MultiIndex({2, 0});
            t.b = MultiIndex({2, 0});
            t.coeff = 0.05;
            pert2.terms.push_back(t);
        }
        WeightModel w2(two, pert2);
        OscillatorBasis c0 = oscillator_basis(w2, 0, 6);
        AssembledOperator D0 = assemble_dbar(c0, w2, k);
        AssembledOperator D1 = assemble_dbar(D0.codomain, w2, k);
        SparseC comp = D1.matrix * D0.matrix;
        double nrm = D0.dense().cwiseAbs().maxCoeff() * D1.dense().cwiseAbs().maxCoeff();
        CHECK(CMatrix(comp).cwiseAbs().maxCoeff() <= 1e-9 * nrm);
    }
}

TEST_CASE("Galerkin matches the diagonal-action oracle, n = 2 mixed signature") {
    WeightModel w = WeightModel::quadratic(lam({-1.0, 3.0}));
    ModelSpec spec(w.lambdas());
    RVector env(2);
    env << 1.0, 3.0;
    int M = 7;
    for (int q : {0, 1}) {
        OscillatorBasis b = oscillator_basis(w, q, M);
        AssembledOperator box = assemble_laplacian(b, w, 1);
        for (const auto& I : b.forms) {
            // f = z1 zbar2 e^{-(|z1|^2 + 3 |z2|^2)}: degree small enough that
            // box f stays inside the truncation
            Polynomial P = monom(2, {1, 0}, {0, 1});
            CVector coef = CVector::Zero(b.dim());
            coef.segment(form_index_rank(2, I) * b.scalar_dim(), b.scalar_dim()) =
                project_scalar(b, P);
            CVector image = box.dense() * coef;
            JetFunction jet = poly_gauss_jet(P, env);
            for (int t = 0; t < 10; ++t) {
                Point z = rand_point(2, 1.0);
                CVector bz = b.scalar_values(z);
                // Galerkin image evaluated at z, component along dzbar^I etc.
                Complex oracle = model_laplacian_apply(spec, jet, I, z);
                for (const auto& J : b.forms) {
                    Complex got = bz.cwiseProduct(image.segment(
                                                      form_index_rank(2, J) * b.scalar_dim(),
                                                      b.scalar_dim()))
                                      .sum();
                    if (J == I)
                        CHECK(std::abs(got - oracle) < 1e-9);
                    else
                        CHECK(std::abs(got) < 1e-9);  // no coupling between form indices
                }
            }
        }
    }
}

TEST_CASE("rescale relation via finite differences") {
    WeightModel q = quartic_weight(1.0, 0.05);
    auto test_fn = [](const Point& z) {
        return (1.0 + z[0] + std::conj(z[0])) * std::exp(-std::norm(z[0]));
    };
    for (int k : {4, 16}) {
        WeightModel scaled = scaled_weight(q, double(k));
        for (int t = 0; t < 5; ++t) {
            Point z = rand_point(1, 0.7);
            Point zk = z * std::sqrt(double(k));
            // LHS: scaled operator applied to u, evaluated at sqrt(k) z
            FormValue lhs =
                box_pointwise(scaled, 1.0, fd_jet(test_fn), FormIndex(std::vector<int>{}), zk);
            // RHS: (1/k) unscaled operator applied to u(sqrt(k) .), at z
            auto dilated = [&](const Point& p) { return test_fn(Point(p * std::sqrt(double(k)))); };
            FormValue rhs =
                box_pointwise(q, double(k), fd_jet(dilated), FormIndex(std::vector<int>{}), z);
            CHECK(std::abs(lhs.coeff[0] - rhs.coeff[0] / double(k)) < 1e-5);
        }
    }
}

TEST_CASE("spectral projection kernels") {
    WeightModel w = WeightModel::quadratic(lam({1.0}));
    OscillatorBasis b = oscillator_basis(w, 0, 20);
    SpectralData s = laplacian_spectrum(assemble_laplacian(b, w, 1));

    // below the gap: only zero modes; at the origin only alpha = 0 survives
    KernelValue K = spectral_projection_kernel(s, b, 0.5, Point::Zero(1), Point::Zero(1));
    CHECK(K.m(0, 0).real() == doctest::Approx(1.0 / M_PI).epsilon(1e-8));
    CHECK(std::abs(K.m(0, 0).imag()) < 1e-12);

    // threshold above everything: identity at coefficient level
    CMatrix P = spectral_projection_matrix(s, s.eigenvalues.maxCoeff() + 1.0);
    CHECK((P - CMatrix::Identity(P.rows(), P.cols())).cwiseAbs().maxCoeff() < 1e-10);

    // wrong signature inside the gap: empty kernel
    OscillatorBasis b1 = oscillator_basis(w, 1, 16);
    SpectralData s1 = laplacian_spectrum(assemble_laplacian(b1, w, 1));
    for (int t = 0; t < 5; ++t) {
        Point z = rand_point(1, 1.5), v = rand_point(1, 1.5);
        KernelValue K1 = spectral_projection_kernel(s1, b1, 1.0, z, v);
        CHECK(K1.norm_inf() == 0.0);
    }

    // nested thresholds give nested projections
    CMatrix Plo = spectral_projection_matrix(s, 0.5);
    CMatrix Phi = spectral_projection_matrix(s, 2.5);
    SpectralData diff = hermitian_eigh(Phi - Plo);
    CHECK(diff.eigenvalues.minCoeff() >= -1e-12);

    // diagonal kernel values are Hermitian PSD
    for (int t = 0; t < 5; ++t) {
        Point z = rand_point(1, 1.5);
        KernelValue Kd = spectral_projection_kernel(s, b, 0.5, z, z);
        CHECK(Kd.m(0, 0).real() >= 0.0);
    }

    // spectral gap bookkeeping on a synthetic identity spectrum
    SpectralData ident = hermitian_eigh(CMatrix::Identity(6, 6));
    SpectralGap gi = spectral_gap(ident, 1e-7);
    CHECK(gi.kernel_dim == 0);
    CHECK(gi.gap == doctest::Approx(1.0));
}

TEST_CASE("diagonal spectral kernel values are Hermitian PSD") {
    WeightModel w2 = WeightModel::quadratic(lam({-1.0, 3.0}));
    OscillatorBasis b = oscillator_basis(w2, 1, 6);
    SpectralData s = laplacian_spectrum(assemble_laplacian(b, w2, 1));
    for (int t = 0; t < 10; ++t) {
        Point z = rand_point(2, 1.2);
        KernelValue K = spectral_projection_kernel(s, b, 0.5, z, z);
        CHECK((K.m - K.m.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        SpectralData eig = hermitian_eigh(K.m);
        CHECK(eig.eigenvalues.minCoeff() >= -1e-12);
    }
}

TEST_CASE("spectral kernel below the gap equals the truncated model series") {
    // the zero cluster of the model operator spans exactly the modes with
    // |alpha| <= M - 1, so the projection kernel must coincide with the
    // series partial sum at that cutoff
    int M = 12;
    WeightModel w = WeightModel::quadratic(lam({-1.0}));
    ModelSpec spec(w.lambdas());
    OscillatorBasis b = oscillator_basis(w, 1, M);
    SpectralData s = laplacian_spectrum(assemble_laplacian(b, w, 1));
    for (int t = 0; t < 20; ++t) {
        Point z = rand_point(1, 1.4), v = rand_point(1, 1.4);
        KernelValue got = spectral_projection_kernel(s, b, 0.5, z, v);
        KernelValue expect = model_kernel_series(spec, z, v, M - 1);
        CHECK((got - expect).norm_inf() < 1e-10);
    }
}
