#include <doctest.h>

#include <random>

#include "bergman/geometry.hpp"

using namespace bergman;

namespace {

std::mt19937 rng(77123u);

Point rand_point(int n, double radius = 1.0) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Point z(n);
    for (int i = 0; i < n; ++i) z[i] = Complex(u(rng), u(rng));
    return z;
}

PolyTerm term(std::vector<int> a, std::vector<int> b, double c) {
    PolyTerm t;
    t.a = MultiIndex(std::move(a));
    t.b = MultiIndex(std::move(b));
    t.coeff = c;
    return t;
}

// |z|^4 = z^2 zbar^2 for n = 1
WeightModel quartic_weight(double lambda, double delta) {
    Polynomial p(1);
    p.terms.push_back(term({2}, {2}, delta));
    RVector lam(1);
    lam[0] = lambda;
    return WeightModel(lam, p);
}

// central finite differences of the weight in the underlying real coordinates
double fd_real(const WeightModel& w, Point z, int axis, double h) {
    Point zp = z, zm = z;
    int coord = axis / 2;
    Complex step = (axis % 2 == 0) ? Complex(h, 0.0) : Complex(0.0, h);
    zp[coord] += step;
    zm[coord] -= step;
    return (w.value(zp) - w.value(zm)) / (2.0 * h);
}

}  // namespace

TEST_CASE("weight evaluation and derivatives") {
    RVector lam(2);
    lam << 1.0, -2.0;
    WeightModel w = WeightModel::quadratic(lam);
    Point z(2);
    z << Complex(1.0), Complex(1.0);
    CHECK(w.value(z, 1.0) == doctest::Approx(-1.0));
    WeightJet j = w.eval(rand_point(2), 1.0);
    CHECK(j.hess_z_zbar(0, 0).real() == doctest::Approx(1.0));
    CHECK(j.hess_z_zbar(1, 1).real() == doctest::Approx(-2.0));

    WeightModel q = quartic_weight(1.0, 0.05);
    Point one(1);
    one[0] = 1.0;
    CHECK(q.value(one) == doctest::Approx(1.05));
}

TEST_CASE("derivatives match central finite differences") {
    WeightModel q = quartic_weight(1.0, 0.05);
    Polynomial mixed(2);
    mixed.terms.push_back(term({1, 1}, {1, 1}, 0.02));   // |z1 z2|^2... degree 4
    mixed.terms.push_back(term({2, 0}, {2, 0}, 0.01));
    RVector lam2(2);
    lam2 << 0.7, 1.3;
    WeightModel w2(lam2, mixed);

    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        for (const WeightModel& w : {q, w2}) {
            int n = w.dim();
            Point z = rand_point(n, 1.2);
            WeightJet jet = w.eval(z);
            for (int i = 0; i < n; ++i) {
                // d/dx = dz + dzbar ; d/dy = i (dz - dzbar)
                double dx = (jet.grad_z[i] + jet.grad_zbar[i]).real();
                double dy = (Complex(0.0, 1.0) * (jet.grad_z[i] - jet.grad_zbar[i])).real();
                double fx = fd_real(w, z, 2 * i, h);
                double fy = fd_real(w, z, 2 * i + 1, h);
                CHECK(dx == doctest::Approx(fx).epsilon(1e-6));
                CHECK(dy == doctest::Approx(fy).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("weight scaling") {
    RVector lam(1);
    lam[0] = 2.0;
    WeightModel w0 = WeightModel::quadratic(lam);
    WeightModel w0k = scaled_weight(w0, 16.0);
    for (int t = 0; t < 10; ++t) {
        Point z = rand_point(1, 2.0);
        CHECK(w0k.value(z) == doctest::Approx(w0.value(z)).epsilon(1e-15));
    }

    WeightModel q = quartic_weight(1.0, 0.05);
    WeightModel qk = scaled_weight(q, 16.0);
    CHECK(qk.perturbation().terms.size() == 1);
    CHECK(qk.perturbation().terms[0].coeff.real() == doctest::Approx(0.05 / 16.0));

    // phi_(k)(sqrt(k) z) = k phi(z) exactly
    for (int t = 0; t < 20; ++t) {
        Point z = rand_point(1, 1.5);
        double lhs = qk.value(Point(z * std::sqrt(16.0)));
        double rhs = 16.0 * q.value(z);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }

    // C^2-distance bound: sup over |z| <= 2 of |phi_(k) - phi_0| <= C (|z|^4 + 1) / k
    WeightModel base = WeightModel::quadratic(q.lambdas());
    double measured_C = 0.0;
    const double k = 16.0;
    for (int i = 0; i <= 40; ++i) {
        for (int j = 0; j <= 40; ++j) {
            Point z(1);
            z[0] = Complex(-2.0 + 0.1 * i, -2.0 + 0.1 * j);
            if (std::abs(z[0]) > 2.0) continue;
            double diff = std::abs(qk.value(z) - base.value(z));
            double weight_factor = (std::pow(std::abs(z[0]), 4) + 1.0) / k;
            measured_C = std::max(measured_C, diff / weight_factor);
        }
    }
    CHECK(measured_C <= 0.05);
    CHECK(measured_C >= 0.04);
}

TEST_CASE("metric scaling and positive definiteness") {
    MetricModel flat(2);
    CHECK(scaled_metric(flat, 4.0).flat());

    // h = I + eps Re(z1) E with E = e_{12} + e_{21}
    std::vector<std::tuple<int, int, PolyTerm>> entries;
    entries.emplace_back(1, 2, term({1, 0}, {0, 0}, 0.1));
    MetricModel m(2, entries);
    Point z(2);
    z << Complex(0.5), Complex(0.0);
    CMatrix h = m.eval(z);
    CHECK(h(0, 1).real() == doctest::Approx(0.05));
    CHECK(h(1, 0).real() == doctest::Approx(0.05));

    MetricModel mk = scaled_metric(m, 4.0);
    CMatrix hk = mk.eval(Point(z * 2.0));  // h_(k)(sqrt(k) z) = h(z)
    CHECK((hk - h).cwiseAbs().maxCoeff() < 1e-15);

    // PD preserved on the rescaled domain when PD on the original one
    for (int t = 0; t < 25; ++t) {
        Point p = rand_point(2, 2.0);         // |p| <= sqrt(k) * r0 with r0 = 1
        CHECK_NOTHROW(mk.eval(p));
    }
}

TEST_CASE("curvature data") {
    RVector lam(2);
    lam << 1.0, -1.0;
    WeightModel w = WeightModel::quadratic(lam);
    MetricModel flat(2);
    CurvatureData c = curvature_at(w, flat, Point::Zero(2));
    CHECK(c.eigenvalues[0] == doctest::Approx(-2.0));
    CHECK(c.eigenvalues[1] == doctest::Approx(2.0));

    // finite-difference Hessian oracle for the quartic weight at z = 1:
    // 4 phi / (dz dzbar) via real second differences
    WeightModel q = quartic_weight(1.0, 0.05);
    Point one(1);
    one[0] = 1.0;
    CurvatureData cq0 = curvature_at(q, MetricModel(1), Point::Zero(1));
    CHECK(cq0.eigenvalues[0] == doctest::Approx(2.0));
    CurvatureData cq1 = curvature_at(q, MetricModel(1), one);
    CHECK(cq1.eigenvalues[0] == doctest::Approx(2.4));
    {
        const double h = 1e-4;
        auto val = [&](double x, double y) {
            Point p(1);
            p[0] = Complex(1.0 + x, y);
            return q.value(p);
        };
        double dxx = (val(h, 0) - 2 * val(0, 0) + val(-h, 0)) / (h * h);
        double dyy = (val(0, h) - 2 * val(0, 0) + val(0, -h)) / (h * h);
        double hess = 0.25 * (dxx + dyy);  // d2/dz dzbar = (dxx + dyy)/4
        CHECK(cq1.eigenvalues[0] == doctest::Approx(2.0 * hess).epsilon(1e-6));
    }

    // quadratic weight: curvature independent of the point
    for (int t = 0; t < 100; ++t) {
        CurvatureData cr = curvature_at(w, flat, rand_point(2, 3.0));
        CHECK(std::abs(cr.eigenvalues[0] + 2.0) < 1e-12);
        CHECK(std::abs(cr.eigenvalues[1] - 2.0) < 1e-12);
    }
}

TEST_CASE("signature classification") {
    auto curv_of = [](std::vector<double> lam) {
        RVector v(static_cast<Eigen::Index>(lam.size()));
        for (size_t i = 0; i < lam.size(); ++i) v[static_cast<Eigen::Index>(i)] = lam[i];
        // quadratic weights need nonzero entries; build the data directly
        CurvatureData c;
        c.matrix = (2.0 * v).asDiagonal();
        RVector e = 2.0 * v;
        std::sort(e.data(), e.data() + e.size());
        c.eigenvalues = e;
        return c;
    };
    CHECK(signature(curv_of({1.0, 1.0})).in_Mq(0));
    CHECK(signature(curv_of({-1.0, 2.0})).in_Mq(1));
    Signature degen = signature(curv_of({0.0, 1.0}), 1e-9);
    CHECK(degen.degenerate);
    for (int q = 0; q <= 2; ++q) CHECK_FALSE(degen.in_Mq(q));

    // scaling invariance of the (negatives, positives) counts
    Signature a = signature(curv_of({-0.3, 0.7, 1.4}));
    Signature b = signature(curv_of({-0.3 * 50, 0.7 * 50, 1.4 * 50}));
    CHECK(a.negatives == b.negatives);
    CHECK(a.positives == b.positives);
}

TEST_CASE("gap classification") {
    std::map<double, double> constant_gaps;
    for (double k : {4.0, 16.0, 64.0}) constant_gaps[k] = 0.5;
    GapCriterion poly;
    poly.kind = GapCriterion::Kind::polynomial;
    poly.d = 1.0;
    poly.C = 10.0;
    CHECK(classify_gap(constant_gaps, poly).pass);

    std::map<double, double> exp_small;
    for (double k : {4.0, 16.0, 64.0, 256.0}) exp_small[k] = std::exp(-k);
    GapCriterion poly2;
    poly2.d = 1.0;
    poly2.C = 100.0;
    CHECK_FALSE(classify_gap(exp_small, poly2).pass);

    // gap ~ 2k passes the d = 0 polynomial rate
    std::map<double, double> landau;
    for (double k : {4.0, 16.0, 64.0}) landau[k] = 2.0 * k;
    GapCriterion d0;
    d0.d = 0.0;
    d0.C = 1.0;
    CHECK(classify_gap(landau, d0).pass);

    // synthetic exponential-rate sample
    std::map<double, double> exp_rate;
    for (double k : {4.0, 16.0, 64.0, 256.0}) exp_rate[k] = 2.0 * std::exp(-std::sqrt(k));
    GapCriterion ec;
    ec.kind = GapCriterion::Kind::exponential;
    ec.c = 0.9;
    ec.lambda_min = 1.0;
    ec.C = 1.0;
    CHECK(classify_gap(exp_rate, ec).pass);

    CHECK_THROWS_AS(classify_gap({}, poly), std::invalid_argument);
}

TEST_CASE("weight model validation") {
    RVector lam(1);
    lam[0] = 1.0;
    Polynomial bad(1);
    bad.terms.push_back(term({1}, {1}, 0.1));  // degree 2: complex Hessian at 0 nonzero
    CHECK_THROWS_AS(WeightModel(lam, bad), std::invalid_argument);

    Polynomial cubic(1);  // Re(z^3): needs a finite radius
    cubic.terms.push_back(term({3}, {0}, 0.5));
    cubic.terms.push_back(term({0}, {3}, 0.5));
    CHECK_THROWS_AS(WeightModel(lam, cubic), std::invalid_argument);
    WeightModel with_radius(lam, cubic, 0.5);
    CHECK(with_radius.vanishing_order() == 3);
    CHECK_THROWS_AS(with_radius.value(Point::Ones(1)), std::domain_error);

    Polynomial imag(1);  // i |z|^4 is not real-valued
    imag.terms.push_back(term({2}, {2}, 1.0));
    imag.terms[0].coeff = Complex(0.0, 1.0);
    CHECK_THROWS_AS(WeightModel(lam, imag), std::invalid_argument);
}

TEST_CASE("curvature operator satisfies its defining relation") {
    // <Theta-dot v1 | v2>_w = Theta(v1 ^ conj v2) with Theta-dot = 2 (Phi H^{-1})^T;
    // the returned Hermitian representative must carry the same eigenvalues
    Polynomial pert(2);
    PolyTerm t;
    t.a = MultiIndex({1, 1});
    t.b = MultiIndex({1, 1});
    t.coeff = 0.03;
    pert.terms.push_back(t);
    RVector lam2(2);
    lam2 << 0.8, -1.4;
    WeightModel w(lam2, pert);

    std::vector<std::tuple<int, int, PolyTerm>> entries;
    PolyTerm mt;
    mt.a = MultiIndex({1, 0});
    mt.b = MultiIndex({0, 0});
    mt.coeff = Complex(0.05, 0.02);
    entries.emplace_back(1, 2, mt);
    MetricModel m(2, entries);

    for (int trial = 0; trial < 10; ++trial) {
        Point z = rand_point(2, 0.8);
        CMatrix H = m.eval(z);
        CMatrix Phi = w.eval(z).hess_z_zbar;
        CMatrix theta_op = 2.0 * (Phi * H.inverse()).transpose();
        Eigen::ComplexEigenSolver<CMatrix> ges(theta_op);
        RVector expect(2);
        expect << ges.eigenvalues()[0].real(), ges.eigenvalues()[1].real();
        std::sort(expect.data(), expect.data() + 2);
        CHECK(ges.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-10);

        CurvatureData c = curvature_at(w, m, z);
        CHECK(c.eigenvalues[0] == doctest::Approx(expect[0]).epsilon(1e-9));
        CHECK(c.eigenvalues[1] == doctest::Approx(expect[1]).epsilon(1e-9));
        // defining relation against random tangent vectors
        CMatrix hinv_half_check = c.matrix;  // Hermitian to 1e-12
        CHECK((hinv_half_check - hinv_half_check.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}
