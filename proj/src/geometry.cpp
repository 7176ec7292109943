#include "bergman/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bergman {

static Complex ipow(Complex z, int p) {
    Complex r = 1.0;
    for (int i = 0; i < p; ++i) r *= z;
    return r;
}

Complex PolyTerm::eval(const Point& z) const {
    Complex r = coeff;
    for (int i = 0; i < a.dim(); ++i) {
        r *= ipow(z[i], a[i]);
        r *= ipow(std::conj(z[i]), b[i]);
    }
    return r;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& t : terms) d = std::max(d, t.total_degree());
    return d;
}

Complex Polynomial::eval(const Point& z) const {
    Complex s = 0.0;
    for (const auto& t : terms) s += t.eval(z);
    return s;
}

Polynomial Polynomial::d_z(int i) const {
    Polynomial r(n);
    for (const auto& t : terms) {
        int e = t.a[i - 1];
        if (e == 0) continue;
        PolyTerm d = t;
        d.coeff *= double(e);
        d.a.exponents[static_cast<size_t>(i - 1)] -= 1;
        r.terms.push_back(std::move(d));
    }
    return r;
}

Polynomial Polynomial::d_zbar(int i) const {
    Polynomial r(n);
    for (const auto& t : terms) {
        int e = t.b[i - 1];
        if (e == 0) continue;
        PolyTerm d = t;
        d.coeff *= double(e);
        d.b.exponents[static_cast<size_t>(i - 1)] -= 1;
        r.terms.push_back(std::move(d));
    }
    return r;
}

Polynomial Polynomial::scale_weight(double k) const {
    Polynomial r(n);
    for (const auto& t : terms) {
        PolyTerm s = t;
        s.coeff *= k * std::pow(k, -0.5 * t.total_degree());
        r.terms.push_back(std::move(s));
    }
    return r;
}

Polynomial Polynomial::scale_substitute(double k) const {
    Polynomial r(n);
    for (const auto& t : terms) {
        PolyTerm s = t;
        s.coeff *= std::pow(k, -0.5 * t.total_degree());
        r.terms.push_back(std::move(s));
    }
    return r;
}

Polynomial Polynomial::conjugate() const {
    Polynomial r(n);
    for (const auto& t : terms) {
        PolyTerm s;
        s.a = t.b;
        s.b = t.a;
        s.coeff = std::conj(t.coeff);
        r.terms.push_back(std::move(s));
    }
    return r;
}

bool Polynomial::is_real_valued(double tol) const {
    // collect coefficients by (a, b) key and compare with the conjugate list
    std::map<std::pair<std::vector<int>, std::vector<int>>, Complex> acc;
    for (const auto& t : terms) acc[{t.a.exponents, t.b.exponents}] += t.coeff;
    for (const auto& [key, c] : acc) {
        auto it = acc.find({key.second, key.first});
        Complex mirror = (it == acc.end()) ? Complex(0.0) : it->second;
        if (std::abs(c - std::conj(mirror)) > tol * std::max(1.0, std::abs(c)))
            return false;
    }
    return true;
}

WeightModel::WeightModel(RVector lambdas, Polynomial perturbation, double validity_radius)
    : lambdas_(std::move(lambdas)), pert_(std::move(perturbation)), radius_(validity_radius) {
    int n = dim();
    if (n <= 0) throw std::invalid_argument("WeightModel: empty lambda vector");
    if (pert_.n == 0) pert_.n = n;
    if (pert_.n != n) throw std::invalid_argument("WeightModel: perturbation dimension mismatch");
    if (!pert_.is_real_valued())
        throw std::invalid_argument("WeightModel: perturbation is not real-valued");

    int min_deg = std::numeric_limits<int>::max();
    for (const auto& t : pert_.terms) {
        if (t.coeff == 0.0) continue;
        min_deg = std::min(min_deg, t.total_degree());
    }
    if (pert_.terms.empty()) min_deg = 4;
    if (min_deg < 3)
        throw std::invalid_argument(
            "WeightModel: perturbation must vanish to order >= 3 at 0 "
            "(value, gradient and complex Hessian at 0)");
    vanishing_order_ = std::min(min_deg, 4);

    // default radius rule: infinite only when the top-degree part is an even
    // diagonal polynomial sum c |z^gamma|^2 with c >= 0
    if (std::isinf(radius_) && !pert_.terms.empty()) {
        int dmax = pert_.degree();
        bool safe = (dmax % 2 == 0);
        for (const auto& t : pert_.terms) {
            if (t.total_degree() != dmax) continue;
            if (!(t.a == t.b) || t.coeff.real() < 0.0 || std::abs(t.coeff.imag()) > 0.0)
                safe = false;
        }
        if (!safe)
            throw std::invalid_argument(
                "WeightModel: perturbation with sign-indefinite leading part needs an "
                "explicit finite validity radius");
    }
}

WeightModel WeightModel::quadratic(RVector lambdas) {
    int n = static_cast<int>(lambdas.size());
    return WeightModel(std::move(lambdas), Polynomial(n));
}

WeightJet WeightModel::eval(const Point& z, double k) const {
    int n = dim();
    if (z.size() != n) throw std::invalid_argument("WeightModel: point dimension mismatch");
    if (z.norm() > radius_)
        throw std::domain_error("WeightModel: point outside validity radius");
    WeightJet j;
    j.grad_z = CVector::Zero(n);
    j.grad_zbar = CVector::Zero(n);
    j.hess_z_zbar = CMatrix::Zero(n, n);
    double quad = 0.0;
    for (int i = 0; i < n; ++i) {
        quad += lambdas_[i] * std::norm(z[i]);
        j.grad_z[i] = lambdas_[i] * std::conj(z[i]);
        j.grad_zbar[i] = lambdas_[i] * z[i];
        j.hess_z_zbar(i, i) = lambdas_[i];
    }
    j.value = quad + pert_.eval(z).real();
    for (int i = 1; i <= n; ++i) {
        Polynomial di = pert_.d_z(i);
        j.grad_z[i - 1] += di.eval(z);
        j.grad_zbar[i - 1] += pert_.d_zbar(i).eval(z);
        for (int l = 1; l <= n; ++l) j.hess_z_zbar(i - 1, l - 1) += di.d_zbar(l).eval(z);
    }
    j.value *= k;
    j.grad_z *= k;
    j.grad_zbar *= k;
    j.hess_z_zbar *= k;
    return j;
}

double WeightModel::value(const Point& z, double k) const {
    if (z.norm() > radius_)
        throw std::domain_error("WeightModel: point outside validity radius");
    double quad = 0.0;
    for (int i = 0; i < dim(); ++i) quad += lambdas_[i] * std::norm(z[i]);
    return k * (quad + pert_.eval(z).real());
}

Polynomial WeightModel::dbar_component(int i) const {
    Polynomial r = pert_.d_zbar(i);
    r.n = dim();
    PolyTerm quad;
    quad.a = MultiIndex(std::vector<int>(static_cast<size_t>(dim()), 0));
    quad.b = quad.a;
    quad.a.exponents[static_cast<size_t>(i - 1)] = 1;
    quad.coeff = lambdas_[i - 1];
    r.terms.push_back(std::move(quad));
    return r;
}

Polynomial WeightModel::d_component(int i) const {
    Polynomial r = pert_.d_z(i);
    r.n = dim();
    PolyTerm quad;
    quad.a = MultiIndex(std::vector<int>(static_cast<size_t>(dim()), 0));
    quad.b = quad.a;
    quad.b.exponents[static_cast<size_t>(i - 1)] = 1;
    quad.coeff = lambdas_[i - 1];
    r.terms.push_back(std::move(quad));
    return r;
}

WeightModel scaled_weight(const WeightModel& w, double k) {
    if (k < 1.0) throw std::invalid_argument("scaled_weight: k must be >= 1");
    double r = w.validity_radius();
    double scaled_r = std::isinf(r) ? r : r * std::sqrt(k);
    return WeightModel(w.lambdas(), w.perturbation().scale_weight(k), scaled_r);
}

MetricModel::MetricModel(int n, std::vector<std::tuple<int, int, PolyTerm>> entries) : n_(n) {
    for (auto& [i, j, t] : entries) {
        if (i < 1 || i > n || j < 1 || j > n)
            throw std::invalid_argument("MetricModel: entry index out of range");
        if (t.total_degree() < 1)
            throw std::invalid_argument("MetricModel: perturbation must vanish at 0");
        terms_.emplace_back(i, j, t);
        // Hermitian completion
        bool self_conjugate = (i == j) && (t.a == t.b) && std::abs(t.coeff.imag()) == 0.0;
        if (!self_conjugate) {
            PolyTerm c;
            c.a = t.b;
            c.b = t.a;
            c.coeff = std::conj(t.coeff);
            terms_.emplace_back(j, i, c);
        }
    }
}

CMatrix MetricModel::eval(const Point& z) const {
    int n = n_ ? n_ : static_cast<int>(z.size());
    CMatrix h = CMatrix::Identity(n, n);
    for (const auto& [i, j, t] : terms_) h(i - 1, j - 1) += t.eval(z);
    double nrm = h.cwiseAbs().maxCoeff();
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * nrm)
        throw std::runtime_error("MetricModel: evaluated matrix not Hermitian");
    Eigen::LLT<CMatrix> llt(h);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("MetricModel: metric not positive definite at point");
    return h;
}

double MetricModel::det_at(const Point& z) const {
    if (flat()) return 1.0;
    return eval(z).determinant().real();
}

MetricModel MetricModel::from_hermitian_terms(int n,
                                              std::vector<std::tuple<int, int, PolyTerm>> terms) {
    MetricModel m(n);
    m.terms_ = std::move(terms);
    return m;
}

MetricModel scaled_metric(const MetricModel& m, double k) {
    if (k < 1.0) throw std::invalid_argument("scaled_metric: k must be >= 1");
    if (m.flat()) return m;
    std::vector<std::tuple<int, int, PolyTerm>> scaled;
    for (const auto& [i, j, t] : m.terms()) {
        PolyTerm s = t;
        s.coeff *= std::pow(k, -0.5 * t.total_degree());
        scaled.emplace_back(i, j, s);
    }
    return MetricModel::from_hermitian_terms(m.dim(), std::move(scaled));
}

CurvatureData curvature_at(const WeightModel& w, const MetricModel& m, const Point& z) {
    int n = w.dim();
    WeightJet j = w.eval(z);
    CMatrix phi = j.hess_z_zbar;  // Hermitian for real weights

    CurvatureData c;
    if (m.flat()) {
        c.matrix = 2.0 * 0.5 * (phi + phi.adjoint());
    } else {
        // Theta-dot solves <Theta-dot v1|v2>_w = Theta(v1 ^ conj(v2)); its
        // eigenvalues are those of the Hermitian pencil 2 h^{-1/2} phi h^{-1/2}
        CMatrix h = m.eval(z);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument("curvature_at: degenerate metric");
        CMatrix hmhalf = es.operatorInverseSqrt();
        CMatrix sym = 2.0 * hmhalf * (0.5 * (phi + phi.adjoint())) * hmhalf;
        c.matrix = 0.5 * (sym + sym.adjoint());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(c.matrix);
    c.eigenvalues = es.eigenvalues();
    (void)n;
    return c;
}

Signature signature(const CurvatureData& c, double tol) {
    Signature s;
    if (c.eigenvalues.size() == 0) return s;
    double scale = c.eigenvalues.cwiseAbs().maxCoeff();
    if (tol < 0.0) tol = 1e-9 * scale;
    for (Eigen::Index i = 0; i < c.eigenvalues.size(); ++i) {
        double e = c.eigenvalues[i];
        if (std::abs(e) <= tol)
            s.degenerate = true;
        else if (e < 0.0)
            ++s.negatives;
        else
            ++s.positives;
    }
    return s;
}

GapReport classify_gap(const std::map<double, double>& gaps, const GapCriterion& crit) {
    if (gaps.empty()) throw std::invalid_argument("classify_gap: empty sample");
    GapReport r;
    for (const auto& [k, g] : gaps) {
        if (g < 0.0) throw std::invalid_argument("classify_gap: negative gap");
        if (k < crit.k0) continue;
        double bound;
        if (crit.kind == GapCriterion::Kind::polynomial) {
            bound = std::pow(k, -crit.d) / crit.C;
        } else {
            if (crit.lambda_min <= 0.0)
                throw std::invalid_argument("classify_gap: exponential mode needs lambda_min > 0");
            bound = std::exp(-2.0 * crit.c * crit.lambda_min * std::sqrt(k)) / crit.C;
        }
        r.k.push_back(k);
        r.gap.push_back(g);
        r.bound.push_back(bound);
        if (g < bound) r.pass = false;
    }
    if (r.k.empty()) throw std::invalid_argument("classify_gap: no sampled k >= k0");
    return r;
}

std::string GapReport::describe() const {
    std::ostringstream os;
    os << (pass ? "pass" : "fail");
    for (size_t i = 0; i < k.size(); ++i)
        os << "  k=" << k[i] << " gap=" << gap[i] << " bound=" << bound[i];
    return os.str();
}

}  // namespace bergman
