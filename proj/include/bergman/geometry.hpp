#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bergman/forms.hpp"

namespace bergman {

/// One monomial c * z^a * zbar^b of a polynomial in (z, zbar).
struct PolyTerm {
    MultiIndex a;   // exponents of z
    MultiIndex b;   // exponents of zbar
    Complex coeff;

    int total_degree() const { return a.order() + b.order(); }
    Complex eval(const Point& z) const;
};

/// Polynomial in (z, zbar) with evaluation and exact Wirtinger derivatives.
struct Polynomial {
    int n = 0;
    std::vector<PolyTerm> terms;

    Polynomial() = default;
    explicit Polynomial(int n_) : n(n_) {}

    bool empty() const { return terms.empty(); }
    int degree() const;
    Complex eval(const Point& z) const;
    Polynomial d_z(int i) const;      // d/dz^i, 1-based
    Polynomial d_zbar(int i) const;   // d/dzbar^i
    /// substitute z -> z/sqrt(k) and multiply by k (weight scaling)
    Polynomial scale_weight(double k) const;
    /// substitute z -> z/sqrt(k)
    Polynomial scale_substitute(double k) const;
    Polynomial conjugate() const;
    /// max |Im p(z)| witness check: true when the term list is symmetric
    /// under (a,b) -> (b,a) with conjugate coefficients
    bool is_real_valued(double tol = 1e-14) const;
};

/// Value and derivatives to order 2 of a weight at a point (already
/// multiplied by k where requested).
struct WeightJet {
    double value = 0.0;
    CVector grad_z;       // d/dz^i
    CVector grad_zbar;    // d/dzbar^i
    CMatrix hess_z_zbar;  // d^2/dz^i dzbar^j
};

/// Weight phi(z) = sum_i lambda_i |z^i|^2 + perturbation, the perturbation a
/// real-valued polynomial vanishing to order >= 3 at 0 with vanishing complex
/// Hessian at 0.
class WeightModel {
  public:
    WeightModel(RVector lambdas, Polynomial perturbation,
                double validity_radius = std::numeric_limits<double>::infinity());
    static WeightModel quadratic(RVector lambdas);   // phi_0

    int dim() const { return static_cast<int>(lambdas_.size()); }
    const RVector& lambdas() const { return lambdas_; }
    const Polynomial& perturbation() const { return pert_; }
    double validity_radius() const { return radius_; }
    int vanishing_order() const { return vanishing_order_; }

    /// k * phi and derivatives; throws domain_error outside the validity radius.
    WeightJet eval(const Point& z, double k = 1.0) const;
    double value(const Point& z, double k = 1.0) const;

    /// d(phi)/dzbar^i as a polynomial (quadratic part included)
    Polynomial dbar_component(int i) const;
    /// d(phi)/dz^i as a polynomial
    Polynomial d_component(int i) const;

  private:
    RVector lambdas_;
    Polynomial pert_;
    double radius_;
    int vanishing_order_ = 4;
};

/// phi_(k)(z) = k * phi(z / sqrt(k)); quadratic part is unchanged, the
/// perturbation terms are damped by k^{1 - d/2}.
WeightModel scaled_weight(const WeightModel& w, double k);

/// Hermitian metric h(z) = I + perturbation(z), the perturbation vanishing
/// at 0; entries are polynomials in (z, zbar), Hermitian-completed.
class MetricModel {
  public:
    MetricModel() = default;                 // flat
    explicit MetricModel(int n) : n_(n) {}   // flat, explicit dimension
    MetricModel(int n, std::vector<std::tuple<int, int, PolyTerm>> entries);

    /// term list already Hermitian-complete (used by scaled_metric)
    static MetricModel from_hermitian_terms(int n,
                                            std::vector<std::tuple<int, int, PolyTerm>> terms);

    bool flat() const { return terms_.empty(); }
    int dim() const { return n_; }
    CMatrix eval(const Point& z) const;          // throws if not PD at z
    double det_at(const Point& z) const;
    const std::vector<std::tuple<int, int, PolyTerm>>& terms() const { return terms_; }

  private:
    int n_ = 0;
    std::vector<std::tuple<int, int, PolyTerm>> terms_;  // (i, j, term), 1-based
};

MetricModel scaled_metric(const MetricModel& m, double k);

/// Curvature operator data at a point: a Hermitian representative with the
/// eigenvalues of Theta-dot (2 * diag(lambda) at the origin for flat metric).
struct CurvatureData {
    CMatrix matrix;       // Hermitian n x n
    RVector eigenvalues;  // ascending
};

CurvatureData curvature_at(const WeightModel& w, const MetricModel& m, const Point& z);

struct Signature {
    int negatives = 0;
    int positives = 0;
    bool degenerate = false;

    bool in_Mq(int q) const { return !degenerate && negatives == q; }
};

/// Default tol < 0 means 1e-9 * max |eigenvalue|.
Signature signature(const CurvatureData& c, double tol = -1.0);

/// Spectral gap classification modes (polynomial / exponential rate).
struct GapCriterion {
    enum class Kind { polynomial, exponential } kind = Kind::polynomial;
    double d = 0.0;          // polynomial: gap(k) >= k^{-d} / C
    double C = 1.0;
    double c = 0.5;          // exponential: gap(k) >= e^{-2 c lambda_min sqrt(k)} / C
    double lambda_min = 1.0;
    double k0 = 0.0;         // only sampled k >= k0 are tested
};

struct GapReport {
    bool pass = true;
    std::vector<double> k;
    std::vector<double> gap;
    std::vector<double> bound;
    std::string describe() const;
};

GapReport classify_gap(const std::map<double, double>& gaps, const GapCriterion& crit);

}  // namespace bergman
