#pragma once

#include <string>

#include "bergman/geometry.hpp"
#include "bergman/numerics.hpp"

namespace bergman {

/// Weighted monomial basis for the q = 0 holomorphic sector: Gram matrix
/// G_{ab} = (z^a | z^b)_{w, k phi} over all |alpha| <= D and its
/// orthonormalizing transform.
struct GramBasis {
    int n = 0;
    int k = 1;
    int degree_cap = 0;                 // D
    int quad_order = 0;
    std::vector<MultiIndex> monomials;  // graded order, |alpha| <= D
    CMatrix gram;                       // <m_a, m_b> = int conj(z^a) z^b e^{-2k phi} dV_w
    CMatrix transform;                  // columns: orthonormal combinations
    std::vector<int> retained;
    WeightModel weight;
    MetricModel metric;
    std::vector<std::string> warnings;  // e.g. quadrature underflow report

    int retained_dim() const { return static_cast<int>(retained.size()); }
};

/// Assemble the weighted Gram matrix by tensor Gauss quadrature with per-axis
/// scales k * lambda_i; requires all lambda_i > 0 (integrable holomorphic
/// sector). quad_order <= 0 picks the default (64 for n = 1, 24 for n = 2).
GramBasis monomial_gram(const WeightModel& weight, const MetricModel& metric, int k,
                        int degree_cap, int quad_order = 0, double pivot_tol = 1e-10);

/// Trivialized Bergman kernel value: sum_i psi_i(z) conj(psi_i(w)) e^{-2k phi(w)},
/// reproducing holomorphic sections against plain dV_w.
Complex bergman_kernel_trivialized(const GramBasis& basis, const Point& z, const Point& w);

/// e^{-k phi(z)} * value * e^{+k phi(w)}; exponents combined before
/// exponentiating so large k phi(w) cannot overflow.
Complex localize_kernel(Complex trivialized, const WeightModel& weight, int k, const Point& z,
                        const Point& w);

/// Localized kernel evaluated directly (symmetric in the model case).
Complex localized_kernel(const GramBasis& basis, const Point& z, const Point& w);

/// k^{-n} * kernel(z / sqrt(k), w / sqrt(k)) for any pointwise kernel
/// evaluator; applies uniformly to trivialized, localized and spectral kernels.
template <typename Evaluator>
auto scaled_kernel(const Evaluator& kernel, int k, int n, const Point& z, const Point& w) {
    double root = std::sqrt(double(k));
    return kernel(Point(z / root), Point(w / root)) * std::pow(double(k), -n);
}

/// Scaled localized kernel from the Gram pipeline as a 1x1 KernelValue:
/// k^{-n} e^{-k phi(z/sqrt k)} B^s_k(z/sqrt k, w/sqrt k) e^{+k phi(w/sqrt k)}.
KernelValue gram_scaled_localized(const GramBasis& basis, const Point& z, const Point& w);

/// Unscaled trivialized diagonal B_k(p,p) at the origin (the quantity whose
/// log-log slope against k is the leading-order growth).
double trivialized_diagonal_origin(const GramBasis& basis);

}  // namespace bergman
