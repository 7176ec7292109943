#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bergman/forms.hpp"

namespace bergman {

/// Per-axis Gauss rule, exact for polynomials of degree <= 2*order - 1
/// against exp(-2 s x^2).
struct QuadratureAxis {
    double scale = 1.0;          // s in exp(-2 s x^2)
    std::vector<double> nodes;
    std::vector<double> weights; // Gaussian factor folded in
};

/// Tensor rule over R^{2n} (two real axes per complex coordinate);
/// node count = order^{#axes}, enumerated lazily.
struct QuadratureRule {
    int order = 0;
    std::vector<QuadratureAxis> axes;

    int n_axes() const { return static_cast<int>(axes.size()); }
    std::int64_t node_count() const;
    /// visit(point in C^{n_axes/2}, weight); axis 2j -> Re z_j, 2j+1 -> Im z_j
    void for_each_node(const std::function<void(const Point&, double)>& visit) const;
    double total_mass() const;   // sum of tensor weights = Gaussian mass
};

/// Gauss nodes/weights for weight exp(-2 s x^2) via Golub-Welsch.
QuadratureAxis gauss_axis(int order, double scale);

/// scales[j] applies to both real axes of coordinate j when given per complex
/// coordinate; pass 2n entries for full per-axis control.
QuadratureRule tensor_gauss_rule(int order, const std::vector<double>& scales_per_axis);

/// Eigen-decomposition of a (defensively symmetrized) Hermitian matrix.
struct SpectralData {
    RVector eigenvalues;   // ascending
    CMatrix vectors;       // unitary, columns are eigenvectors
    int basis_dim = 0;
};

SpectralData hermitian_eigh(const CMatrix& A);

/// Rank-revealing orthonormalization of a Hermitian PSD Gram matrix via
/// pivoted Cholesky. transform has one column per retained pivot and
/// satisfies transform^H * G * transform = I on the retained block.
struct GramOrthonormalization {
    CMatrix transform;
    std::vector<int> retained;   // pivot order
};

GramOrthonormalization gram_orthonormalize(const CMatrix& G, double rel_tol = 1e-10);

}  // namespace bergman
