#pragma once

#include <Eigen/SparseCore>

#include "bergman/geometry.hpp"
#include "bergman/model.hpp"
#include "bergman/numerics.hpp"

namespace bergman {

using SparseC = Eigen::SparseMatrix<Complex>;

/// Tensor Hermite-function basis for flat-metric Galerkin assembly of the
/// scaled localized Kodaira Laplacian. Each complex coordinate j carries two
/// real axes of oscillator functions whose Gaussian envelope is
/// exp(-|lambda_j| t^2); the scalar space keeps the tensor functions with
/// TOTAL level sum <= levels - 1 across all 2n axes (for the quadratic weight
/// this subspace is invariant, so the Ritz spectrum is pollution-free), and
/// elements are (tensor function) x dzbar^I over I in J_{q,n}. Orthonormal in
/// L^2(dm); the 2^n volume constant of dV_{omega_0} cancels in Rayleigh
/// quotients and is restored once in the spectral kernel.
struct OscillatorBasis {
    int n = 0;
    int q = 0;
    int levels = 0;                        // M: per-axis levels, total cap M-1
    RVector lambdas;
    std::vector<FormIndex> forms;
    std::vector<std::vector<int>> tuples;  // per-axis levels, sum <= levels-1

    int axes() const { return 2 * n; }
    long scalar_dim() const { return static_cast<long>(tuples.size()); }
    long dim() const { return scalar_dim() * static_cast<long>(forms.size()); }
    double envelope(int coord) const { return 2.0 * std::abs(lambdas[coord]); }

    /// values of the scalar tensor functions at a point, length scalar_dim()
    CVector scalar_values(const Point& z) const;
};

OscillatorBasis oscillator_basis(const WeightModel& weight, int q, int levels);

struct AssembledOperator {
    enum class Which { dbar, dbar_adjoint, laplacian };
    Which which = Which::laplacian;
    OscillatorBasis domain;
    OscillatorBasis codomain;   // enlarged level cap for the dbar operators
    SparseC matrix;             // codomain.dim() x domain.dim()
    int k = 1;

    CMatrix dense() const { return CMatrix(matrix); }
};

/// Rectangular representation of the scaled localized Cauchy-Riemann operator
/// dbar_s = dbar + (dbar phi_(k)) ^ .  The codomain cap is enlarged by the
/// polynomial degree growth so the image of the truncated space is captured
/// exactly. Throws degree-overflow when basis.q == n.
AssembledOperator assemble_dbar(const OscillatorBasis& basis, const WeightModel& weight, int k);

/// Rectangular representation of dbar*_s = dbar*_{omega_0} + (dbar phi_(k)) ^*.
/// For q = 0 returns the zero operator (no rows).
AssembledOperator assemble_dbar_adjoint(const OscillatorBasis& basis, const WeightModel& weight,
                                        int k);

/// Hermitian PSD Galerkin matrix of the scaled localized Kodaira Laplacian,
/// composed as D^H D + E^H E from the two factors above (the exact
/// Rayleigh-Ritz compression of the quadratic form on the truncated space).
AssembledOperator assemble_laplacian(const OscillatorBasis& basis, const WeightModel& weight,
                                     int k);

SpectralData laplacian_spectrum(const AssembledOperator& op);

/// Re-express coefficients over a basis with a larger level cap (same n, q,
/// lambdas); used when composing rectangular operators.
CVector embed_coefficients(const OscillatorBasis& from, const OscillatorBasis& to,
                           const CVector& u);

/// Schwartz kernel of the eigenvalue-thresholded projection against
/// dV_{omega_0}: 2^{-n} sum_{mu_i <= c + tol} u_i(z) (x) conj(u_i(w)).
/// Ties at the threshold are included (closed interval, tol = 1e-9 mu_max).
/// With the scaled operator and scaled threshold c = c_k / k this is the
/// scaled localized spectral kernel.
KernelValue spectral_projection_kernel(const SpectralData& spec, const OscillatorBasis& basis,
                                       double threshold, const Point& z, const Point& w);

/// Coefficient-space projection matrix onto the modes below the threshold.
CMatrix spectral_projection_matrix(const SpectralData& spec, double threshold);

struct SpectralGap {
    int kernel_dim = 0;
    double gap = 0.0;
};

/// kernel_dim counts eigenvalues <= zero_tol * mu_max; gap is the smallest
/// eigenvalue above that set. Throws when the whole spectrum is below the
/// tolerance.
SpectralGap spectral_gap(const SpectralData& spec, double zero_tol = 1e-7);

}  // namespace bergman
