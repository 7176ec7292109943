#pragma once

#include <functional>

#include "bergman/forms.hpp"
#include "bergman/geometry.hpp"

namespace bergman {

/// Model data on C^n: weight phi_0 = sum lambda_i |z^i|^2 with every
/// lambda_i nonzero, flat metric. q0 counts the negative eigenvalues; the
/// rearrangement placing them first is stored explicitly and all results are
/// reported in the caller's coordinate order.
struct ModelSpec {
    RVector lambdas;            // caller order
    int q0 = 0;                 // number of negative lambdas
    std::vector<int> permutation;  // permuted position -> caller index (1-based)
    FormIndex negative_index;   // sorted caller indices with lambda_i < 0

    explicit ModelSpec(RVector lam);
    int dim() const { return static_cast<int>(lambdas.size()); }
    double abs_lambda_product() const;
};

/// ||Psi_alpha||^2 = pi^n alpha! / (2^{|alpha|} [lambda]^{alpha+1});
/// log-space above |alpha| = 30.
double model_basis_norm2(const ModelSpec& spec, const MultiIndex& alpha);
double model_basis_log_norm2(const ModelSpec& spec, const MultiIndex& alpha);

/// Orthonormal zero mode Psi_alpha(z): the monomial conjugates exactly the
/// coordinates with lambda_i < 0 and the form index is the set of those
/// coordinates.
FormValue model_basis_eval(const ModelSpec& spec, const MultiIndex& alpha, const Point& z);

/// Closed-form localized Bergman kernel of the model case: single nonzero
/// entry at (I,I), I the negative-coordinate index set.
KernelValue model_kernel(const ModelSpec& spec, const Point& z, const Point& w);

/// Partial sum over |alpha| <= cutoff of Psi_alpha(z) (x) Psi_alpha(w)^*.
KernelValue model_kernel_series(const ModelSpec& spec, const Point& z, const Point& w,
                                int cutoff);

/// Scalar 2-jet of a test function: value, Wirtinger gradients and the mixed
/// derivatives f_{zbar_i z_i} needed by the diagonal Laplacian formula.
struct ScalarJet2 {
    Complex value{0.0};
    CVector d_z;        // df/dz^i
    CVector d_zbar;     // df/dzbar^i
    CVector d_zbar_z;   // d2 f / dzbar^i dz^i (diagonal mixed terms)
};

using JetFunction = std::function<ScalarJet2(const Point&)>;

/// Exact diagonal action for the quadratic weight:
/// sum_i (-f_{zbar_i z_i} + phi0_{z_i} f_{zbar_i} - phi0_{zbar_i} f_{z_i})
/// + (sum_{i in I} lambda_i - sum_{i not in I} lambda_i + |dbar phi0|^2) f.
Complex model_laplacian_apply(const ModelSpec& spec, const JetFunction& f,
                              const FormIndex& I, const Point& z);

}  // namespace bergman
