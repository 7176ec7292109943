#include "bergman/model.hpp"

#include <cmath>
#include <stdexcept>

namespace bergman {

ModelSpec::ModelSpec(RVector lam) : lambdas(std::move(lam)) {
    int n = dim();
    if (n <= 0) throw std::invalid_argument("ModelSpec: empty lambda vector");
    std::vector<int> neg, pos;
    for (int i = 0; i < n; ++i) {
        if (lambdas[i] == 0.0)
            throw std::invalid_argument("ModelSpec: lambda entries must be nonzero");
        (lambdas[i] < 0.0 ? neg : pos).push_back(i + 1);
    }
    q0 = static_cast<int>(neg.size());
    permutation = neg;
    permutation.insert(permutation.end(), pos.begin(), pos.end());
    negative_index = FormIndex(neg);  // stable order keeps entries increasing
}

double ModelSpec::abs_lambda_product() const {
    double p = 1.0;
    for (int i = 0; i < dim(); ++i) p *= std::abs(lambdas[i]);
    return p;
}

double model_basis_log_norm2(const ModelSpec& spec, const MultiIndex& alpha) {
    int n = spec.dim();
    if (alpha.dim() != n) throw std::invalid_argument("model_basis_norm2: dimension mismatch");
    double s = n * std::log(M_PI) + alpha.log_factorial() - alpha.order() * std::log(2.0);
    for (int i = 0; i < n; ++i)
        s -= (alpha[i] + 1) * std::log(std::abs(spec.lambdas[i]));
    return s;
}

double model_basis_norm2(const ModelSpec& spec, const MultiIndex& alpha) {
    int n = spec.dim();
    if (alpha.dim() != n) throw std::invalid_argument("model_basis_norm2: dimension mismatch");
    if (alpha.order() > 30) return std::exp(model_basis_log_norm2(spec, alpha));
    double v = std::pow(M_PI, n) * alpha.factorial() / std::pow(2.0, alpha.order());
    for (int i = 0; i < n; ++i)
        v /= std::pow(std::abs(spec.lambdas[i]), alpha[i] + 1);
    return v;
}

/// z^alpha_q with the negative coordinates conjugated, times the Gaussian.
static Complex model_scalar(const ModelSpec& spec, const MultiIndex& alpha, const Point& z) {
    Complex m = 1.0;
    double expo = 0.0;
    for (int i = 0; i < spec.dim(); ++i) {
        Complex zi = (spec.lambdas[i] < 0.0) ? std::conj(z[i]) : z[i];
        for (int p = 0; p < alpha[i]; ++p) m *= zi;
        expo -= std::abs(spec.lambdas[i]) * std::norm(z[i]);
    }
    return m * std::exp(expo);
}

FormValue model_basis_eval(const ModelSpec& spec, const MultiIndex& alpha, const Point& z) {
    int n = spec.dim();
    if (z.size() != n) throw std::invalid_argument("model_basis_eval: dimension mismatch");
    double pref = std::exp(-0.5 * model_basis_log_norm2(spec, alpha));
    FormValue v(n, spec.q0);
    v.at(spec.negative_index) = pref * model_scalar(spec, alpha, z);
    return v;
}

KernelValue model_kernel(const ModelSpec& spec, const Point& z, const Point& w) {
    int n = spec.dim();
    if (z.size() != n || w.size() != n)
        throw std::invalid_argument("model_kernel: dimension mismatch");
    Complex expo = 0.0;
    for (int i = 0; i < n; ++i) {
        double al = std::abs(spec.lambdas[i]);
        if (spec.lambdas[i] < 0.0)
            expo += 2.0 * al * std::conj(z[i]) * w[i];
        else
            expo += 2.0 * al * z[i] * std::conj(w[i]);
        expo -= al * (std::norm(z[i]) + std::norm(w[i]));
    }
    KernelValue K(n, spec.q0);
    int r = form_index_rank(n, spec.negative_index);
    K.m(r, r) = spec.abs_lambda_product() / std::pow(M_PI, n) * std::exp(expo);
    return K;
}

KernelValue model_kernel_series(const ModelSpec& spec, const Point& z, const Point& w,
                                int cutoff) {
    int n = spec.dim();
    if (cutoff < 0) throw std::invalid_argument("model_kernel_series: negative cutoff");
    Complex sum = 0.0;
    for (const auto& alpha : multi_indices_up_to(n, cutoff)) {
        double inv_norm2 = std::exp(-model_basis_log_norm2(spec, alpha));
        sum += inv_norm2 * model_scalar(spec, alpha, z) * std::conj(model_scalar(spec, alpha, w));
    }
    KernelValue K(n, spec.q0);
    int r = form_index_rank(n, spec.negative_index);
    K.m(r, r) = sum;
    return K;
}

Complex model_laplacian_apply(const ModelSpec& spec, const JetFunction& f,
                              const FormIndex& I, const Point& z) {
    int n = spec.dim();
    if (!f) throw std::invalid_argument("model_laplacian_apply: derivative data unavailable");
    ScalarJet2 j = f(z);
    if (j.d_z.size() != n || j.d_zbar.size() != n || j.d_zbar_z.size() != n)
        throw std::invalid_argument("model_laplacian_apply: jet dimension mismatch");

    Complex acc = 0.0;
    double constant = 0.0;
    for (int i = 0; i < n; ++i) {
        double lam = spec.lambdas[i];
        Complex phi_z = lam * std::conj(z[i]);
        Complex phi_zbar = lam * z[i];
        acc += -j.d_zbar_z[i] + phi_z * j.d_zbar[i] - phi_zbar * j.d_z[i];
        constant += (I.contains(i + 1) ? lam : -lam);
        constant += lam * lam * std::norm(z[i]);  // |dbar phi_0|^2 term
    }
    return acc + constant * j.value;
}

}  // namespace bergman
