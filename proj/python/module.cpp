#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bergman/harness.hpp"

namespace py = pybind11;
using namespace bergman;

namespace {

WeightModel make_weight(const Eigen::VectorXd& lambdas,
                        const std::vector<std::tuple<std::vector<int>, std::vector<int>, double>>& terms,
                        double radius) {
    Polynomial pert(static_cast<int>(lambdas.size()));
    for (const auto& [a, b, c] : terms) {
        PolyTerm t;
        t.a = MultiIndex(a);
        t.b = MultiIndex(b);
        t.coeff = c;
        pert.terms.push_back(std::move(t));
    }
    return WeightModel(lambdas, pert, radius);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "weighted Bergman and spectral kernels for (0,q)-forms on C^n";

    py::class_<FormIndex>(m, "FormIndex")
        .def(py::init<std::vector<int>>())
        .def_readonly("indices", &FormIndex::indices)
        .def("degree", &FormIndex::degree)
        .def("__repr__", &FormIndex::str);

    m.def("form_indices", [](int n, int q) { return form_indices(n, q); },
          py::arg("n"), py::arg("q"));

    py::class_<FormValue>(m, "FormValue")
        .def(py::init<int, int>())
        .def_static("basis", &FormValue::basis)
        .def_readonly("n", &FormValue::n)
        .def_readonly("q", &FormValue::q)
        .def_readwrite("coeff", &FormValue::coeff);

    py::class_<KernelValue>(m, "KernelValue")
        .def_readonly("n", &KernelValue::n)
        .def_readonly("q", &KernelValue::q)
        .def_readonly("matrix", &KernelValue::m)
        .def("norm_inf", &KernelValue::norm_inf);

    m.def("wedge", &wedge);
    m.def("contract", &contract);
    m.def("pointwise_inner", &pointwise_inner);
    m.def("frame_gram", &frame_gram);

    py::class_<WeightModel>(m, "WeightModel")
        .def(py::init(&make_weight), py::arg("lambdas"),
             py::arg("terms") = std::vector<std::tuple<std::vector<int>, std::vector<int>, double>>{},
             py::arg("radius") = std::numeric_limits<double>::infinity())
        .def_property_readonly("lambdas", &WeightModel::lambdas)
        .def("value", &WeightModel::value, py::arg("z"), py::arg("k") = 1.0)
        .def("validity_radius", &WeightModel::validity_radius);

    m.def("scaled_weight", &scaled_weight);

    py::class_<MetricModel>(m, "MetricModel").def(py::init<int>());

    py::class_<CurvatureData>(m, "CurvatureData")
        .def_readonly("matrix", &CurvatureData::matrix)
        .def_readonly("eigenvalues", &CurvatureData::eigenvalues);
    m.def("curvature_at", &curvature_at);

    py::class_<Signature>(m, "Signature")
        .def_readonly("negatives", &Signature::negatives)
        .def_readonly("positives", &Signature::positives)
        .def_readonly("degenerate", &Signature::degenerate)
        .def("in_Mq", &Signature::in_Mq);
    m.def("signature", &signature, py::arg("curvature"), py::arg("tol") = -1.0);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def(py::init<RVector>())
        .def_readonly("q0", &ModelSpec::q0)
        .def_readonly("lambdas", &ModelSpec::lambdas)
        .def_property_readonly("negative_index", [](const ModelSpec& s) { return s.negative_index; });

    m.def("model_basis_norm2", &model_basis_norm2);
    m.def("model_basis_eval",
          [](const ModelSpec& s, const std::vector<int>& alpha, const Point& z) {
              return model_basis_eval(s, MultiIndex(alpha), z);
          });
    m.def("model_kernel", &model_kernel);
    m.def("model_kernel_series", &model_kernel_series);

    py::class_<QuadratureAxis>(m, "QuadratureAxis")
        .def_readonly("nodes", &QuadratureAxis::nodes)
        .def_readonly("weights", &QuadratureAxis::weights);
    m.def("gauss_axis", &gauss_axis, py::arg("order"), py::arg("scale"));

    py::class_<SpectralData>(m, "SpectralData")
        .def_readonly("eigenvalues", &SpectralData::eigenvalues)
        .def_readonly("vectors", &SpectralData::vectors)
        .def_readonly("basis_dim", &SpectralData::basis_dim);
    m.def("hermitian_eigh", &hermitian_eigh);
    m.def("gram_orthonormalize",
          [](const CMatrix& G, double rel_tol) {
              auto r = gram_orthonormalize(G, rel_tol);
              return py::make_tuple(r.transform, r.retained);
          },
          py::arg("gram"), py::arg("rel_tol") = 1e-10);

    py::class_<GramBasis>(m, "GramBasis")
        .def_readonly("n", &GramBasis::n)
        .def_readonly("k", &GramBasis::k)
        .def_readonly("degree_cap", &GramBasis::degree_cap)
        .def_readonly("gram", &GramBasis::gram)
        .def("retained_dim", &GramBasis::retained_dim)
        .def_readonly("warnings", &GramBasis::warnings);
    m.def("monomial_gram", &monomial_gram, py::arg("weight"), py::arg("metric"), py::arg("k"),
          py::arg("degree_cap"), py::arg("quad_order") = 0, py::arg("pivot_tol") = 1e-10);
    m.def("bergman_kernel_trivialized", &bergman_kernel_trivialized);
    m.def("localized_kernel", &localized_kernel);
    m.def("gram_scaled_localized", &gram_scaled_localized);
    m.def("trivialized_diagonal_origin", &trivialized_diagonal_origin);

    py::class_<OscillatorBasis>(m, "OscillatorBasis")
        .def_readonly("n", &OscillatorBasis::n)
        .def_readonly("q", &OscillatorBasis::q)
        .def_readonly("levels", &OscillatorBasis::levels)
        .def("dim", &OscillatorBasis::dim);
    m.def("oscillator_basis", &oscillator_basis, py::arg("weight"), py::arg("q"),
          py::arg("levels"));

    py::class_<AssembledOperator>(m, "AssembledOperator")
        .def_property_readonly("matrix", &AssembledOperator::dense)
        .def_readonly("k", &AssembledOperator::k);
    m.def("assemble_dbar", &assemble_dbar);
    m.def("assemble_dbar_adjoint", &assemble_dbar_adjoint);
    m.def("assemble_laplacian", &assemble_laplacian);
    m.def("laplacian_spectrum", &laplacian_spectrum);
    m.def("spectral_projection_kernel", &spectral_projection_kernel);
    m.def("spectral_gap",
          [](const SpectralData& s, double zero_tol) {
              auto g = spectral_gap(s, zero_tol);
              return py::make_tuple(g.kernel_dim, g.gap);
          },
          py::arg("spectral_data"), py::arg("zero_tol") = 1e-7);

    m.def("kernel_grid", &kernel_grid);
    m.def("diagonal_leading_fit",
          [](const std::vector<double>& ks, const std::vector<double>& ds) {
              auto f = diagonal_leading_fit(ks, ds);
              return py::make_tuple(f.slope, f.coefficient);
          });
    m.def("load_experiment_file", &load_experiment_file);
    m.def("convergence_scan",
          [](const ExperimentConfig& cfg, int threads) {
              auto rep = convergence_scan(cfg, threads);
              py::dict d;
              d["path"] = rep.path;
              d["signature_match"] = rep.signature_match;
              py::list samples;
              for (const auto& s : rep.samples) {
                  py::dict sd;
                  sd["k"] = s.k;
                  sd["sup_distance"] = s.sup_distance;
                  sd["scaled_diag0"] = s.scaled_diag0;
                  if (s.scaled_gap) sd["scaled_gap"] = *s.scaled_gap;
                  samples.append(sd);
              }
              d["samples"] = samples;
              d["pass"] = rep.pass;
              return d;
          },
          py::arg("config"), py::arg("threads") = 1);
    m.def("run_experiment", &run_experiment, py::arg("config"), py::arg("out_dir"),
          py::arg("strict") = false, py::arg("threads") = 1);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("q", &ExperimentConfig::q)
        .def_readwrite("k_list", &ExperimentConfig::k_list)
        .def_readwrite("grid_radius", &ExperimentConfig::grid_radius)
        .def_readwrite("grid_points", &ExperimentConfig::grid_points);
}
