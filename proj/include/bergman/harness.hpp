#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bergman/config.hpp"
#include "bergman/fock.hpp"
#include "bergman/laplacian.hpp"

namespace bergman {

/// Comparison grid in C^n: for n = 1 a points x points box inscribed in the
/// ball of the given radius; for n >= 2 a deterministic (fixed-seed) sample
/// of points^2 points of the ball.
std::vector<Point> kernel_grid(int n, double radius, int points_per_axis);

struct KSample {
    int k = 1;
    double sup_distance = 0.0;        // d_k against the reference on the grid
    double scaled_diag0 = 0.0;        // scaled localized kernel at (0,0), (I,I) entry
    std::optional<double> trivialized_diag0;  // unscaled B_k(0,0), Gram path only
    std::optional<double> scaled_gap;         // Laplacian path only
    std::optional<int> kernel_dim;
    std::optional<int> retained_dim;          // Gram path truncation report
    double threshold_unscaled = 0.0;          // c_k
};

struct DiagonalFit {
    double slope = 0.0;
    double coefficient = 0.0;  // exp(intercept)
};

/// Least-squares fit of log B against log k; needs >= 3 positive values.
DiagonalFit diagonal_leading_fit(const std::vector<double>& k_values,
                                 const std::vector<double>& diag_values);

struct ConvergenceReport {
    int n = 0;
    int q = 0;
    int q0 = 0;                 // curvature signature at the origin
    bool signature_match = false;
    std::string path;           // "gram" or "galerkin"
    std::vector<KSample> samples;
    std::optional<DiagonalFit> fit;
    std::vector<std::string> warnings;
    bool pass = true;           // against configured criteria
    std::vector<std::string> failures;
};

/// Computes the scaled localized kernel for every k on the grid and compares
/// it entrywise against the model kernel (matching signature) or against zero
/// (signature mismatch); q = 0 with positive weights runs through the Gram
/// pipeline, everything else through the Galerkin pipeline.
ConvergenceReport convergence_scan(const ExperimentConfig& cfg, int threads = 1);

struct GapScan {
    std::vector<double> k;
    std::vector<double> scaled_gap;
    std::vector<double> unscaled_gap;  // k * scaled
    std::vector<int> kernel_dim;
    GapReport polynomial;
    std::optional<GapReport> exponential;  // all lambda_i > 0 only
    std::vector<std::string> warnings;     // e.g. truncation-limited readings
};

GapScan gap_scan(const ExperimentConfig& cfg, int threads = 1);

/// One full experiment: convergence scan, gap scan, diagonal fit; writes
/// report.json, per-k kernel grids (CSV), spectrum.csv and summary.txt into
/// out_dir. Returns the process exit code (0 pass, 1 criteria failed).
int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, bool strict,
                   int threads = 1);

/// Grid CSV row format: re z, im z (per coordinate), re w, im w, entry I,
/// entry J, re value, im value.
void write_kernel_csv(const std::string& path, int n, int q,
                      const std::vector<Point>& grid,
                      const std::function<KernelValue(const Point&, const Point&)>& kernel);

void write_spectrum_csv(const std::string& path,
                        const std::vector<std::tuple<int, int, std::vector<double>>>& spectra);

// building blocks shared by the CLI subcommands and the scans
ModelSpec model_spec_of(const ExperimentConfig& cfg);

/// Evaluator bundle for the Galerkin path at one k (modes below threshold).
struct GalerkinKernel {
    OscillatorBasis basis;
    SpectralData spec;
    double scaled_threshold = 0.0;

    KernelValue operator()(const Point& z, const Point& w) const {
        return spectral_projection_kernel(spec, basis, scaled_threshold, z, w);
    }
};

GalerkinKernel make_galerkin_kernel(const ExperimentConfig& cfg, int k);

}  // namespace bergman
