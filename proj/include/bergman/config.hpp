#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"

namespace bergman {

/// Parse error carrying the offending file position.
struct ConfigError : std::runtime_error {
    int line;
    int column;
    ConfigError(const std::string& msg, int line_, int col_);
};

/// Sectioned key/value text file. Keys may repeat within a section (the
/// values are kept in order); positions are retained for error reporting.
class ConfigFile {
  public:
    struct Entry {
        std::string value;
        int line;
        int column;
    };

    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& name = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    /// single-valued lookup; throws ConfigError when repeated
    std::optional<Entry> get(const std::string& section, const std::string& key) const;
    std::vector<Entry> get_all(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    const std::vector<std::string>& sections() const { return section_order_; }

  private:
    std::map<std::string, std::vector<std::pair<std::string, Entry>>> data_;
    std::vector<std::string> section_order_;
    std::string name_;
};

/// c_k threshold rules for spectral kernels.
struct ThresholdRule {
    enum class Kind { zero, sqrt, power, constant } kind = Kind::sqrt;
    double param = 0.0;   // d for power, the value for constant

    double unscaled(double k) const;                    // c_k
    double scaled(double k) const { return unscaled(k) / k; }
    std::string describe() const;
    /// limsup c_k/k = 0 and liminf k^d c_k > 0 feasibility note
    std::optional<std::string> constraint_warning() const;
};

/// Full description of one experiment (weight, metric, degree, k sweep,
/// comparison grid, numerical knobs, pass/fail criteria).
struct ExperimentConfig {
    WeightModel weight = WeightModel::quadratic(RVector::Ones(1));
    MetricModel metric;
    int q = 0;
    std::vector<int> k_list{1, 4, 16};
    double grid_radius = 1.5;
    int grid_points = 9;          // per real axis
    ThresholdRule threshold;
    int degree_cap = -1;          // -1: default by dimension
    int levels = -1;              // oscillator levels M, -1: default
    int quad_order = -1;
    double pivot_tol = 1e-10;
    double zero_tol = 1e-7;
    std::string out_dir = "out";

    // optional pass/fail criteria (run subcommand)
    std::optional<double> crit_dk_max;
    bool crit_dk_decreasing = false;
    std::optional<double> crit_diag_rel;   // relative error of the fitted coefficient
    std::optional<double> crit_slope_tol;  // |slope - n| tolerance
    std::optional<GapCriterion> crit_gap;

    int default_degree_cap() const { return degree_cap > 0 ? degree_cap : (weight.dim() == 1 ? 20 : 10); }
    int default_levels() const { return levels > 0 ? levels : (weight.dim() == 1 ? 24 : 10); }
    int default_quad_order() const { return quad_order > 0 ? quad_order : (weight.dim() == 1 ? 64 : 24); }
};

/// Parse and validate; throws ConfigError with explicit positions.
ExperimentConfig load_experiment(const ConfigFile& f);
ExperimentConfig load_experiment_file(const std::string& path);

/// Monomial expression parser, e.g. "0.05 z1^2 zb1^2" (coefficient followed
/// by z<i>^e / zb<i>^e factors).
PolyTerm parse_poly_term(const std::string& text, int n, int line, int column);

}  // namespace bergman
