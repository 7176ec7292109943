#include "bergman/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace bergman {

static std::string position_tag(const std::string& msg, int line, int col) {
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": " << msg;
    return os.str();
}

ConfigError::ConfigError(const std::string& msg, int line_, int col_)
    : std::runtime_error(position_tag(msg, line_, col_)), line(line_), column(col_) {}

static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
    ConfigFile f;
    f.name_ = name;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("unterminated section header", lineno,
                                  static_cast<int>(raw.find('[')) + 1);
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", lineno, 1);
            if (!f.data_.count(section)) f.section_order_.push_back(section);
            f.data_[section];
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", lineno,
                              static_cast<int>(raw.find_first_not_of(" \t")) + 1);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", lineno, 1);
        if (section.empty())
            throw ConfigError("key outside any [section]", lineno, 1);
        int col = static_cast<int>(raw.find(key)) + 1;
        f.data_[section].push_back({key, Entry{value, lineno, col}});
    }
    return f;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = data_.find(section);
    if (it == data_.end()) return false;
    for (const auto& [k, e] : it->second)
        if (k == key) return true;
    return false;
}

std::optional<ConfigFile::Entry> ConfigFile::get(const std::string& section,
                                                 const std::string& key) const {
    auto all = get_all(section, key);
    if (all.empty()) return std::nullopt;
    if (all.size() > 1)
        throw ConfigError("key '" + key + "' in [" + section + "] given more than once",
                          all[1].line, all[1].column);
    return all[0];
}

std::vector<ConfigFile::Entry> ConfigFile::get_all(const std::string& section,
                                                   const std::string& key) const {
    std::vector<Entry> out;
    auto it = data_.find(section);
    if (it == data_.end()) return out;
    for (const auto& [k, e] : it->second)
        if (k == key) out.push_back(e);
    return out;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    auto e = get(section, key);
    return e ? e->value : fallback;
}

double ThresholdRule::unscaled(double k) const {
    switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::sqrt: return std::sqrt(k);
        case Kind::power: return std::pow(k, -param);
        case Kind::constant: return param;
    }
    return 0.0;
}

std::string ThresholdRule::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::zero: os << "zero"; break;
        case Kind::sqrt: os << "sqrt"; break;
        case Kind::power: os << "power(" << param << ")"; break;
        case Kind::constant: os << "constant(" << param << ")"; break;
    }
    return os.str();
}

std::optional<std::string> ThresholdRule::constraint_warning() const {
    // needs limsup c_k/k = 0 and liminf k^d c_k > 0 for some integer d >= 0
    if (kind == Kind::power && param < 0.0)
        return "power rule with negative exponent grows like k^" + std::to_string(-param) +
               "; c_k/k -> 0 requires exponent > -1";
    return std::nullopt;
}

static double parse_double(const ConfigFile::Entry& e, const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(e.value, &pos);
        while (pos < e.value.size() && std::isspace(static_cast<unsigned char>(e.value[pos]))) ++pos;
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " from '" + e.value + "'", e.line, e.column);
    }
}

static int parse_int(const ConfigFile::Entry& e, const std::string& what) {
    double v = parse_double(e, what);
    if (std::floor(v) != v) throw ConfigError(what + " must be an integer", e.line, e.column);
    return static_cast<int>(v);
}

static std::vector<double> parse_list(const ConfigFile::Entry& e, const std::string& what) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty element in " + what, e.line, e.column);
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse element '" + item + "' of " + what, e.line, e.column);
        }
    }
    if (out.empty()) throw ConfigError(what + " is empty", e.line, e.column);
    return out;
}

PolyTerm parse_poly_term(const std::string& text, int n, int line, int column) {
    std::istringstream in(text);
    double coeff;
    if (!(in >> coeff))
        throw ConfigError("perturbation term must start with a coefficient: '" + text + "'",
                          line, column);
    PolyTerm t;
    t.coeff = coeff;
    t.a = MultiIndex(std::vector<int>(static_cast<size_t>(n), 0));
    t.b = t.a;
    std::string tok;
    while (in >> tok) {
        bool bar = false;
        size_t p = 0;
        if (tok.rfind("zb", 0) == 0) {
            bar = true;
            p = 2;
        } else if (tok.rfind("z", 0) == 0) {
            p = 1;
        } else {
            throw ConfigError("expected z<i> or zb<i> factor, got '" + tok + "'", line, column);
        }
        size_t caret = tok.find('^');
        std::string idx_s = tok.substr(p, caret == std::string::npos ? std::string::npos : caret - p);
        int e = 1;
        try {
            if (caret != std::string::npos) e = std::stoi(tok.substr(caret + 1));
            int ci = std::stoi(idx_s);
            if (ci < 1 || ci > n) throw std::out_of_range("coordinate index");
            if (e < 0) throw std::out_of_range("exponent");
            (bar ? t.b : t.a).exponents[static_cast<size_t>(ci - 1)] += e;
        } catch (const std::exception&) {
            throw ConfigError("malformed factor '" + tok + "'", line, column);
        }
    }
    return t;
}

ExperimentConfig load_experiment(const ConfigFile& f) {
    auto lam_entry = f.get("weight", "lambdas");
    if (!lam_entry) throw ConfigError("[weight] lambdas is required", 1, 1);
    auto lam_list = parse_list(*lam_entry, "lambdas");
    RVector lambdas(static_cast<Eigen::Index>(lam_list.size()));
    for (size_t i = 0; i < lam_list.size(); ++i) lambdas[static_cast<Eigen::Index>(i)] = lam_list[i];
    int n = static_cast<int>(lam_list.size());

    Polynomial pert(n);
    for (const auto& e : f.get_all("weight", "pert"))
        pert.terms.push_back(parse_poly_term(e.value, n, e.line, e.column));

    double radius = std::numeric_limits<double>::infinity();
    if (auto e = f.get("weight", "radius")) {
        if (e->value != "inf") radius = parse_double(*e, "radius");
    }
    ExperimentConfig cfg;
    try {
        cfg.weight = WeightModel(lambdas, pert, radius);
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("invalid [weight]: ") + ex.what(), lam_entry->line,
                          lam_entry->column);
    }

    std::string mkind = f.get_or("metric", "kind", "flat");
    if (mkind == "flat") {
        cfg.metric = MetricModel(n);
    } else {
        throw ConfigError("unknown [metric] kind '" + mkind + "' (use 'flat' or pert entries)",
                          1, 1);
    }
    std::vector<std::tuple<int, int, PolyTerm>> mterms;
    for (const auto& e : f.get_all("metric", "pert")) {
        // format: i j <term>
        std::istringstream in(e.value);
        int i, j;
        if (!(in >> i >> j))
            throw ConfigError("metric pert needs 'i j coeff factors...'", e.line, e.column);
        std::string rest;
        std::getline(in, rest);
        mterms.emplace_back(i, j, parse_poly_term(trim(rest), n, e.line, e.column));
    }
    if (!mterms.empty()) {
        try {
            cfg.metric = MetricModel(n, mterms);
        } catch (const std::exception& ex) {
            throw ConfigError(std::string("invalid [metric]: ") + ex.what(), 1, 1);
        }
    }

    if (auto e = f.get("experiment", "q")) cfg.q = parse_int(*e, "q");
    if (cfg.q < 0 || cfg.q > n) {
        auto e = f.get("experiment", "q");
        throw ConfigError("q must satisfy 0 <= q <= n", e ? e->line : 1, e ? e->column : 1);
    }
    if (auto e = f.get("experiment", "k_list")) {
        cfg.k_list.clear();
        for (double v : parse_list(*e, "k_list")) {
            if (v < 1.0 || std::floor(v) != v)
                throw ConfigError("k_list entries must be positive integers", e->line, e->column);
            cfg.k_list.push_back(static_cast<int>(v));
        }
        for (size_t i = 0; i + 1 < cfg.k_list.size(); ++i)
            if (cfg.k_list[i] >= cfg.k_list[i + 1])
                throw ConfigError("k_list must be strictly increasing", e->line, e->column);
    }

    if (auto e = f.get("grid", "radius")) cfg.grid_radius = parse_double(*e, "grid radius");
    if (auto e = f.get("grid", "points")) cfg.grid_points = parse_int(*e, "grid points");
    if (cfg.grid_points < 2) {
        auto e = f.get("grid", "points");
        throw ConfigError("grid points must be >= 2", e ? e->line : 1, e ? e->column : 1);
    }
    // grid stays inside the validity radius after the 1/sqrt(k) rescale
    double kmin = static_cast<double>(cfg.k_list.front());
    if (cfg.grid_radius > cfg.weight.validity_radius() * std::sqrt(kmin)) {
        auto e = f.get("grid", "radius");
        throw ConfigError("grid radius exceeds validity radius * sqrt(k_min)", e ? e->line : 1,
                          e ? e->column : 1);
    }

    if (auto e = f.get("thresholds", "rule")) {
        const std::string& v = e->value;
        if (v == "zero")
            cfg.threshold.kind = ThresholdRule::Kind::zero;
        else if (v == "sqrt")
            cfg.threshold.kind = ThresholdRule::Kind::sqrt;
        else if (v.rfind("power:", 0) == 0) {
            cfg.threshold.kind = ThresholdRule::Kind::power;
            try {
                cfg.threshold.param = std::stod(v.substr(6));
            } catch (const std::exception&) {
                throw ConfigError("malformed power rule '" + v + "'", e->line, e->column);
            }
        } else if (v.rfind("constant:", 0) == 0) {
            cfg.threshold.kind = ThresholdRule::Kind::constant;
            try {
                cfg.threshold.param = std::stod(v.substr(9));
            } catch (const std::exception&) {
                throw ConfigError("malformed constant rule '" + v + "'", e->line, e->column);
            }
        } else {
            throw ConfigError("unknown threshold rule '" + v +
                                  "' (zero | sqrt | power:<d> | constant:<v>)",
                              e->line, e->column);
        }
    }

    if (auto e = f.get("numerics", "degree_cap")) cfg.degree_cap = parse_int(*e, "degree_cap");
    if (auto e = f.get("numerics", "levels")) cfg.levels = parse_int(*e, "levels");
    if (auto e = f.get("numerics", "quad_order")) cfg.quad_order = parse_int(*e, "quad_order");
    if (auto e = f.get("numerics", "pivot_tol")) cfg.pivot_tol = parse_double(*e, "pivot_tol");
    if (auto e = f.get("numerics", "zero_tol")) cfg.zero_tol = parse_double(*e, "zero_tol");
    if (auto e = f.get("output", "dir")) cfg.out_dir = e->value;

    if (auto e = f.get("criteria", "dk_max")) cfg.crit_dk_max = parse_double(*e, "dk_max");
    if (auto e = f.get("criteria", "dk_decreasing"))
        cfg.crit_dk_decreasing = (e->value == "true" || e->value == "1");
    if (auto e = f.get("criteria", "diag_rel")) cfg.crit_diag_rel = parse_double(*e, "diag_rel");
    if (auto e = f.get("criteria", "slope_tol")) cfg.crit_slope_tol = parse_double(*e, "slope_tol");
    if (auto e = f.get("criteria", "gap_mode")) {
        GapCriterion gc;
        const std::string& v = e->value;
        if (v == "polynomial")
            gc.kind = GapCriterion::Kind::polynomial;
        else if (v == "exponential")
            gc.kind = GapCriterion::Kind::exponential;
        else
            throw ConfigError("gap_mode must be polynomial or exponential", e->line, e->column);
        if (auto ed = f.get("criteria", "gap_d")) gc.d = parse_double(*ed, "gap_d");
        if (auto ec = f.get("criteria", "gap_C")) gc.C = parse_double(*ec, "gap_C");
        if (auto ec = f.get("criteria", "gap_c")) gc.c = parse_double(*ec, "gap_c");
        gc.lambda_min = cfg.weight.lambdas().minCoeff();
        cfg.crit_gap = gc;
    }
    return cfg;
}

ExperimentConfig load_experiment_file(const std::string& path) {
    return load_experiment(ConfigFile::parse_file(path));
}

}  // namespace bergman
