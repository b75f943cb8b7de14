#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "inls/coefficient.hpp"
#include "inls/diagnostics.hpp"
#include "inls/error.hpp"
#include "inls/evolution.hpp"
#include "inls/params.hpp"
#include "inls/virial_weight.hpp"

namespace inls
{

enum class ProfileKind
{
    Gaussian,
    GroundState,
    Tabulated,
};

inline std::string_view to_string(ProfileKind k)
{
    switch (k) {
    case ProfileKind::Gaussian: return "gaussian";
    case ProfileKind::GroundState: return "ground_state";
    case ProfileKind::Tabulated: return "tabulated";
    }
    return "unknown";
}

inline ProfileKind profile_kind_from_string(std::string_view s)
{
    if (s == "gaussian") return ProfileKind::Gaussian;
    if (s == "ground_state") return ProfileKind::GroundState;
    if (s == "tabulated") return ProfileKind::Tabulated;
    throw ValidationError("initial", "unknown profile '" + std::string(s) + "'");
}

struct InitialSpec
{
    ProfileKind profile = ProfileKind::GroundState;
    double amplitude = 0.5; // Gaussian A
    double sigma = 1.0;
    double c = 0.9;
    double lambda = 1.0;
    double taper_start = 0.0;
    double taper_end = 0.0;
    std::string table; // path to (r, phi) samples

    bool operator==(const InitialSpec &) const = default;
};

struct GridSpec
{
    double r_max = 40.0;
    std::size_t n = 4096;

    bool operator==(const GridSpec &) const = default;
};

struct WeightSpec
{
    WeightKind kind = WeightKind::QuadraticCutoff;
    double scale = 10.0;

    bool operator==(const WeightSpec &) const = default;
};

struct ClassifierSpec
{
    double eta = 0.0;
    /// Virial-condition rho; empty selects the report's rho_max.
    std::optional<double> rho;
    /// Fraction of the run after which virial concavity is enforced.
    double transient_fraction = 0.1;

    bool operator==(const ClassifierSpec &) const = default;
};

struct OutputSpec
{
    std::string dir = "out";
    std::string prefix = "run";

    bool operator==(const OutputSpec &) const = default;
};

struct SweepSpec
{
    std::vector<double> amplitudes;
    std::vector<double> widths;
    std::vector<double> lambdas;

    bool empty() const { return amplitudes.empty() && widths.empty() && lambdas.empty(); }
    bool operator==(const SweepSpec &) const = default;
};

struct RunConfig
{
    double b = 1.0;
    CoefficientSpec coefficient;
    std::string coefficient_table; // path to (r, g) samples for tabulated g
    InitialSpec initial;
    GridSpec grid;
    EvolveControls controls;
    bool refine = false;
    WeightSpec weight;
    ClassifierSpec classifier;
    OutputSpec output;
    SweepSpec sweep;
    /// Directory relative table paths are resolved against.
    std::string base_dir;

    bool operator==(const RunConfig &) const = default;

    ProblemParams params() const { return ProblemParams::make(b); }
};

namespace detail
{

using FlatConfig = std::map<std::string, std::string>;

// Accepted keys per section; anything else is rejected.
inline const std::map<std::string, std::set<std::string>> &config_schema()
{
    static const std::map<std::string, std::set<std::string>> schema = {
        {"coefficient", {"family", "b", "a", "d", "c", "table"}},
        {"initial", {"profile", "amplitude", "sigma", "c", "lambda", "taper_start", "taper_end", "table"}},
        {"grid", {"r_max", "n"}},
        {"controls",
         {"dt0", "t_end", "blowup_grad_factor", "dt_floor", "record_every", "checkpoint_every", "scheme",
          "refine"}},
        {"weight", {"kind", "scale"}},
        {"classifier", {"eta", "rho", "transient_fraction"}},
        {"output", {"dir", "prefix"}},
        {"sweep", {"amplitudes", "widths", "lambdas"}},
    };
    return schema;
}

inline std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline double parse_number(const std::string &block, const std::string &key, const std::string &text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) {
            return v;
        }
    } catch (const std::exception &) {
    }
    throw ValidationError(block, "key '" + key + "' expects a number, got '" + text + "'");
}

inline std::size_t parse_count(const std::string &block, const std::string &key, const std::string &text)
{
    const double v = parse_number(block, key, text);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) {
        throw ValidationError(block, "key '" + key + "' expects a non-negative integer, got '" + text + "'");
    }
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string &block, const std::string &key, const std::string &text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ValidationError(block, "key '" + key + "' expects a boolean, got '" + text + "'");
}

inline std::vector<double> parse_list(const std::string &block, const std::string &key, const std::string &text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(parse_number(block, key, item));
        }
    }
    return out;
}

inline std::string join(const std::vector<double> &v)
{
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        out += (k ? ", " : "") + format_double(v[k]);
    }
    return out;
}

inline void check_keys(const FlatConfig &flat)
{
    const auto &schema = config_schema();
    for (const auto &[full, value] : flat) {
        const auto dot = full.find('.');
        if (dot == std::string::npos) {
            throw ValidationError("config", "key '" + full + "' is outside any section");
        }
        const std::string section = full.substr(0, dot);
        const std::string key = full.substr(dot + 1);
        const auto it = schema.find(section);
        if (it == schema.end()) {
            throw ValidationError(section, "unknown section '" + section + "'");
        }
        if (!it->second.contains(key)) {
            throw ValidationError(section, "unknown key '" + key + "'");
        }
    }
}

inline RunConfig from_flat(const FlatConfig &flat)
{
    check_keys(flat);
    RunConfig cfg;
    auto get = [&](const std::string &k) -> const std::string * {
        const auto it = flat.find(k);
        return it == flat.end() ? nullptr : &it->second;
    };
    auto num = [&](const std::string &section, const std::string &key, double &dst) {
        if (const auto *v = get(section + "." + key)) {
            dst = parse_number(section, key, *v);
        }
    };

    num("coefficient", "b", cfg.b);
    if (const auto *v = get("coefficient.family")) {
        try {
            cfg.coefficient.family = family_from_string(*v);
        } catch (const ParameterDomainError &e) {
            throw ValidationError("coefficient", e.what());
        }
    }
    num("coefficient", "a", cfg.coefficient.a);
    num("coefficient", "d", cfg.coefficient.d);
    num("coefficient", "c", cfg.coefficient.c);
    if (const auto *v = get("coefficient.table")) {
        cfg.coefficient_table = *v;
    }

    if (const auto *v = get("initial.profile")) {
        cfg.initial.profile = profile_kind_from_string(*v);
    }
    num("initial", "amplitude", cfg.initial.amplitude);
    num("initial", "sigma", cfg.initial.sigma);
    num("initial", "c", cfg.initial.c);
    num("initial", "lambda", cfg.initial.lambda);
    num("initial", "taper_start", cfg.initial.taper_start);
    num("initial", "taper_end", cfg.initial.taper_end);
    if (const auto *v = get("initial.table")) {
        cfg.initial.table = *v;
    }

    num("grid", "r_max", cfg.grid.r_max);
    if (const auto *v = get("grid.n")) {
        cfg.grid.n = parse_count("grid", "n", *v);
    }

    num("controls", "dt0", cfg.controls.dt0);
    num("controls", "t_end", cfg.controls.t_end);
    num("controls", "blowup_grad_factor", cfg.controls.blowup_grad_factor);
    num("controls", "dt_floor", cfg.controls.dt_floor);
    num("controls", "record_every", cfg.controls.record_every);
    num("controls", "checkpoint_every", cfg.controls.checkpoint_every);
    if (const auto *v = get("controls.scheme")) {
        cfg.controls.scheme = scheme_from_string(*v);
    }
    if (const auto *v = get("controls.refine")) {
        cfg.refine = parse_bool("controls", "refine", *v);
    }

    if (const auto *v = get("weight.kind")) {
        try {
            cfg.weight.kind = weight_kind_from_string(*v);
        } catch (const ParameterDomainError &e) {
            throw ValidationError("weight", e.what());
        }
    }
    num("weight", "scale", cfg.weight.scale);

    num("classifier", "eta", cfg.classifier.eta);
    if (const auto *v = get("classifier.rho")) {
        cfg.classifier.rho = parse_number("classifier", "rho", *v);
    }
    num("classifier", "transient_fraction", cfg.classifier.transient_fraction);

    if (const auto *v = get("output.dir")) {
        cfg.output.dir = *v;
    }
    if (const auto *v = get("output.prefix")) {
        cfg.output.prefix = *v;
    }

    if (const auto *v = get("sweep.amplitudes")) {
        cfg.sweep.amplitudes = parse_list("sweep", "amplitudes", *v);
    }
    if (const auto *v = get("sweep.widths")) {
        cfg.sweep.widths = parse_list("sweep", "widths", *v);
    }
    if (const auto *v = get("sweep.lambdas")) {
        cfg.sweep.lambdas = parse_list("sweep", "lambdas", *v);
    }
    return cfg;
}

inline std::string json_scalar(const nlohmann::json &v, const std::string &section, const std::string &key)
{
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "true" : "false";
    }
    if (v.is_number_integer() || v.is_number_unsigned()) {
        return std::to_string(v.get<long long>());
    }
    if (v.is_number()) {
        return format_double(v.get<double>());
    }
    throw ValidationError(section, "key '" + key + "' must be a scalar");
}

} // namespace detail

/// Checks every block for values its owning module would reject, naming the
/// block in the error.
inline void validate(const RunConfig &cfg)
{
    try {
        (void)ProblemParams::make(cfg.b);
    } catch (const ParameterDomainError &e) {
        throw ValidationError("coefficient", e.what());
    }
    const auto &c = cfg.coefficient;
    if (c.family == Family::Rational && !(c.a > 0.0 && c.c > 0.0 && c.d >= 0.0 && c.d <= c.c)) {
        throw ValidationError("coefficient", "rational family needs a > 0, c > 0, 0 <= d <= c");
    }
    if (c.family == Family::PiecewisePlateau && !(c.a >= 0.0 && c.a < 2.0 - cfg.b + 1.0)) {
        throw ValidationError("coefficient", "plateau family needs 0 <= a < p0 + 1");
    }
    if (c.family == Family::Tabulated && cfg.coefficient_table.empty() && c.table_r.empty()) {
        throw ValidationError("coefficient", "tabulated family needs a table");
    }
    if (!(cfg.grid.r_max > 0.0) || !std::isfinite(cfg.grid.r_max)) {
        throw ValidationError("grid", "r_max must be positive");
    }
    if (cfg.grid.n == 0) {
        throw ValidationError("grid", "n must be at least 1");
    }
    const auto &in = cfg.initial;
    switch (in.profile) {
    case ProfileKind::Gaussian:
        if (!(in.amplitude >= 0.0) || !(in.sigma > 0.0)) {
            throw ValidationError("initial", "gaussian needs amplitude >= 0 and sigma > 0");
        }
        break;
    case ProfileKind::GroundState:
        if (!(in.c >= 0.0) || !(in.lambda > 0.0)) {
            throw ValidationError("initial", "ground_state needs c >= 0 and lambda > 0");
        }
        break;
    case ProfileKind::Tabulated:
        if (in.table.empty()) {
            throw ValidationError("initial", "tabulated profile needs a table");
        }
        break;
    }
    cfg.controls.validate();
    if (cfg.weight.kind == WeightKind::Custom) {
        throw ValidationError("weight", "custom weights cannot be configured from a file");
    }
    if (cfg.weight.kind != WeightKind::Unbounded && !(cfg.weight.scale > 0.0)) {
        throw ValidationError("weight", "scale must be positive");
    }
    if (!(cfg.classifier.eta >= 0.0)) {
        throw ValidationError("classifier", "eta must be >= 0");
    }
    if (cfg.classifier.rho && !(*cfg.classifier.rho >= 0.0)) {
        throw ValidationError("classifier", "rho must be >= 0");
    }
    if (!(cfg.classifier.transient_fraction >= 0.0 && cfg.classifier.transient_fraction < 1.0)) {
        throw ValidationError("classifier", "transient_fraction must lie in [0, 1)");
    }
    if (cfg.output.prefix.empty() || cfg.output.prefix.find('/') != std::string::npos) {
        throw ValidationError("output", "prefix must be a non-empty file name stem");
    }
}

inline RunConfig parse_ini(const std::string &text)
{
    boost::property_tree::ptree tree;
    std::istringstream is(text);
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ValidationError("config", std::string("INI syntax: ") + e.message() + " at line " +
                                            std::to_string(e.line()));
    }
    detail::FlatConfig flat;
    for (const auto &[section, body] : tree) {
        if (body.empty()) {
            flat[section] = body.data();
            continue;
        }
        for (const auto &[key, value] : body) {
            if (!value.empty()) {
                throw ValidationError(section, "nested key '" + key + "'");
            }
            flat[section + "." + key] = detail::trim(value.data());
        }
    }
    return detail::from_flat(flat);
}

inline RunConfig parse_json(const std::string &text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError("config", std::string("JSON syntax: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("config", "top level must be an object of sections");
    }
    detail::FlatConfig flat;
    for (const auto &[section, body] : doc.items()) {
        if (!body.is_object()) {
            throw ValidationError(section, "section must be an object");
        }
        for (const auto &[key, value] : body.items()) {
            if (value.is_array()) {
                std::string joined;
                for (std::size_t k = 0; k < value.size(); ++k) {
                    joined += (k ? "," : "") + detail::json_scalar(value[k], section, key);
                }
                flat[section + "." + key] = joined;
            } else {
                flat[section + "." + key] = detail::json_scalar(value, section, key);
            }
        }
    }
    return detail::from_flat(flat);
}

/// Canonical INI text. Parsing it gives back an equal config, and the text
/// of that config is identical, which is what the config hash relies on.
inline std::string to_ini(const RunConfig &cfg, bool include_output = true)
{
    std::ostringstream os;
    auto num = [&](const char *key, double v) { os << key << " = " << format_double(v) << '\n'; };
    os << "[coefficient]\n";
    os << "family = " << to_string(cfg.coefficient.family) << '\n';
    num("b", cfg.b);
    num("a", cfg.coefficient.a);
    num("d", cfg.coefficient.d);
    num("c", cfg.coefficient.c);
    if (!cfg.coefficient_table.empty()) {
        os << "table = " << cfg.coefficient_table << '\n';
    }
    os << "\n[initial]\n";
    os << "profile = " << to_string(cfg.initial.profile) << '\n';
    num("amplitude", cfg.initial.amplitude);
    num("sigma", cfg.initial.sigma);
    num("c", cfg.initial.c);
    num("lambda", cfg.initial.lambda);
    num("taper_start", cfg.initial.taper_start);
    num("taper_end", cfg.initial.taper_end);
    if (!cfg.initial.table.empty()) {
        os << "table = " << cfg.initial.table << '\n';
    }
    os << "\n[grid]\n";
    num("r_max", cfg.grid.r_max);
    os << "n = " << cfg.grid.n << '\n';
    os << "\n[controls]\n";
    num("dt0", cfg.controls.dt0);
    num("t_end", cfg.controls.t_end);
    num("blowup_grad_factor", cfg.controls.blowup_grad_factor);
    num("dt_floor", cfg.controls.dt_floor);
    num("record_every", cfg.controls.record_every);
    num("checkpoint_every", cfg.controls.checkpoint_every);
    os << "scheme = " << to_string(cfg.controls.scheme) << '\n';
    os << "refine = " << (cfg.refine ? "true" : "false") << '\n';
    os << "\n[weight]\n";
    os << "kind = " << to_string(cfg.weight.kind) << '\n';
    num("scale", cfg.weight.scale);
    os << "\n[classifier]\n";
    num("eta", cfg.classifier.eta);
    if (cfg.classifier.rho) {
        num("rho", *cfg.classifier.rho);
    }
    num("transient_fraction", cfg.classifier.transient_fraction);
    if (include_output) {
        os << "\n[output]\n";
        os << "dir = " << cfg.output.dir << '\n';
        os << "prefix = " << cfg.output.prefix << '\n';
    }
    if (!cfg.sweep.empty()) {
        os << "\n[sweep]\n";
        if (!cfg.sweep.amplitudes.empty()) {
            os << "amplitudes = " << detail::join(cfg.sweep.amplitudes) << '\n';
        }
        if (!cfg.sweep.widths.empty()) {
            os << "widths = " << detail::join(cfg.sweep.widths) << '\n';
        }
        if (!cfg.sweep.lambdas.empty()) {
            os << "lambdas = " << detail::join(cfg.sweep.lambdas) << '\n';
        }
    }
    return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hash of the physics: the canonical text without the output block, so
/// the same run sent to another directory keeps its hash.
inline std::uint64_t config_hash(const RunConfig &cfg) { return fnv1a(to_ini(cfg, false)); }

inline std::string hash_hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Reads a config file; ".json" selects JSON, anything else INI.
inline RunConfig load_config(const std::filesystem::path &path)
{
    std::ifstream is(path);
    if (!is) {
        throw ValidationError("config", "cannot open " + path.string());
    }
    std::stringstream ss;
    ss << is.rdbuf();
    RunConfig cfg = path.extension() == ".json" ? parse_json(ss.str()) : parse_ini(ss.str());
    cfg.base_dir = path.parent_path().string();
    return cfg;
}

/// Two-column numeric table (r, value); a non-numeric first line is a header.
inline std::pair<std::vector<double>, std::vector<double>> read_table(const std::filesystem::path &path,
                                                                      const std::string &block)
{
    std::ifstream is(path);
    if (!is) {
        throw ValidationError(block, "cannot open table " + path.string());
    }
    std::vector<double> r;
    std::vector<double> v;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        for (auto &ch : line) {
            if (ch == ',' || ch == '\t' || ch == ';') {
                ch = ' ';
            }
        }
        std::istringstream ls(line);
        double a = 0.0;
        double b = 0.0;
        if (!(ls >> a >> b)) {
            if (first) {
                first = false;
                continue;
            }
            throw ValidationError(block, "bad table row '" + line + "' in " + path.string());
        }
        first = false;
        r.push_back(a);
        v.push_back(b);
    }
    return {r, v};
}

/// Resolves a table path against the config's directory.
inline std::filesystem::path resolve(const RunConfig &cfg, const std::string &path)
{
    std::filesystem::path p(path);
    if (p.is_absolute() || cfg.base_dir.empty()) {
        return p;
    }
    return std::filesystem::path(cfg.base_dir) / p;
}

} // namespace inls
