// Command-line front end: coefficient checks, ground state, shooting,
// evolution with verdicts, sweeps and the acceptance suite.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "inls/acceptance.hpp"
#include "inls/config.hpp"
#include "inls/harness.hpp"
#include "inls/shooting.hpp"

namespace
{

struct Globals
{
    std::string config;
    bool json = false;
    std::string out;
    unsigned threads = 1;
    bool refine = false;
};

inls::RunConfig load(const Globals &g)
{
    return g.config.empty() ? inls::RunConfig{} : inls::load_config(g.config);
}

std::optional<std::string> out_flag(const Globals &g)
{
    return g.out.empty() ? std::nullopt : std::optional<std::string>(g.out);
}

void print_flat(const nlohmann::json &j, const std::string &prefix = "")
{
    for (const auto &[key, value] : j.items()) {
        const auto name = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) {
            print_flat(value, name);
        } else if (value.is_number_float()) {
            std::cout << name << '=' << inls::format_double(value.get<double>()) << '\n';
        } else if (value.is_string()) {
            std::cout << name << '=' << value.get<std::string>() << '\n';
        } else {
            std::cout << name << '=' << value.dump() << '\n';
        }
    }
}

int check_coefficient(const Globals &g, std::optional<double> b)
{
    auto cfg = load(g);
    if (b) {
        cfg.b = *b;
    }
    inls::validate(cfg);
    const auto coef = inls::build_coefficient(cfg);
    const auto report = inls::build_report(coef, cfg.classifier);
    auto j = inls::to_json(report);
    j = {{"family", inls::to_string(coef.family())}, {"b", cfg.b}, {"report", j}};
    if (g.json) {
        std::cout << j.dump(2) << '\n';
    } else {
        print_flat(j);
    }
    return 0;
}

int ground_state(const Globals &g, std::optional<double> b)
{
    auto cfg = load(g);
    const double bb = b ? *b : cfg.b;
    const inls::GroundState gs(inls::ProblemParams::make(bb));
    const auto j = inls::to_json(inls::summarize(gs));
    if (g.json) {
        std::cout << j.dump(2) << '\n';
    } else {
        print_flat(j);
    }
    return 0;
}

int shoot(const Globals &g, std::optional<double> b, double q0, double r_max)
{
    auto cfg = load(g);
    if (b) {
        cfg.b = *b;
    }
    inls::validate(cfg);
    const auto coef = inls::build_coefficient(cfg);
    inls::ShootingResult result;
    try {
        result = inls::shoot(coef, q0, r_max);
    } catch (const inls::ShootingFailure &e) {
        std::cerr << "shoot: " << e.what() << " (partial trajectory follows)\n";
        result = e.partial();
    }
    std::cout << "r,Q,Qprime,H,V_int,V_bdry\n";
    for (const auto &pt : result.trajectory) {
        std::cout << inls::format_double(pt.r) << ',' << inls::format_double(pt.Q) << ','
                  << inls::format_double(pt.dQ) << ',' << inls::format_double(pt.H) << ','
                  << inls::format_double(pt.V) << ','
                  << inls::format_double(inls::pohozaev_boundary(coef, pt.r, pt.Q, pt.dQ)) << '\n';
    }
    if (result.first_zero) {
        std::cerr << "first zero at r = " << inls::format_double(*result.first_zero) << '\n';
    } else {
        std::cerr << "no zero before r = " << inls::format_double(r_max) << '\n';
    }
    return 0;
}

int evolve(const Globals &g, const std::string &resume)
{
    const auto cfg = load(g);
    inls::RunOptions opts;
    opts.out_dir = out_flag(g);
    opts.refine = g.refine;
    if (!resume.empty()) {
        opts.resume = resume;
    }
    const auto rec = inls::run_scenario(cfg, opts);
    if (g.json) {
        std::cout << inls::to_json(rec.verdict, rec.assessment).dump(2) << '\n';
    } else {
        std::cout << "region=" << inls::to_string(rec.assessment.region) << '\n'
                  << "verdict=" << inls::to_string(rec.verdict.kind) << '\n'
                  << "stop_reason=" << inls::to_string(rec.stop_reason) << '\n'
                  << "stop_time=" << inls::format_double(rec.stop_time) << '\n'
                  << "truncation_flag=" << (rec.truncation_flag ? "true" : "false") << '\n';
        for (const auto &r : rec.verdict.reasons) {
            std::cout << "reason=" << r << '\n';
        }
        std::cout << "diagnostics=" << rec.files.diagnostics << '\n' << "verdict_json=" << rec.files.verdict << '\n';
    }
    const bool truncated = rec.verdict.kind == inls::VerdictKind::Inconclusive && rec.truncation_flag;
    return truncated ? 2 : 0;
}

int sweep(const Globals &g)
{
    const auto cfg = load(g);
    inls::RunOptions opts;
    opts.out_dir = out_flag(g);
    opts.refine = g.refine;
    const auto result = inls::sweep(cfg, opts, g.threads);
    if (g.json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto &r : result.rows) {
            rows.push_back({{"index", r.index},
                            {"amplitude", r.point.amplitude},
                            {"width", r.point.width},
                            {"lambda", r.point.lambda},
                            {"region", r.assessment ? std::string(inls::to_string(r.assessment->region)) : ""},
                            {"verdict", r.verdict},
                            {"error", r.error}});
        }
        std::cout << nlohmann::json{{"table", result.table_path}, {"rows", rows}}.dump(2) << '\n';
    } else {
        std::cout << inls::phase_table(result.rows);
        std::cerr << "phase table: " << result.table_path << '\n';
    }
    return 0;
}

int verify(const Globals &g, double dt_scale, const std::vector<int> &only)
{
    inls::AcceptanceOptions opts;
    opts.dt_scale = dt_scale;
    opts.only.insert(only.begin(), only.end());
    if (!g.config.empty()) {
        try {
            opts.test_config = inls::load_config(g.config);
        } catch (const inls::ValidationError &e) {
            std::cout << "criterion 0 [test config validation]: FAIL - validation failure: " << e.what() << '\n';
            return 1;
        }
    }
    if (!g.json) {
        opts.on_result = [](const inls::CriterionResult &r) { std::cout << inls::format_result(r) << std::endl; };
    }
    const auto report = inls::verify(opts);
    if (g.json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto &r : report.results) {
            rows.push_back(
                {{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"measured", r.measured}, {"seconds", r.seconds}});
        }
        std::cout << nlohmann::json{{"all_pass", report.all_pass()}, {"criteria", rows}}.dump(2) << '\n';
    } else {
        std::cout << (report.all_pass() ? "ALL PASS" : "FAILURES PRESENT") << '\n';
    }
    return report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Radial energy-critical inhomogeneous NLS toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Run config (.ini, or .json)");
    app.add_flag("--json", g.json, "Machine-readable output");
    app.add_option("--out", g.out, "Output directory (overrides INLS_OUT_DIR and the config)");
    app.add_option("--threads", g.threads, "Concurrent sweep runs")->check(CLI::PositiveNumber);
    app.add_flag("--refine", g.refine, "Run a doubled-resolution companion for the verdict");

    std::optional<double> b;
    auto *cc = app.add_subcommand("check-coefficient", "Evaluate the structural conditions on g");
    cc->add_option("--b", b, "Override b");
    auto *gs = app.add_subcommand("ground-state", "Closed-form ground-state integrals");
    gs->add_option("--b", b, "Override b");
    double q0 = 1.0;
    double r_max = 100.0;
    auto *sh = app.add_subcommand("shoot", "Integrate the radial ground-state ODE, CSV on stdout");
    sh->add_option("--b", b, "Override b");
    sh->add_option("--q0", q0, "Height Q(0)")->capture_default_str();
    sh->add_option("--r-max", r_max, "Outer radius")->capture_default_str();
    std::string resume;
    auto *ev = app.add_subcommand("evolve", "Run one scenario and issue a verdict");
    ev->add_option("--resume", resume, "Continue from a checkpoint file");
    auto *sw = app.add_subcommand("sweep", "Run the sweep block and write a phase table");
    double dt_scale = 1.0;
    std::vector<int> only;
    auto *vf = app.add_subcommand("verify", "Run the acceptance suite");
    vf->add_option("--dt-scale", dt_scale, "Multiply the conservation time steps (fault injection)");
    vf->add_option("--only", only, "Criteria to run");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*cc) return check_coefficient(g, b);
        if (*gs) return ground_state(g, b);
        if (*sh) return shoot(g, b, q0, r_max);
        if (*ev) return evolve(g, resume);
        if (*sw) return sweep(g);
        if (*vf) return verify(g, dt_scale, only);
    } catch (const inls::ValidationError &e) {
        std::cerr << "validation error in [" << e.block() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
