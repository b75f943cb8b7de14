#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "inls/classifier.hpp"
#include "inls/coefficient.hpp"
#include "inls/config.hpp"
#include "inls/diagnostics.hpp"
#include "inls/evolution.hpp"
#include "inls/ground_state.hpp"
#include "inls/harness.hpp"
#include "inls/shooting.hpp"

namespace inls
{

struct CriterionResult
{
    int id = 0;
    std::string name;
    bool pass = false;
    std::string measured;
    double seconds = 0.0;
};

struct AcceptanceReport
{
    std::vector<CriterionResult> results;

    bool all_pass() const
    {
        return !results.empty() &&
               std::all_of(results.begin(), results.end(), [](const CriterionResult &r) { return r.pass; });
    }
    const CriterionResult *find(int id) const
    {
        for (const auto &r : results) {
            if (r.id == id) {
                return &r;
            }
        }
        return nullptr;
    }
};

struct AcceptanceOptions
{
    /// Multiplies every time step of the conservation runs (fault injection).
    double dt_scale = 1.0;
    /// Extra config validated before the suite; a failure is reported as
    /// criterion 0.
    std::optional<RunConfig> test_config;
    /// Criteria to run; empty runs all of them.
    std::set<int> only;
    /// Progress lines as each criterion finishes.
    std::function<void(const CriterionResult &)> on_result;
};

namespace acceptance
{

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline const std::vector<double> &b_set()
{
    static const std::vector<double> v = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
    return v;
}

inline CriterionResult ground_state_closed_form()
{
    const GroundState gs(ProblemParams::make(1.0));
    const double eg = rel(gs.grad_norm_sq(), 8.0 * std::numbers::pi / 3.0);
    const double ee = rel(gs.threshold_energy(), 2.0 * std::numbers::pi / 3.0);
    return {1, "ground-state closed form", eg <= 1e-8 && ee <= 1e-8,
            "rel err grad_norm_sq " + fmt(eg) + ", threshold_energy " + fmt(ee) + " (tol 1e-8)"};
}

inline CriterionResult pohozaev_balance()
{
    double worst = 0.0;
    for (double b : b_set()) {
        const GroundState gs(ProblemParams::make(b));
        worst = std::max(worst, rel(gs.potential_integral(), gs.grad_norm_sq()));
    }
    return {2, "Pohozaev balance", worst <= 1e-8, "max rel imbalance " + fmt(worst) + " (tol 1e-8)"};
}

inline CriterionResult ode_residual_check()
{
    double worst = 0.0;
    const auto radii = log_grid(1e-3, 1e3, 1000);
    for (double b : b_set()) {
        const GroundState gs(ProblemParams::make(b));
        for (double r : radii) {
            worst = std::max(worst, std::abs(ode_residual(gs, r)));
        }
    }
    return {3, "ODE residual", worst <= 1e-10, "max |residual| " + fmt(worst) + " (tol 1e-10)"};
}

inline CriterionResult shooting_consistency()
{
    const auto params = ProblemParams::make(1.0);
    const auto g = Coefficient::pure_power(params);
    const GroundState gs(params);
    const auto shot = shoot(g, 1.0, 100.0);
    double worst = 0.0;
    for (const auto &pt : shot.trajectory) {
        if (pt.r >= 1e-6 && pt.r <= 100.0) {
            worst = std::max(worst, rel(pt.Q, gs.Q(pt.r)));
        }
    }
    const bool match = !shot.first_zero && worst <= 1e-6;

    const auto half = ProblemParams::make(0.5);
    const auto rational = Coefficient::rational(1.0, 0.0, 1.0, half);
    std::ostringstream zeros;
    bool all_zero = true;
    for (double q0 : {0.5, 1.0, 2.0, 5.0}) {
        const auto s = shoot(rational, q0, 1e4);
        zeros << (zeros.tellp() > 0 ? ", " : "") << "Q0=" << q0 << ": ";
        if (s.first_zero) {
            zeros << fmt(*s.first_zero);
        } else {
            zeros << "none";
            all_zero = false;
        }
    }
    return {4, "shooting consistency", match && all_zero,
            "pure power max rel err " + fmt(worst) + " (tol 1e-6); first zeros " + zeros.str()};
}

struct ConservationRun
{
    std::vector<DiagnosticsRecord> series;
    double mass_drift = 0.0;
    double energy_drift = 0.0;
};

inline RunConfig conservation_config(double dt0)
{
    RunConfig cfg;
    cfg.b = 1.0;
    cfg.coefficient.family = Family::PurePower;
    cfg.initial.profile = ProfileKind::Gaussian;
    cfg.initial.amplitude = 0.5;
    cfg.initial.sigma = 1.0;
    cfg.grid = {40.0, 4096};
    cfg.controls.dt0 = dt0;
    cfg.controls.t_end = 1.0;
    cfg.controls.record_every = 0.01;
    cfg.weight.kind = WeightKind::Unbounded;
    return cfg;
}

inline ConservationRun conservation_run(double dt0)
{
    RunOptions opts;
    opts.write_files = false;
    auto rec = run_scenario(conservation_config(dt0), opts);
    ConservationRun out{std::move(rec.series), 0.0, 0.0};
    const auto &s0 = out.series.front();
    for (const auto &r : out.series) {
        out.mass_drift = std::max(out.mass_drift, rel(r.mass, s0.mass));
        out.energy_drift = std::max(out.energy_drift, rel(r.energy, s0.energy));
    }
    return out;
}

inline CriterionResult conservation(const ConservationRun &base, const ConservationRun &half, double dt0)
{
    const double ratio = half.energy_drift > 0.0 ? base.energy_drift / half.energy_drift
                                                 : std::numeric_limits<double>::infinity();
    const bool pass = base.mass_drift <= 1e-8 && base.energy_drift <= 1e-6 && ratio >= 3.0;
    return {5, "conservation", pass,
            "dt=" + fmt(dt0) + ": mass drift " + fmt(base.mass_drift) + " (tol 1e-8), energy drift " +
                fmt(base.energy_drift) + " (tol 1e-6), halving ratio " + fmt(ratio) + " (min 3)"};
}

/// Fraction of interior records where the three-point second difference of
/// virial_V matches lvirial_rhs to 1e-3 relative.
inline std::pair<std::size_t, std::size_t> virial_matches(const std::vector<DiagnosticsRecord> &s)
{
    std::size_t good = 0;
    std::size_t total = 0;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        const double h1 = s[k].t - s[k - 1].t;
        const double h2 = s[k + 1].t - s[k].t;
        const double fd = 2.0 * ((s[k + 1].virial_V - s[k].virial_V) / h2 - (s[k].virial_V - s[k - 1].virial_V) / h1) /
                          (h1 + h2);
        ++total;
        if (std::abs(fd - s[k].lvirial_rhs) <= 1e-3 * std::abs(s[k].lvirial_rhs)) {
            ++good;
        }
    }
    return {good, total};
}

inline CriterionResult virial_identity(const ConservationRun &base)
{
    const auto [good, total] = virial_matches(base.series);
    const double frac = total ? double(good) / double(total) : 0.0;
    return {6, "virial identity", total > 0 && frac >= 0.95,
            std::to_string(good) + "/" + std::to_string(total) + " interior records within 1e-3 (min 95%)"};
}

/// Near-threshold data: r_max = 1200 leaves room for a taper wide enough
/// that cutting the 1/r tail of Q_1 keeps 0.9 Q_1 and 1.1 Q_1 below E*.
inline RunConfig dichotomy_config(double c)
{
    RunConfig cfg;
    cfg.b = 1.0;
    cfg.coefficient.family = Family::PurePower;
    cfg.initial.profile = ProfileKind::GroundState;
    cfg.initial.c = c;
    cfg.grid = {1200.0, 16383};
    if (c < 1.0) {
        cfg.controls.dt0 = 4e-3;
        cfg.controls.t_end = 40.0;
        cfg.controls.record_every = 0.25;
    } else {
        cfg.controls.dt0 = 1e-3;
        cfg.controls.t_end = 5.0;
        cfg.controls.record_every = 0.05;
        cfg.refine = true;
    }
    return cfg;
}

inline CriterionResult dichotomy()
{
    RunOptions opts;
    opts.write_files = false;
    const auto scatter = run_scenario(dichotomy_config(0.9), opts);
    const auto blowup = run_scenario(dichotomy_config(1.1), opts);
    const bool ok_s = scatter.verdict.kind == VerdictKind::GlobalScatterEvidence;
    const bool ok_b = blowup.verdict.kind == VerdictKind::BlowupEvidence;
    std::ostringstream os;
    os << "0.9 Q_1: " << to_string(scatter.assessment.region) << " -> " << to_string(scatter.verdict.kind)
       << " (s tail ratio " << fmt(scatter.verdict.s_tail_ratio) << ")";
    for (const auto &r : scatter.verdict.reasons) {
        os << " [" << r << "]";
    }
    os << "; 1.1 Q_1: " << to_string(blowup.assessment.region) << " -> " << to_string(blowup.verdict.kind)
       << " (stop t=" << format_double(blowup.stop_time);
    if (blowup.refinement) {
        os << ", refined t=" << format_double(blowup.refinement->stop_time);
    }
    os << ")";
    for (const auto &r : blowup.verdict.reasons) {
        os << " [" << r << "]";
    }
    return {7, "dichotomy evidence", ok_s && ok_b, os.str()};
}

inline CriterionResult scale_invariance()
{
    const auto params = ProblemParams::make(1.0);
    const auto g = Coefficient::pure_power(params);
    const GroundState gs(params);
    const auto report = check_conditions(g, 0.0);
    auto assess_at = [&](double lambda) {
        // phi_l(r) = l^{1/2} phi(l r) on the grid scaled by 1/l, so the samples coincide.
        const auto grid = RadialGrid::make(40.0 / lambda, 4096);
        const GaussianProfile prof{0.5 * std::sqrt(lambda), 1.0 / lambda};
        const auto state = prepare_initial(prof, grid, params).state;
        return classify_initial(state, g.rescaled(lambda), gs, report);
    };
    const auto ref = assess_at(1.0);
    double worst = 0.0;
    bool same_region = true;
    for (double lambda : {0.5, 2.0}) {
        const auto a = assess_at(lambda);
        same_region = same_region && a.region == ref.region && a.hypothesis_met == ref.hypothesis_met;
        for (auto field : {&RegionAssessment::energy_phi, &RegionAssessment::kinetic_phi,
                           &RegionAssessment::threshold_E, &RegionAssessment::threshold_K,
                           &RegionAssessment::energy_margin, &RegionAssessment::kinetic_margin,
                           &RegionAssessment::threshold_E_with_g}) {
            worst = std::max(worst, std::abs(a.*field - ref.*field));
        }
    }
    return {8, "scale invariance", same_region && worst <= 1e-10,
            "max field difference " + fmt(worst) + " over lambda in {1/2, 2} (tol 1e-10)"};
}

inline CriterionResult condition_checker()
{
    double worst_rigidity = 0.0;
    double worst_rho = 0.0;
    bool all_ok = true;
    for (double b : b_set()) {
        const auto params = ProblemParams::make(b);
        const auto rep = check_conditions(Coefficient::pure_power(params), 0.0);
        all_ok = all_ok && rep.scaling_ok && rep.variational_ok && rep.rigidity_ok && rep.virial_ok.value_or(false);
        worst_rigidity = std::max(worst_rigidity, std::abs(rep.margins.rigidity));
        const double expected = b / (params.p() + 1.0);
        worst_rho = std::max(worst_rho, rep.rho_max ? std::abs(*rep.rho_max - expected) : 1.0);
    }
    const auto rational = check_conditions(Coefficient::rational(1.0, 0.0, 1.0, ProblemParams::make(0.5)), 0.0);
    const bool pass = all_ok && worst_rigidity <= 1e-10 && worst_rho <= 1e-10 && !rational.variational_ok;
    return {9, "condition checker", pass,
            std::string("pure power all conditions ") + (all_ok ? "ok" : "FAILED") + ", rigidity margin " +
                fmt(worst_rigidity) + ", rho_max err " + fmt(worst_rho) + " (tol 1e-10); rational(1,0,1) variational_ok=" +
                (rational.variational_ok ? "true" : "false")};
}

template <class F>
CriterionResult timed(F &&f, double limit_seconds = 0.0)
{
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = f();
    } catch (const std::exception &e) {
        r.pass = false;
        r.measured = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_seconds > 0.0 && r.seconds > limit_seconds) {
        r.pass = false;
        r.measured += "; runtime " + fmt(r.seconds) + " s over limit " + fmt(limit_seconds) + " s";
    }
    return r;
}

} // namespace acceptance

/// Runs the acceptance criteria; failures are report content, never throws.
inline AcceptanceReport verify(const AcceptanceOptions &opts = {})
{
    using namespace acceptance;
    AcceptanceReport report;
    auto want = [&](int id) { return opts.only.empty() || opts.only.count(id) > 0; };
    auto add = [&](CriterionResult r) {
        if (opts.on_result) {
            opts.on_result(r);
        }
        report.results.push_back(std::move(r));
    };

    if (opts.test_config) {
        CriterionResult r{0, "test config validation", true, "valid"};
        try {
            validate(*opts.test_config);
        } catch (const ValidationError &e) {
            r.pass = false;
            r.measured = std::string("validation failure: ") + e.what();
        }
        add(r);
    }
    if (want(1)) {
        add(timed([] { return ground_state_closed_form(); }, 1.0));
    }
    if (want(2)) {
        add(timed([] { return pohozaev_balance(); }, 5.0));
    }
    if (want(3)) {
        add(timed([] { return ode_residual_check(); }));
    }
    if (want(4)) {
        add(timed([] { return shooting_consistency(); }, 10.0));
    }
    if (want(5) || want(6)) {
        const double dt0 = 1e-3 * opts.dt_scale;
        std::optional<ConservationRun> base;
        std::optional<ConservationRun> half;
        std::string failure;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            base = conservation_run(dt0);
            if (want(5)) {
                half = conservation_run(dt0 / 2.0);
            }
        } catch (const std::exception &e) {
            failure = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (want(5)) {
            auto r = base && half ? conservation(*base, *half, dt0) : CriterionResult{5, "conservation", false, failure};
            r.seconds = secs;
            add(r);
        }
        if (want(6)) {
            auto r = base ? virial_identity(*base) : CriterionResult{6, "virial identity", false, failure};
            r.seconds = secs;
            add(r);
        }
    }
    if (want(7)) {
        add(timed([] { return dichotomy(); }, 600.0));
    }
    if (want(8)) {
        add(timed([] { return scale_invariance(); }));
    }
    if (want(9)) {
        add(timed([] { return condition_checker(); }));
    }
    return report;
}

inline std::string format_result(const CriterionResult &r)
{
    std::ostringstream os;
    os << "criterion " << r.id << " [" << r.name << "]: " << (r.pass ? "PASS" : "FAIL") << " - " << r.measured
       << " (" << acceptance::fmt(r.seconds) << " s)";
    return os.str();
}

} // namespace inls
