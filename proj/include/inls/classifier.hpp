#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "inls/coefficient.hpp"
#include "inls/diagnostics.hpp"
#include "inls/error.hpp"
#include "inls/evolution.hpp"
#include "inls/ground_state.hpp"
#include "inls/radial.hpp"

namespace inls
{

enum class Region
{
    ScatterHypothesis,
    BlowupHypothesis,
    AboveThreshold,
};

inline std::string_view to_string(Region r)
{
    switch (r) {
    case Region::ScatterHypothesis: return "ScatterHypothesis";
    case Region::BlowupHypothesis: return "BlowupHypothesis";
    case Region::AboveThreshold: return "AboveThreshold";
    }
    return "unknown";
}

inline Region region_from_string(std::string_view s)
{
    if (s == "ScatterHypothesis") return Region::ScatterHypothesis;
    if (s == "BlowupHypothesis") return Region::BlowupHypothesis;
    if (s == "AboveThreshold") return Region::AboveThreshold;
    throw ValidationError("verdict", "unknown region '" + std::string(s) + "'");
}

struct RegionAssessment
{
    double energy_phi = 0.0;
    double kinetic_phi = 0.0; // gs_eff ||phi||^2_{H^1-dot}
    double threshold_E = 0.0;
    double threshold_K = 0.0;
    Region region = Region::AboveThreshold;
    double energy_margin = 0.0;  // threshold_E - energy_phi
    double kinetic_margin = 0.0; // threshold_K - kinetic_phi
    /// E_g(Q_b) with the run's g, reported next to the pure-power threshold.
    double threshold_E_with_g = 0.0;
    /// False when the variational condition fails, so the theorems do not apply.
    bool hypothesis_met = true;

    bool operator==(const RegionAssessment &) const = default;
};

/// Region from the four numbers alone.
inline Region classify_region(double energy, double kinetic, double threshold_E, double threshold_K)
{
    if (energy < threshold_E) {
        return kinetic < threshold_K ? Region::ScatterHypothesis : Region::BlowupHypothesis;
    }
    return Region::AboveThreshold;
}

inline RegionAssessment assess(double energy, double grad_sq, const GroundState &gs, const CoefficientReport &report,
                               double threshold_E_with_g)
{
    RegionAssessment a;
    a.energy_phi = energy;
    a.kinetic_phi = report.gs_eff * grad_sq;
    a.threshold_E = gs.threshold_energy();
    a.threshold_K = gs.grad_norm_sq();
    a.region = classify_region(a.energy_phi, a.kinetic_phi, a.threshold_E, a.threshold_K);
    a.energy_margin = a.threshold_E - a.energy_phi;
    a.kinetic_margin = a.threshold_K - a.kinetic_phi;
    a.threshold_E_with_g = threshold_E_with_g;
    a.hypothesis_met = report.variational_ok;
    return a;
}

/// Compares E_g(phi) and gs_eff ||phi||^2 on the grid with the ground-state
/// thresholds.
inline RegionAssessment classify_initial(const RadialState &phi, const Coefficient &g, const GroundState &gs,
                                         const CoefficientReport &report)
{
    double with_g = std::numeric_limits<double>::quiet_NaN();
    try {
        with_g = energy_with_coefficient(gs, g);
    } catch (const Error &) {
        // Tabulated g that does not cover (0, inf): the comparison number is
        // informational only.
    }
    return assess(energy(phi, g), grad_norm_sq(phi), gs, report, with_g);
}

// ---------------------------------------------------------------------------
// Monitors

enum class EvidenceStatus
{
    Pass,
    Fail,
    NotApplicable,
};

inline std::string_view to_string(EvidenceStatus s)
{
    switch (s) {
    case EvidenceStatus::Pass: return "pass";
    case EvidenceStatus::Fail: return "fail";
    case EvidenceStatus::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

inline EvidenceStatus evidence_status_from_string(std::string_view s)
{
    if (s == "pass") return EvidenceStatus::Pass;
    if (s == "fail") return EvidenceStatus::Fail;
    if (s == "not_applicable") return EvidenceStatus::NotApplicable;
    throw ValidationError("verdict", "unknown evidence status '" + std::string(s) + "'");
}

/// One monitored statement with its worst margin over the run. Positive
/// margins mean the statement held with room to spare.
struct Evidence
{
    std::string monitor;
    std::string statement;
    EvidenceStatus status = EvidenceStatus::NotApplicable;
    double margin = 0.0;
    double worst_time = 0.0;

    bool operator==(const Evidence &) const = default;
};

/// Coercivity band [kCoercivityLow, kCoercivityHigh] x (E/||grad u||^2 at t = 0).
inline constexpr double kCoercivityLow = 0.5;
inline constexpr double kCoercivityHigh = 2.0;

/// Checks at every record, for a run that starts in the scattering region:
///   gs_eff ||grad u||^2 < ||grad Q_b||^2,
///   E / ||grad u||^2 stays inside the band calibrated at the first record,
///   ||grad u||^2 - int g |u|^{p+1} >= 0.
inline std::vector<Evidence> monitor_trapping(const std::vector<DiagnosticsRecord> &series, const GroundState &gs,
                                              const CoefficientReport &report, Region region)
{
    const char *name = "trapping";
    if (region != Region::ScatterHypothesis) {
        return {{name, "run did not start in the scattering region", EvidenceStatus::NotApplicable, 0.0, 0.0}};
    }
    if (series.empty()) {
        return {{name, "no records", EvidenceStatus::NotApplicable, 0.0, 0.0}};
    }
    const double K = gs.grad_norm_sq();
    const double ratio0 = series.front().grad_norm_sq > 0.0 ? series.front().energy / series.front().grad_norm_sq : 0.0;

    Evidence kinetic{name, "gs_eff*grad_norm_sq < threshold_K at every record", EvidenceStatus::Pass,
                     std::numeric_limits<double>::infinity(), series.front().t};
    Evidence coercive{name,
                      "energy/grad_norm_sq within [0.5, 2] x its initial value " + format_double(ratio0),
                      EvidenceStatus::Pass, std::numeric_limits<double>::infinity(), series.front().t};
    Evidence positive{name, "grad_norm_sq - potential >= 0 at every record", EvidenceStatus::Pass,
                      std::numeric_limits<double>::infinity(), series.front().t};
    for (const auto &r : series) {
        const double k = K - report.gs_eff * r.grad_norm_sq;
        if (k < kinetic.margin) {
            kinetic.margin = k;
            kinetic.worst_time = r.t;
        }
        if (r.grad_norm_sq > 0.0) {
            const double ratio = r.energy / r.grad_norm_sq;
            const double c = std::min(ratio - kCoercivityLow * ratio0, kCoercivityHigh * ratio0 - ratio);
            if (c < coercive.margin) {
                coercive.margin = c;
                coercive.worst_time = r.t;
            }
        }
        const double pos = r.grad_norm_sq - r.potential;
        if (pos < positive.margin) {
            positive.margin = pos;
            positive.worst_time = r.t;
        }
    }
    for (auto *e : {&kinetic, &coercive, &positive}) {
        if (!std::isfinite(e->margin)) {
            e->margin = 0.0; // zero state: the band is empty and trivially respected
        }
    }
    kinetic.status = kinetic.margin > 0.0 ? EvidenceStatus::Pass : EvidenceStatus::Fail;
    coercive.status = coercive.margin >= 0.0 ? EvidenceStatus::Pass : EvidenceStatus::Fail;
    positive.status = positive.margin >= 0.0 ? EvidenceStatus::Pass : EvidenceStatus::Fail;
    return {kinetic, coercive, positive};
}

/// grad_norm_sq - (1 - eta) potential for one record.
inline double negativity_quantity(const DiagnosticsRecord &r, double eta)
{
    return r.grad_norm_sq - (1.0 - eta) * r.potential;
}

/// Checks at every record, for a run that starts in the blowup region:
///   ||grad u||^2 - (1 - eta) int g |u|^{p+1} < 0,
/// and that virial_V is concave over consecutive record triples once the
/// first transient_fraction of the run has passed.
inline std::vector<Evidence> monitor_negative(const std::vector<DiagnosticsRecord> &series, const GroundState &gs,
                                              const CoefficientReport &report, double eta, Region region,
                                              double transient_fraction = 0.1)
{
    (void)gs;
    if (!report.kg) {
        throw ParameterDomainError("eta needs k_g, which is undefined when g0 >= p0 + 1");
    }
    if (!(eta >= 0.0) || eta > *report.kg) {
        throw ParameterDomainError("eta = " + format_double(eta) + " outside [0, k_g = " +
                                   format_double(*report.kg) + "]");
    }
    const char *name = "negativity";
    if (region != Region::BlowupHypothesis) {
        return {{name, "run did not start in the blowup region", EvidenceStatus::NotApplicable, 0.0, 0.0}};
    }
    if (series.empty()) {
        return {{name, "no records", EvidenceStatus::NotApplicable, 0.0, 0.0}};
    }

    Evidence neg{name, "grad_norm_sq - (1-eta)*potential < 0 at every record (eta = " + format_double(eta) + ")",
                 EvidenceStatus::Pass, std::numeric_limits<double>::infinity(), series.front().t};
    for (const auto &r : series) {
        const double m = -negativity_quantity(r, eta);
        if (m < neg.margin) {
            neg.margin = m;
            neg.worst_time = r.t;
        }
    }
    neg.status = neg.margin > 0.0 ? EvidenceStatus::Pass : EvidenceStatus::Fail;

    Evidence concave{"concavity", "virial_V second difference <= 0 after transients", EvidenceStatus::NotApplicable,
                     0.0, 0.0};
    const double t0 = series.front().t;
    const double t_after = t0 + transient_fraction * (series.back().t - t0);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < series.size(); ++k) {
        const auto &a = series[k - 1];
        const auto &b = series[k];
        const auto &c = series[k + 1];
        if (a.t < t_after) {
            continue;
        }
        const double h1 = b.t - a.t;
        const double h2 = c.t - b.t;
        if (!(h1 > 0.0 && h2 > 0.0)) {
            continue;
        }
        const double second = 2.0 * ((c.virial_V - b.virial_V) / h2 - (b.virial_V - a.virial_V) / h1) / (h1 + h2);
        // Cancellation floor of the differences.
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                             std::max({std::abs(a.virial_V), std::abs(b.virial_V), std::abs(c.virial_V)}) /
                             (std::min(h1, h2) * (h1 + h2));
        const double m = noise - second;
        if (m < worst) {
            worst = m;
            concave.worst_time = b.t;
        }
    }
    if (std::isfinite(worst)) {
        concave.margin = worst;
        concave.status = worst >= 0.0 ? EvidenceStatus::Pass : EvidenceStatus::Fail;
    } else {
        concave.statement += " (fewer than three records after transients)";
    }
    return {neg, concave};
}

// ---------------------------------------------------------------------------
// Verdict

enum class VerdictKind
{
    GlobalScatterEvidence,
    BlowupEvidence,
    Inconclusive,
};

inline std::string_view to_string(VerdictKind v)
{
    switch (v) {
    case VerdictKind::GlobalScatterEvidence: return "GlobalScatterEvidence";
    case VerdictKind::BlowupEvidence: return "BlowupEvidence";
    case VerdictKind::Inconclusive: return "Inconclusive";
    }
    return "unknown";
}

inline VerdictKind verdict_kind_from_string(std::string_view s)
{
    if (s == "GlobalScatterEvidence") return VerdictKind::GlobalScatterEvidence;
    if (s == "BlowupEvidence") return VerdictKind::BlowupEvidence;
    if (s == "Inconclusive") return VerdictKind::Inconclusive;
    throw ValidationError("verdict", "unknown verdict '" + std::string(s) + "'");
}

/// Outcome of the doubled-resolution companion run.
struct RefinementCheck
{
    StopReason stop_reason = StopReason::Completed;
    double stop_time = 0.0;
    std::size_t n = 0;

    bool operator==(const RefinementCheck &) const = default;
};

/// Everything the verdict depends on; stored with every run so the verdict
/// can be recomputed from disk.
struct VerdictInput
{
    RegionAssessment region;
    StopReason stop_reason = StopReason::Completed;
    double stop_time = 0.0;
    bool truncation_flag = false;
    std::vector<DiagnosticsRecord> series;
    std::optional<RefinementCheck> refinement;
    double eta = 0.0;
    double transient_fraction = 0.1;
};

struct Verdict
{
    VerdictKind kind = VerdictKind::Inconclusive;
    Region region = Region::AboveThreshold;
    StopReason stop_reason = StopReason::Completed;
    std::vector<Evidence> evidence;
    std::vector<std::string> reasons; // why a stronger verdict was not issued
    double s_tail_ratio = 0.0;        // last s_increment / peak s_increment
    std::optional<bool> refinement_consistent;

    bool operator==(const Verdict &) const = default;
};

inline constexpr double kScatterTailRatio = 1e-3;

/// Ratio of the final window's s_increment to the largest one; 0 when
/// nothing accumulated.
inline double s_tail_ratio(const std::vector<DiagnosticsRecord> &series)
{
    double peak = 0.0;
    for (const auto &r : series) {
        peak = std::max(peak, r.s_increment);
    }
    if (series.empty() || peak == 0.0) {
        return 0.0;
    }
    return series.back().s_increment / peak;
}

/// Refinement is consistent when the companion also stops on grad growth
/// and does so no later than the base run.
inline bool refinement_consistent(const RefinementCheck &c, StopReason base_reason, double base_time)
{
    return base_reason == StopReason::BlowupStop && c.stop_reason == StopReason::BlowupStop &&
           c.stop_time <= base_time;
}

inline Verdict verdict(const VerdictInput &in, const GroundState &gs, const CoefficientReport &report)
{
    Verdict v;
    v.region = in.region.region;
    v.stop_reason = in.stop_reason;
    v.s_tail_ratio = s_tail_ratio(in.series);

    auto trapping = monitor_trapping(in.series, gs, report, v.region);
    std::vector<Evidence> negative;
    if (report.kg) {
        negative = monitor_negative(in.series, gs, report, in.eta, v.region, in.transient_fraction);
    } else {
        negative = {{"negativity", "k_g undefined (g0 >= p0 + 1)", EvidenceStatus::NotApplicable, 0.0, 0.0}};
    }
    v.evidence = trapping;
    v.evidence.insert(v.evidence.end(), negative.begin(), negative.end());

    const bool tail_ok = v.s_tail_ratio < kScatterTailRatio || (v.s_tail_ratio == 0.0 && !in.series.empty());
    v.evidence.push_back({"s_increment",
                          "final s_increment < 1e-3 x peak (heuristic: bounded L10 norm read as scattering)",
                          tail_ok ? EvidenceStatus::Pass : EvidenceStatus::Fail, kScatterTailRatio - v.s_tail_ratio,
                          in.series.empty() ? 0.0 : in.series.back().t});
    if (in.refinement) {
        v.refinement_consistent = refinement_consistent(*in.refinement, in.stop_reason, in.stop_time);
        v.evidence.push_back({"refinement",
                              "companion with n = " + std::to_string(in.refinement->n) + " stops by " +
                                  std::string(to_string(in.refinement->stop_reason)) + " at t = " +
                                  format_double(in.refinement->stop_time),
                              *v.refinement_consistent ? EvidenceStatus::Pass : EvidenceStatus::Fail,
                              in.stop_time - in.refinement->stop_time, in.refinement->stop_time});
    }

    auto all_pass = [](const std::vector<Evidence> &items) {
        return std::all_of(items.begin(), items.end(),
                           [](const Evidence &e) { return e.status == EvidenceStatus::Pass; });
    };

    if (in.truncation_flag) {
        v.reasons.push_back("boundary reflection flagged (truncation warning)");
    }
    if (!in.region.hypothesis_met) {
        v.reasons.push_back("variational condition fails; theorem hypotheses unmet");
    }
    if (v.region == Region::ScatterHypothesis) {
        if (in.stop_reason != StopReason::Completed) {
            v.reasons.push_back("run did not complete (" + std::string(to_string(in.stop_reason)) + ")");
        }
        if (!tail_ok) {
            v.reasons.push_back("s_increment tail ratio " + format_double(v.s_tail_ratio) + " not below 1e-3");
        }
        if (!all_pass(trapping)) {
            v.reasons.push_back("trapping monitor violated");
        }
        if (v.reasons.empty()) {
            v.kind = VerdictKind::GlobalScatterEvidence;
        }
    } else if (v.region == Region::BlowupHypothesis) {
        if (in.stop_reason != StopReason::BlowupStop) {
            v.reasons.push_back("no blowup stop (" + std::string(to_string(in.stop_reason)) + ")");
        }
        if (!all_pass(negative)) {
            v.reasons.push_back("negativity or concavity monitor violated");
        }
        if (!in.refinement) {
            v.reasons.push_back("refinement companion not run (use --refine)");
        } else if (!*v.refinement_consistent) {
            v.reasons.push_back("refinement companion inconsistent");
        }
        if (v.reasons.empty()) {
            v.kind = VerdictKind::BlowupEvidence;
        }
    } else {
        v.reasons.push_back("initial data above threshold; no prediction");
    }
    return v;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Evidence &e)
{
    return {{"monitor", e.monitor},
            {"statement", e.statement},
            {"status", to_string(e.status)},
            {"margin", e.margin},
            {"worst_time", e.worst_time}};
}

inline Evidence evidence_from_json(const nlohmann::json &j)
{
    return {j.at("monitor").get<std::string>(), j.at("statement").get<std::string>(),
            evidence_status_from_string(j.at("status").get<std::string>()), j.at("margin").get<double>(),
            j.at("worst_time").get<double>()};
}

inline nlohmann::json to_json(const RegionAssessment &a)
{
    return {{"energy_phi", a.energy_phi},
            {"kinetic_phi", a.kinetic_phi},
            {"threshold_E", a.threshold_E},
            {"threshold_K", a.threshold_K},
            {"region", to_string(a.region)},
            {"energy_margin", a.energy_margin},
            {"kinetic_margin", a.kinetic_margin},
            {"threshold_E_with_g", std::isfinite(a.threshold_E_with_g) ? nlohmann::json(a.threshold_E_with_g)
                                                                       : nlohmann::json(nullptr)},
            {"hypothesis_met", a.hypothesis_met}};
}

inline RegionAssessment region_assessment_from_json(const nlohmann::json &j)
{
    RegionAssessment a;
    a.energy_phi = j.at("energy_phi").get<double>();
    a.kinetic_phi = j.at("kinetic_phi").get<double>();
    a.threshold_E = j.at("threshold_E").get<double>();
    a.threshold_K = j.at("threshold_K").get<double>();
    a.region = region_from_string(j.at("region").get<std::string>());
    a.energy_margin = j.at("energy_margin").get<double>();
    a.kinetic_margin = j.at("kinetic_margin").get<double>();
    const auto &wg = j.at("threshold_E_with_g");
    a.threshold_E_with_g = wg.is_null() ? std::numeric_limits<double>::quiet_NaN() : wg.get<double>();
    a.hypothesis_met = j.at("hypothesis_met").get<bool>();
    return a;
}

/// {region, verdict, stop_reason, margins{...}, evidence[...]} plus reasons.
inline nlohmann::json to_json(const Verdict &v, const RegionAssessment &a)
{
    nlohmann::json margins = {{"energy", a.energy_margin},
                              {"kinetic", a.kinetic_margin},
                              {"s_tail", kScatterTailRatio - v.s_tail_ratio}};
    for (const auto &e : v.evidence) {
        if (e.status != EvidenceStatus::NotApplicable) {
            margins[e.monitor + ":" + e.statement.substr(0, e.statement.find(' '))] = e.margin;
        }
    }
    nlohmann::json evidence = nlohmann::json::array();
    for (const auto &e : v.evidence) {
        evidence.push_back(to_json(e));
    }
    nlohmann::json out = {{"region", to_string(v.region)},
                          {"verdict", to_string(v.kind)},
                          {"stop_reason", to_string(v.stop_reason)},
                          {"margins", margins},
                          {"evidence", evidence},
                          {"reasons", v.reasons},
                          {"s_tail_ratio", v.s_tail_ratio}};
    if (v.refinement_consistent) {
        out["refinement_consistent"] = *v.refinement_consistent;
    }
    return out;
}

} // namespace inls
