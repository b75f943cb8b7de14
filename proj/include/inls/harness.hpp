#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "inls/checkpoint.hpp"
#include "inls/classifier.hpp"
#include "inls/coefficient.hpp"
#include "inls/config.hpp"
#include "inls/diagnostics.hpp"
#include "inls/error.hpp"
#include "inls/evolution.hpp"
#include "inls/ground_state.hpp"
#include "inls/virial_weight.hpp"

namespace inls
{

inline constexpr const char *kVersion = "1.0.0";
inline constexpr const char *kOutDirEnv = "INLS_OUT_DIR";

/// A module error re-raised with the pipeline stage that produced it.
class StageError : public Error
{
public:
    StageError(std::string stage, const std::string &what)
        : Error(stage + ": " + what), stage_(std::move(stage))
    {
    }
    const std::string &stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

template <class F>
auto run_stage(const std::string &stage, F &&f) -> decltype(f())
{
    try {
        return f();
    } catch (const StageError &) {
        throw;
    } catch (const ValidationError &) {
        throw;
    } catch (const std::exception &e) {
        throw StageError(stage, e.what());
    }
}

/// Output directory with precedence config < environment < flag.
inline std::string resolve_output_dir(const RunConfig &cfg, const std::optional<std::string> &flag)
{
    if (flag && !flag->empty()) {
        return *flag;
    }
    if (const char *env = std::getenv(kOutDirEnv); env && *env) {
        return env;
    }
    return cfg.output.dir;
}

struct GroundStateSummary
{
    double b = 0.0;
    double grad_norm_sq = 0.0;
    double potential_integral = 0.0;
    double threshold_energy = 0.0;
    double best_constant = 0.0;

    bool operator==(const GroundStateSummary &) const = default;
};

inline GroundStateSummary summarize(const GroundState &gs)
{
    return {gs.params().b(), gs.grad_norm_sq(), gs.potential_integral(), gs.threshold_energy(),
            gs.best_constant()};
}

struct RunFiles
{
    std::string diagnostics;
    std::string verdict;
    std::string checkpoint;
    std::string refine_diagnostics;
};

struct RunRecord
{
    RunConfig config;
    std::string config_hash;
    CoefficientReport report;
    GroundStateSummary ground_state;
    RegionAssessment assessment;
    std::vector<DiagnosticsRecord> series;
    StopReason stop_reason = StopReason::Completed;
    double stop_time = 0.0;
    bool truncation_flag = false;
    std::optional<double> truncation_time;
    std::size_t steps = 0;
    double min_dt = 0.0;
    std::string message;
    std::optional<RefinementCheck> refinement;
    Verdict verdict;
    std::string started;
    std::string finished;
    RunFiles files;
};

struct RunOptions
{
    std::optional<std::string> out_dir; // --out
    bool write_files = true;
    bool refine = false;                // --refine, OR-ed with the config
    std::optional<std::string> resume;  // checkpoint to continue from
};

namespace detail
{

inline std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline Profile make_profile(const RunConfig &cfg)
{
    const auto &in = cfg.initial;
    switch (in.profile) {
    case ProfileKind::Gaussian: return GaussianProfile{in.amplitude, in.sigma};
    case ProfileKind::GroundState: return GroundStateProfile{in.c, in.lambda, in.taper_start, in.taper_end};
    case ProfileKind::Tabulated: {
        auto [r, phi] = read_table(resolve(cfg, in.table), "initial");
        return TabulatedProfile{std::move(r), std::move(phi)};
    }
    }
    throw ValidationError("initial", "unknown profile");
}

inline void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    os << text;
    if (!os) {
        throw Error("write failed for " + path.string());
    }
}

} // namespace detail

/// Everything derived from the config before time stepping.
struct Setup
{
    ProblemParams params;
    Coefficient g;
    CoefficientReport report;
    GroundState gs;
    VirialWeight weight;
};

inline Coefficient build_coefficient(const RunConfig &cfg)
{
    auto spec = cfg.coefficient;
    if (spec.family == Family::Tabulated && spec.table_r.empty()) {
        auto [r, g] = read_table(resolve(cfg, cfg.coefficient_table), "coefficient");
        spec.table_r = std::move(r);
        spec.table_g = std::move(g);
    }
    return make_coefficient(spec, cfg.params());
}

/// Condition report with rho taken from the config, or the largest
/// admissible value when the config leaves it open.
inline CoefficientReport build_report(const Coefficient &g, const ClassifierSpec &spec)
{
    if (spec.rho) {
        return check_conditions(g, *spec.rho);
    }
    auto rep = check_conditions(g, 0.0);
    if (rep.rho_max && *rep.rho_max > 0.0) {
        rep = check_conditions(g, *rep.rho_max);
    }
    return rep;
}

inline Setup prepare_setup(const RunConfig &cfg)
{
    validate(cfg);
    const auto params = cfg.params();
    auto g = run_stage("coefficient", [&] { return build_coefficient(cfg); });
    auto report = run_stage("coefficient", [&] { return build_report(g, cfg.classifier); });
    auto gs = run_stage("groundstate", [&] { return GroundState(params); });
    auto weight = run_stage("diagnostics", [&] { return VirialWeight::make(cfg.weight.kind, cfg.weight.scale); });
    return {params, std::move(g), std::move(report), std::move(gs), std::move(weight)};
}

inline VerdictInput verdict_input(const RunRecord &rec)
{
    VerdictInput in;
    in.region = rec.assessment;
    in.stop_reason = rec.stop_reason;
    in.stop_time = rec.stop_time;
    in.truncation_flag = rec.truncation_flag;
    in.series = rec.series;
    in.refinement = rec.refinement;
    in.eta = rec.config.classifier.eta;
    in.transient_fraction = rec.config.classifier.transient_fraction;
    return in;
}

/// File stem shared by every output of one run.
inline std::string run_stem(const RunConfig &cfg) { return cfg.output.prefix + "_" + hash_hex(config_hash(cfg)); }

// ---------------------------------------------------------------------------
// JSON of the run record

inline nlohmann::json to_json(const CoefficientReport &r)
{
    auto opt = [](const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"gi", r.gi},
            {"gs", r.gs},
            {"gs_eff", r.gs_eff},
            {"g0", r.g0},
            {"kg", opt(r.kg)},
            {"rho_max", opt(r.rho_max)},
            {"rho", r.rho},
            {"tolerance", r.tolerance},
            {"scaling_ok", r.scaling_ok},
            {"variational_ok", r.variational_ok},
            {"rigidity_ok", r.rigidity_ok},
            {"virial_ok", r.virial_ok ? nlohmann::json(*r.virial_ok) : nlohmann::json(nullptr)},
            {"derivative_bound", r.derivative_bound},
            {"margins",
             {{"scaling", r.margins.scaling},
              {"variational", r.margins.variational},
              {"rigidity", r.margins.rigidity},
              {"virial", opt(r.margins.virial)}}},
            {"grid", {{"r_min", r.grid.r_min}, {"r_max", r.grid.r_max}, {"count", r.grid.count}}}};
}

inline CoefficientReport coefficient_report_from_json(const nlohmann::json &j)
{
    auto opt = [](const nlohmann::json &v) { return v.is_null() ? std::optional<double>{} : v.get<double>(); };
    CoefficientReport r;
    r.gi = j.at("gi").get<double>();
    r.gs = j.at("gs").get<double>();
    r.gs_eff = j.at("gs_eff").get<double>();
    r.g0 = j.at("g0").get<double>();
    r.kg = opt(j.at("kg"));
    r.rho_max = opt(j.at("rho_max"));
    r.rho = j.at("rho").get<double>();
    r.tolerance = j.at("tolerance").get<double>();
    r.scaling_ok = j.at("scaling_ok").get<bool>();
    r.variational_ok = j.at("variational_ok").get<bool>();
    r.rigidity_ok = j.at("rigidity_ok").get<bool>();
    if (!j.at("virial_ok").is_null()) {
        r.virial_ok = j.at("virial_ok").get<bool>();
    }
    r.derivative_bound = j.at("derivative_bound").get<double>();
    const auto &m = j.at("margins");
    r.margins = {m.at("scaling").get<double>(), m.at("variational").get<double>(), m.at("rigidity").get<double>(),
                 opt(m.at("virial"))};
    const auto &g = j.at("grid");
    r.grid = {g.at("r_min").get<double>(), g.at("r_max").get<double>(), g.at("count").get<std::size_t>()};
    return r;
}

inline nlohmann::json to_json(const GroundStateSummary &s)
{
    return {{"b", s.b},
            {"grad_norm_sq", s.grad_norm_sq},
            {"potential_integral", s.potential_integral},
            {"threshold_energy", s.threshold_energy},
            {"best_constant", s.best_constant}};
}

/// Verdict fields at the top level, then the full record needed to
/// re-derive the verdict.
inline nlohmann::json to_json(const RunRecord &rec)
{
    auto j = to_json(rec.verdict, rec.assessment);
    j["config_hash"] = rec.config_hash;
    j["config"] = to_ini(rec.config);
    j["coefficient_report"] = to_json(rec.report);
    j["ground_state"] = to_json(rec.ground_state);
    j["assessment"] = to_json(rec.assessment);
    j["run"] = {{"stop_time", rec.stop_time},
                {"truncation_flag", rec.truncation_flag},
                {"truncation_time", rec.truncation_time ? nlohmann::json(*rec.truncation_time) : nlohmann::json(nullptr)},
                {"steps", rec.steps},
                {"min_dt", rec.min_dt},
                {"records", rec.series.size()},
                {"message", rec.message}};
    if (rec.refinement) {
        j["refinement"] = {{"stop_reason", to_string(rec.refinement->stop_reason)},
                           {"stop_time", rec.refinement->stop_time},
                           {"n", rec.refinement->n}};
    } else {
        j["refinement"] = nullptr;
    }
    j["provenance"] = {{"version", kVersion}, {"started", rec.started}, {"finished", rec.finished}};
    j["files"] = {{"diagnostics", std::filesystem::path(rec.files.diagnostics).filename().string()},
                  {"checkpoint", std::filesystem::path(rec.files.checkpoint).filename().string()},
                  {"refine_diagnostics", std::filesystem::path(rec.files.refine_diagnostics).filename().string()}};
    return j;
}

// ---------------------------------------------------------------------------
// Scenario

namespace detail
{

struct EvolveOutcome
{
    EvolveResult result;
    std::vector<DiagnosticsRecord> series;
};

inline EvolveOutcome evolve_to_csv(RadialState start, const Setup &s, EvolveControls controls,
                                   const std::optional<std::filesystem::path> &csv,
                                   std::vector<DiagnosticsRecord> prefix, const CheckpointSink &checkpoint,
                                   bool emit_initial)
{
    std::ofstream os;
    if (csv) {
        os.open(*csv, std::ios::trunc);
        if (!os) {
            throw Error("cannot open " + csv->string() + " for writing");
        }
        os.precision(17);
        write_csv_header(os);
        for (const auto &r : prefix) {
            write_csv_row(os, r);
        }
        os.flush();
    }
    DiagnosticsSink sink;
    if (csv) {
        sink = [&os](const DiagnosticsRecord &r) {
            write_csv_row(os, r);
            os.flush();
        };
    }
    auto result = evolve(std::move(start), s.g, controls, s.weight, sink, checkpoint, emit_initial);
    prefix.insert(prefix.end(), result.series.begin(), result.series.end());
    return {std::move(result), std::move(prefix)};
}

} // namespace detail

/// coefficient -> ground state -> initial data -> region -> evolution ->
/// optional refinement companion -> verdict, writing the diagnostics CSV,
/// verdict JSON and checkpoints named after the config hash.
inline RunRecord run_scenario(const RunConfig &cfg_in, const RunOptions &opts = {})
{
    RunRecord rec;
    rec.started = detail::utc_now();
    rec.config = cfg_in;
    rec.config.refine = cfg_in.refine || opts.refine;
    const auto &cfg = rec.config;
    const auto setup = prepare_setup(cfg);
    rec.config_hash = hash_hex(config_hash(cfg));
    rec.report = setup.report;
    rec.ground_state = summarize(setup.gs);

    const auto profile = run_stage("initial", [&] { return detail::make_profile(cfg); });
    const auto grid = run_stage("initial", [&] { return RadialGrid::make(cfg.grid.r_max, cfg.grid.n); });
    const auto prepared = run_stage("initial", [&] { return prepare_initial(profile, grid, setup.params); });
    rec.assessment =
        run_stage("classifier", [&] { return classify_initial(prepared.state, setup.g, setup.gs, setup.report); });

    std::filesystem::path dir;
    std::optional<std::filesystem::path> csv;
    std::optional<std::filesystem::path> ckpt_path;
    if (opts.write_files) {
        dir = resolve_output_dir(cfg, opts.out_dir);
        run_stage("output", [&] { return std::filesystem::create_directories(dir); });
        const auto stem = run_stem(cfg);
        csv = dir / (stem + ".csv");
        ckpt_path = dir / (stem + ".ckpt");
        rec.files.diagnostics = csv->string();
        rec.files.verdict = (dir / (stem + ".json")).string();
        if (cfg.controls.checkpoint_every > 0.0) {
            rec.files.checkpoint = ckpt_path->string();
        }
    }

    const std::uint64_t hash = config_hash(cfg);
    CheckpointSink sink;
    if (ckpt_path && cfg.controls.checkpoint_every > 0.0) {
        sink = [&](const RadialState &s, double reference) {
            write_checkpoint(*ckpt_path, {s, cfg.b, reference, hash});
        };
    }

    RadialState start = prepared.state;
    EvolveControls controls = cfg.controls;
    std::vector<DiagnosticsRecord> prefix;
    bool emit_initial = true;
    if (opts.resume) {
        const auto ck = run_stage("evolution", [&] { return read_checkpoint(*opts.resume); });
        if (ck.config_hash != hash) {
            throw StageError("evolution", "checkpoint belongs to config " + hash_hex(ck.config_hash) +
                                              ", not " + rec.config_hash);
        }
        if (ck.state.grid.n() != grid.n() || ck.state.grid.r_max() != grid.r_max()) {
            throw StageError("evolution", "checkpoint grid does not match the config");
        }
        start = ck.state;
        controls.reference_grad_norm_sq = ck.reference_grad_norm_sq;
        emit_initial = false;
        if (csv && std::filesystem::exists(*csv)) {
            std::ifstream is(*csv);
            for (const auto &r : read_csv(is)) {
                if (r.t <= ck.state.t * (1.0 + 1e-14)) {
                    prefix.push_back(r);
                }
            }
        }
    }

    auto outcome = run_stage("evolution", [&] {
        return detail::evolve_to_csv(std::move(start), setup, controls, csv, std::move(prefix), sink,
                                     emit_initial);
    });
    rec.series = std::move(outcome.series);
    rec.stop_reason = outcome.result.stop_reason;
    rec.stop_time = outcome.result.stop_time;
    rec.truncation_flag = outcome.result.truncation_flag;
    rec.truncation_time = outcome.result.truncation_time;
    rec.steps = outcome.result.steps;
    rec.min_dt = outcome.result.min_dt;
    rec.message = outcome.result.message;

    if (cfg.refine) {
        // Doubled resolution: n -> 2n + 1 halves dr exactly.
        RunConfig fine = cfg;
        fine.grid.n = 2 * cfg.grid.n + 1;
        const auto fine_grid = RadialGrid::make(fine.grid.r_max, fine.grid.n);
        const auto fine_state =
            run_stage("refinement", [&] { return prepare_initial(profile, fine_grid, setup.params).state; });
        std::optional<std::filesystem::path> fine_csv;
        if (opts.write_files) {
            fine_csv = dir / (run_stem(cfg) + "_refine.csv");
            rec.files.refine_diagnostics = fine_csv->string();
        }
        auto fine_out = run_stage("refinement", [&] {
            return detail::evolve_to_csv(fine_state, setup, cfg.controls, fine_csv, {}, {}, true);
        });
        rec.refinement = RefinementCheck{fine_out.result.stop_reason, fine_out.result.stop_time, fine.grid.n};
    }

    rec.verdict = run_stage("classifier", [&] { return verdict(verdict_input(rec), setup.gs, setup.report); });
    rec.finished = detail::utc_now();
    if (opts.write_files) {
        run_stage("output", [&] {
            detail::write_text(rec.files.verdict, to_json(rec).dump(2) + "\n");
            return 0;
        });
    }
    return rec;
}

/// Reads a verdict JSON and its diagnostics CSV back into a record.
inline RunRecord load_record(const std::filesystem::path &json_path)
{
    std::ifstream is(json_path);
    if (!is) {
        throw ValidationError("record", "cannot open " + json_path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError("record", e.what());
    }
    try {
        RunRecord rec;
        rec.config = parse_ini(j.at("config").get<std::string>());
        rec.config_hash = j.at("config_hash").get<std::string>();
        rec.report = coefficient_report_from_json(j.at("coefficient_report"));
        const auto &gs = j.at("ground_state");
        rec.ground_state = {gs.at("b").get<double>(), gs.at("grad_norm_sq").get<double>(),
                            gs.at("potential_integral").get<double>(), gs.at("threshold_energy").get<double>(),
                            gs.at("best_constant").get<double>()};
        rec.assessment = region_assessment_from_json(j.at("assessment"));
        rec.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
        const auto &run = j.at("run");
        rec.stop_time = run.at("stop_time").get<double>();
        rec.truncation_flag = run.at("truncation_flag").get<bool>();
        if (!run.at("truncation_time").is_null()) {
            rec.truncation_time = run.at("truncation_time").get<double>();
        }
        rec.steps = run.at("steps").get<std::size_t>();
        rec.min_dt = run.at("min_dt").get<double>();
        rec.message = run.at("message").get<std::string>();
        if (!j.at("refinement").is_null()) {
            const auto &r = j.at("refinement");
            rec.refinement = RefinementCheck{stop_reason_from_string(r.at("stop_reason").get<std::string>()),
                                             r.at("stop_time").get<double>(), r.at("n").get<std::size_t>()};
        }
        rec.started = j.at("provenance").at("started").get<std::string>();
        rec.finished = j.at("provenance").at("finished").get<std::string>();
        const auto dir = json_path.parent_path();
        rec.files.verdict = json_path.string();
        rec.files.diagnostics = (dir / j.at("files").at("diagnostics").get<std::string>()).string();
        std::ifstream csv(rec.files.diagnostics);
        if (!csv) {
            throw ValidationError("record", "cannot open " + rec.files.diagnostics);
        }
        rec.series = read_csv(csv);

        rec.verdict.kind = verdict_kind_from_string(j.at("verdict").get<std::string>());
        rec.verdict.region = region_from_string(j.at("region").get<std::string>());
        rec.verdict.stop_reason = rec.stop_reason;
        for (const auto &e : j.at("evidence")) {
            rec.verdict.evidence.push_back(evidence_from_json(e));
        }
        rec.verdict.reasons = j.at("reasons").get<std::vector<std::string>>();
        rec.verdict.s_tail_ratio = j.at("s_tail_ratio").get<double>();
        if (j.contains("refinement_consistent")) {
            rec.verdict.refinement_consistent = j.at("refinement_consistent").get<bool>();
        }
        return rec;
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError("record", e.what());
    }
}

/// Verdict recomputed from the stored series and report alone.
inline Verdict reverdict(const RunRecord &rec)
{
    const GroundState gs(ProblemParams::make(rec.config.b));
    return verdict(verdict_input(rec), gs, rec.report);
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepPoint
{
    double amplitude = 0.0;
    double width = 0.0;
    double lambda = 0.0;
};

struct SweepRow
{
    std::size_t index = 0;
    SweepPoint point;
    std::string config_hash;
    std::optional<RegionAssessment> assessment;
    std::string verdict; // VerdictKind name or "Error"
    std::string stop_reason;
    std::string error;
};

/// Cross product of the sweep lists. A list left empty contributes the
/// base config's value. Amplitude means A for a Gaussian and c for the
/// ground state; widths apply to Gaussians, lambdas to the ground state.
inline std::vector<SweepPoint> sweep_points(const RunConfig &cfg)
{
    const auto &sw = cfg.sweep;
    const auto &in = cfg.initial;
    if (sw.empty()) {
        throw ValidationError("sweep", "no sweep lists given");
    }
    if (in.profile == ProfileKind::Tabulated) {
        throw ValidationError("sweep", "tabulated profiles cannot be swept");
    }
    if (in.profile == ProfileKind::Gaussian && !sw.lambdas.empty()) {
        throw ValidationError("sweep", "lambdas apply to ground_state profiles only");
    }
    if (in.profile == ProfileKind::GroundState && !sw.widths.empty()) {
        throw ValidationError("sweep", "widths apply to gaussian profiles only");
    }
    const bool gaussian = in.profile == ProfileKind::Gaussian;
    auto or_base = [](const std::vector<double> &v, double base) {
        return v.empty() ? std::vector<double>{base} : v;
    };
    const auto amps = or_base(sw.amplitudes, gaussian ? in.amplitude : in.c);
    const auto widths = or_base(sw.widths, in.sigma);
    const auto lambdas = or_base(sw.lambdas, in.lambda);
    std::vector<SweepPoint> out;
    for (double a : amps) {
        for (double w : widths) {
            for (double l : lambdas) {
                out.push_back({a, w, l});
            }
        }
    }
    return out;
}

inline RunConfig sweep_config(const RunConfig &cfg, const SweepPoint &pt)
{
    RunConfig c = cfg;
    c.sweep = {};
    if (c.initial.profile == ProfileKind::Gaussian) {
        c.initial.amplitude = pt.amplitude;
        c.initial.sigma = pt.width;
    } else {
        c.initial.c = pt.amplitude;
        c.initial.lambda = pt.lambda;
    }
    return c;
}

inline constexpr const char *kPhaseTableHeader =
    "index,amplitude,width,lambda,energy_phi,kinetic_phi,region,verdict,stop_reason,config_hash,error";

inline std::string phase_table_row(const SweepRow &r)
{
    auto quote = [](std::string s) {
        std::replace(s.begin(), s.end(), '"', '\'');
        return "\"" + s + "\"";
    };
    std::ostringstream os;
    os << r.index << ',' << format_double(r.point.amplitude) << ',' << format_double(r.point.width) << ','
       << format_double(r.point.lambda) << ',';
    if (r.assessment) {
        os << format_double(r.assessment->energy_phi) << ',' << format_double(r.assessment->kinetic_phi) << ','
           << to_string(r.assessment->region);
    } else {
        os << ",,";
    }
    os << ',' << r.verdict << ',' << r.stop_reason << ',' << r.config_hash << ',' << quote(r.error);
    return os.str();
}

inline std::string phase_table(const std::vector<SweepRow> &rows)
{
    std::string out = std::string(kPhaseTableHeader) + "\n";
    for (const auto &r : rows) {
        out += phase_table_row(r) + "\n";
    }
    return out;
}

struct SweepResult
{
    std::vector<SweepRow> rows;
    std::string table_path;
};

/// Runs every sweep point, `threads` at a time. Rows are ordered by point
/// index whatever the completion order; failures become verdict=Error rows.
inline SweepResult sweep(const RunConfig &cfg, const RunOptions &opts = {}, unsigned threads = 1)
{
    validate(cfg);
    const auto points = sweep_points(cfg);
    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < points.size(); k = next++) {
            SweepRow &row = rows[k];
            row.index = k;
            row.point = points[k];
            try {
                const auto c = sweep_config(cfg, points[k]);
                row.config_hash = hash_hex(config_hash(c));
                const auto rec = run_scenario(c, opts);
                row.assessment = rec.assessment;
                row.verdict = std::string(to_string(rec.verdict.kind));
                row.stop_reason = std::string(to_string(rec.stop_reason));
            } catch (const std::exception &e) {
                row.verdict = "Error";
                row.error = e.what();
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, unsigned(points.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }

    SweepResult out{std::move(rows), {}};
    if (opts.write_files) {
        const std::filesystem::path dir = resolve_output_dir(cfg, opts.out_dir);
        std::filesystem::create_directories(dir);
        const auto path = dir / (cfg.output.prefix + "_sweep_" + hash_hex(config_hash(cfg)) + ".csv");
        detail::write_text(path, phase_table(out.rows));
        out.table_path = path.string();
    }
    return out;
}

} // namespace inls
