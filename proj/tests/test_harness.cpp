#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "inls/acceptance.hpp"
#include "inls/harness.hpp"

using namespace inls;

namespace
{

std::filesystem::path scratch(const std::string &name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("inls_harness_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunConfig small_gaussian(const std::filesystem::path &dir)
{
    RunConfig cfg;
    cfg.initial.profile = ProfileKind::Gaussian;
    cfg.initial.amplitude = 0.5;
    cfg.grid = {400.0, 4095};
    cfg.controls.dt0 = 1e-2;
    cfg.controls.t_end = 10.0;
    cfg.controls.record_every = 0.25;
    cfg.output.dir = dir.string();
    return cfg;
}

} // namespace

TEST(Harness, InvalidGridNamesBlock)
{
    RunConfig cfg;
    cfg.grid.n = 0;
    try {
        run_scenario(cfg, {std::nullopt, false});
        FAIL();
    } catch (const ValidationError &e) {
        EXPECT_EQ(e.block(), "grid");
    }
}

TEST(Harness, StageNamedOnModuleError)
{
    RunConfig cfg;
    cfg.initial.profile = ProfileKind::Gaussian;
    cfg.initial.sigma = 30.0;
    cfg.grid = {40.0, 255};
    try {
        run_scenario(cfg, {std::nullopt, false});
        FAIL();
    } catch (const StageError &e) {
        EXPECT_EQ(e.stage(), "initial");
    }
}

TEST(Harness, SmallGaussianScattersAndReverdicts)
{
    const auto dir = scratch("scatter");
    const auto cfg = small_gaussian(dir);
    const auto rec = run_scenario(cfg);
    EXPECT_EQ(rec.assessment.region, Region::ScatterHypothesis);
    EXPECT_EQ(rec.stop_reason, StopReason::Completed);
    EXPECT_FALSE(rec.truncation_flag);
    EXPECT_EQ(rec.verdict.kind, VerdictKind::GlobalScatterEvidence);

    const auto hash = hash_hex(config_hash(cfg));
    EXPECT_EQ(rec.config_hash, hash);
    EXPECT_EQ(std::filesystem::path(rec.files.diagnostics).filename(), "run_" + hash + ".csv");
    EXPECT_EQ(std::filesystem::path(rec.files.verdict).filename(), "run_" + hash + ".json");
    const auto csv = slurp(rec.files.diagnostics);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "t,mass,energy,grad_norm_sq,potential,lp1_norm,virial_V,z_r,z_r_prime,lvirial_rhs,strauss_ratio,"
              "s_increment");
    const auto j = nlohmann::json::parse(slurp(rec.files.verdict));
    EXPECT_EQ(j["verdict"], "GlobalScatterEvidence");
    EXPECT_EQ(j["config_hash"], hash);

    const auto loaded = load_record(rec.files.verdict);
    EXPECT_EQ(loaded.series, rec.series);
    EXPECT_EQ(loaded.report, rec.report);
    EXPECT_EQ(loaded.verdict, rec.verdict);
    EXPECT_EQ(reverdict(loaded), rec.verdict);
    std::filesystem::remove_all(dir);
}

TEST(Harness, OutputDirPrecedence)
{
    RunConfig cfg;
    cfg.output.dir = "from_config";
    ::unsetenv(kOutDirEnv);
    EXPECT_EQ(resolve_output_dir(cfg, std::nullopt), "from_config");
    ::setenv(kOutDirEnv, "from_env", 1);
    EXPECT_EQ(resolve_output_dir(cfg, std::nullopt), "from_env");
    EXPECT_EQ(resolve_output_dir(cfg, std::string("from_flag")), "from_flag");
    ::unsetenv(kOutDirEnv);
}

TEST(Harness, ResumeFromCheckpoint)
{
    const auto dir = scratch("resume");
    auto cfg = small_gaussian(dir);
    cfg.grid = {100.0, 1023};
    cfg.controls.t_end = 1.0;
    cfg.controls.record_every = 0.1;
    cfg.controls.checkpoint_every = 0.5;
    const auto full = run_scenario(cfg);
    ASSERT_TRUE(std::filesystem::exists(full.files.checkpoint));
    // The last checkpoint is at t = 0.5; resuming rebuilds the remainder.
    const auto ck = read_checkpoint(full.files.checkpoint);
    EXPECT_NEAR(ck.state.t, 0.5, 1e-12);
    const auto saved = dir / "saved.ckpt";
    std::filesystem::copy_file(full.files.checkpoint, saved);
    RunOptions opts;
    opts.resume = saved.string();
    const auto resumed = run_scenario(cfg, opts);
    ASSERT_EQ(resumed.series.size(), full.series.size());
    for (std::size_t k = 0; k < full.series.size(); ++k) {
        EXPECT_NEAR(resumed.series[k].t, full.series[k].t, 1e-12);
        EXPECT_NEAR(resumed.series[k].energy, full.series[k].energy, 1e-10);
        EXPECT_NEAR(resumed.series[k].virial_V, full.series[k].virial_V, 1e-8 * full.series[k].virial_V);
    }
    EXPECT_EQ(resumed.verdict.kind, full.verdict.kind);

    auto other = cfg;
    other.grid.n = 511;
    opts.resume = saved.string();
    EXPECT_THROW(run_scenario(other, opts), StageError);
    std::filesystem::remove_all(dir);
}

TEST(Sweep, AmplitudeRowsOnScaledGroundState)
{
    const auto dir = scratch("sweep");
    RunConfig cfg;
    cfg.grid = {1200.0, 16383};
    cfg.controls.t_end = 0.02;
    cfg.controls.record_every = 0.01;
    cfg.sweep.amplitudes = {0.5, 0.9, 1.1, 1.5};
    cfg.output.dir = dir.string();
    const auto a = sweep(cfg, {}, 2);
    ASSERT_EQ(a.rows.size(), 4u);
    const Region expected[] = {Region::ScatterHypothesis, Region::ScatterHypothesis, Region::BlowupHypothesis,
                               Region::BlowupHypothesis};
    for (std::size_t k = 0; k < 4; ++k) {
        ASSERT_TRUE(a.rows[k].assessment) << a.rows[k].error;
        EXPECT_EQ(a.rows[k].assessment->region, expected[k]) << k;
        EXPECT_NE(a.rows[k].verdict, "Error");
    }
    const auto first = slurp(a.table_path);
    const auto b = sweep(cfg, {}, 1);
    EXPECT_EQ(slurp(b.table_path), first);
    EXPECT_EQ(first.substr(0, first.find('\n')), kPhaseTableHeader);
    std::filesystem::remove_all(dir);
}

TEST(Sweep, FailuresBecomeErrorRows)
{
    RunConfig cfg;
    cfg.initial.profile = ProfileKind::Gaussian;
    cfg.grid = {40.0, 255};
    cfg.controls.t_end = 0.01;
    cfg.sweep.widths = {1.0, 30.0};
    const auto res = sweep(cfg, {std::nullopt, false}, 2);
    ASSERT_EQ(res.rows.size(), 2u);
    EXPECT_NE(res.rows[0].verdict, "Error");
    EXPECT_EQ(res.rows[1].verdict, "Error");
    EXPECT_NE(res.rows[1].error.find("initial"), std::string::npos);
}

TEST(Sweep, EmptyCrossProductRejected)
{
    RunConfig cfg;
    EXPECT_THROW(sweep(cfg, {std::nullopt, false}), ValidationError);
    cfg.sweep.widths = {1.0};
    EXPECT_THROW(sweep_points(cfg), ValidationError);
}

TEST(Acceptance, FastCriteriaPass)
{
    AcceptanceOptions opts;
    opts.only = {1, 2, 3, 4, 8, 9};
    const auto report = verify(opts);
    ASSERT_EQ(report.results.size(), 6u);
    for (const auto &r : report.results) {
        EXPECT_TRUE(r.pass) << format_result(r);
    }
}

TEST(Acceptance, LargeStepFailsConservation)
{
    AcceptanceOptions opts;
    opts.only = {5};
    opts.dt_scale = 10.0;
    const auto report = verify(opts);
    ASSERT_EQ(report.results.size(), 1u);
    EXPECT_FALSE(report.results[0].pass);
    EXPECT_EQ(report.results[0].name, "conservation");
}

TEST(Acceptance, BadBReportedAsValidationFailure)
{
    AcceptanceOptions opts;
    opts.only = {1};
    RunConfig bad;
    bad.b = 1.5;
    opts.test_config = bad;
    const auto report = verify(opts);
    ASSERT_NE(report.find(0), nullptr);
    EXPECT_FALSE(report.find(0)->pass);
    EXPECT_NE(report.find(0)->measured.find("validation failure"), std::string::npos);
    EXPECT_FALSE(report.all_pass());
}
