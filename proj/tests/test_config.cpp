#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "inls/config.hpp"

using namespace inls;

namespace
{

const char *kIni = R"([coefficient]
family = rational
b = 0.5
a = 1
d = 0
c = 1

[initial]
profile = gaussian
amplitude = 0.3
sigma = 2

[grid]
r_max = 50
n = 1023

[controls]
dt0 = 0.002
t_end = 3
record_every = 0.1
scheme = strang

[sweep]
amplitudes = 0.1, 0.2
)";

} // namespace

TEST(Config, ParsesIni)
{
    const auto cfg = parse_ini(kIni);
    EXPECT_EQ(cfg.b, 0.5);
    EXPECT_EQ(cfg.coefficient.family, Family::Rational);
    EXPECT_EQ(cfg.coefficient.a, 1.0);
    EXPECT_EQ(cfg.initial.profile, ProfileKind::Gaussian);
    EXPECT_EQ(cfg.initial.sigma, 2.0);
    EXPECT_EQ(cfg.grid.n, 1023u);
    EXPECT_EQ(cfg.controls.scheme, Scheme::Strang);
    EXPECT_EQ(cfg.sweep.amplitudes, (std::vector<double>{0.1, 0.2}));
    EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, RejectsUnknownKeysAndSections)
{
    EXPECT_THROW(parse_ini("[grid]\nn = 5\nbogus = 1\n"), ValidationError);
    EXPECT_THROW(parse_ini("[nonsense]\nx = 1\n"), ValidationError);
    EXPECT_THROW(parse_json(R"({"grid": {"n": 5, "bogus": 1}})"), ValidationError);
    try {
        parse_ini("[grid]\nbogus = 1\n");
        FAIL();
    } catch (const ValidationError &e) {
        EXPECT_EQ(e.block(), "grid");
    }
}

TEST(Config, RejectsBadValues)
{
    EXPECT_THROW(parse_ini("[grid]\nn = abc\n"), ValidationError);
    EXPECT_THROW(parse_ini("[grid]\nr_max = 1x\n"), ValidationError);
    EXPECT_THROW(parse_ini("[coefficient]\nfamily = wobbly\n"), Error);
}

TEST(Config, JsonMatchesIni)
{
    const auto json = parse_json(R"({
      "coefficient": {"family": "rational", "b": 0.5, "a": 1, "d": 0, "c": 1},
      "initial": {"profile": "gaussian", "amplitude": 0.3, "sigma": 2},
      "grid": {"r_max": 50, "n": 1023},
      "controls": {"dt0": 0.002, "t_end": 3, "record_every": 0.1, "scheme": "strang"},
      "sweep": {"amplitudes": [0.1, 0.2]}
    })");
    EXPECT_EQ(json, parse_ini(kIni));
}

TEST(Config, RoundTripIsIdempotent)
{
    const auto cfg = parse_ini(kIni);
    const auto text = to_ini(cfg);
    const auto again = parse_ini(text);
    EXPECT_EQ(again, cfg);
    EXPECT_EQ(to_ini(again), text);
    RunConfig defaults;
    EXPECT_EQ(parse_ini(to_ini(defaults)), defaults);
}

TEST(Config, HashIgnoresOutputOnly)
{
    auto cfg = parse_ini(kIni);
    const auto h = config_hash(cfg);
    cfg.output.dir = "elsewhere";
    cfg.output.prefix = "other";
    EXPECT_EQ(config_hash(cfg), h);
    cfg.grid.n = 2047;
    EXPECT_NE(config_hash(cfg), h);
    EXPECT_EQ(hash_hex(0x1234), "0000000000001234");
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, ValidationNamesBlock)
{
    auto expect_block = [](RunConfig cfg, const std::string &block) {
        try {
            validate(cfg);
            FAIL() << "expected failure in " << block;
        } catch (const ValidationError &e) {
            EXPECT_EQ(e.block(), block);
        }
    };
    RunConfig cfg;
    cfg.grid.n = 0;
    expect_block(cfg, "grid");
    cfg = {};
    cfg.b = 1.5;
    expect_block(cfg, "coefficient");
    cfg = {};
    cfg.controls.dt0 = 0.0;
    expect_block(cfg, "controls");
    cfg = {};
    cfg.initial.lambda = -1.0;
    expect_block(cfg, "initial");
    cfg = {};
    cfg.classifier.transient_fraction = 1.0;
    expect_block(cfg, "classifier");
    cfg = {};
    cfg.weight.scale = 0.0;
    expect_block(cfg, "weight");
}

TEST(Config, LoadsFilesAndTables)
{
    const auto dir = std::filesystem::temp_directory_path() / "inls_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "run.ini") << kIni;
        std::ofstream(dir / "run.json") << R"({"grid": {"n": 7}})";
        std::ofstream(dir / "table.csv") << "r,g\n1,2\n2,3\n# comment\n3,4\n";
    }
    const auto ini = load_config(dir / "run.ini");
    EXPECT_EQ(ini.base_dir, dir.string());
    EXPECT_EQ(load_config(dir / "run.json").grid.n, 7u);
    const auto [r, v] = read_table(resolve(ini, "table.csv"), "coefficient");
    EXPECT_EQ(r, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(v, (std::vector<double>{2, 3, 4}));
    EXPECT_THROW(load_config(dir / "missing.ini"), ValidationError);
    std::filesystem::remove_all(dir);
}
