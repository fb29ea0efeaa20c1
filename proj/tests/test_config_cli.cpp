#include "mpbia/cli.hpp"
#include "mpbia/config.hpp"
#include "mpbia/error.hpp"
#include "mpbia/toy_full.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace mpbia;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / ("mpbia_test_" + std::string(info->test_suite_name()) + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    const std::string text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    }
    return files;
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "mpbia");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

RunConfig small_config() {
    RunConfig config = default_config();
    config.grid = {40, 40};
    return config;
}

}  // namespace

TEST(ParseQuantity, UnitsConvertToSi) {
    EXPECT_EQ(parse_quantity(json(5.0), Dimension::Pressure, "k"), 5.0);
    EXPECT_EQ(parse_quantity(json("11 kPa"), Dimension::Pressure, "k"), 11e3);
    EXPECT_EQ(parse_quantity(json("2 MPa"), Dimension::Pressure, "k"), 2e6);
    EXPECT_DOUBLE_EQ(parse_quantity(json("10 mm"), Dimension::Length, "k"), 0.01);
    EXPECT_DOUBLE_EQ(parse_quantity(json("400 mN"), Dimension::Force, "k"), 0.4);
    EXPECT_EQ(parse_quantity(json("1 V"), Dimension::Voltage, "k"), 1.0);
    EXPECT_EQ(parse_quantity(json("0.1 Ohm m"), Dimension::Resistivity, "k"), 0.1);
    EXPECT_EQ(parse_quantity(json("0.35"), Dimension::None, "k"), 0.35);
    EXPECT_EQ(parse_quantity(json("inf"), Dimension::Pressure, "k"), std::numeric_limits<double>::infinity());
    EXPECT_EQ(parse_quantity(json("-inf"), Dimension::None, "k"), -std::numeric_limits<double>::infinity());
}

TEST(ParseQuantity, RejectsBadInput) {
    EXPECT_THROW((void)parse_quantity(json("11 furlongs"), Dimension::Length, "k"), ConfigError);
    EXPECT_THROW((void)parse_quantity(json("10 mm"), Dimension::Pressure, "k"), ConfigError);
    EXPECT_THROW((void)parse_quantity(json("ten kPa"), Dimension::Pressure, "k"), ConfigError);
    EXPECT_THROW((void)parse_quantity(json(true), Dimension::None, "k"), ConfigError);
    try {
        (void)parse_quantity(json("1 parsec"), Dimension::Length, "constants.side_length");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("constants.side_length"), std::string::npos);
    }
}

TEST(Config, DefaultsAreValid) {
    const RunConfig em = default_config();
    EXPECT_NO_THROW(em.validate());
    EXPECT_EQ(em.truth, (std::vector<double>{11e3, 0.35}));
    ASSERT_EQ(em.fields.size(), 2u);
    EXPECT_EQ(em.field(1)->observations.count, 16u);
    EXPECT_EQ(em.field(2)->observations.snr, 1.2e4);
    EXPECT_EQ(em.parameter_names(), (std::vector<std::string>{"E", "nu"}));
    const RunConfig toy = default_config("toy-full");
    EXPECT_NO_THROW(toy.validate());
    EXPECT_EQ(toy.parameter_names(), (std::vector<std::string>{"x1", "x2"}));
    EXPECT_THROW((void)default_config("nonsense"), ConfigError);
}

TEST(Config, JsonOverridesWithUnits) {
    const json doc = json::parse(R"({
        "model": "electromech",
        "constants": {"side_length": "10 mm", "voltage": "1 V", "resistivity": "0.1 Ohm m"},
        "truth": ["12 kPa", 0.3],
        "prior": {"mean": ["10 kPa", 0.3], "stddev": ["2 kPa", 0.15], "lower": [0, 0], "upper": ["inf", 0.5]},
        "fields": [{"id": 1, "count": 8, "snr": 50, "range": ["0 N", "400 mN"]}],
        "grid": [30, 20],
        "likelihood": "unit",
        "workers": 2
    })");
    const RunConfig c = config_from_json(doc);
    EXPECT_EQ(c.truth[0], 12e3);
    EXPECT_DOUBLE_EQ(c.prior.variance[0], 4e6);
    EXPECT_DOUBLE_EQ(c.prior.variance[1], 0.0225);
    EXPECT_TRUE(std::isinf(c.prior.upper[0]));
    // Field entries merge into the defaults by id.
    ASSERT_EQ(c.fields.size(), 2u);
    EXPECT_EQ(c.field(1)->observations.count, 8u);
    EXPECT_DOUBLE_EQ(c.field(1)->observations.coord_max, 0.4);
    EXPECT_EQ(c.field(2)->observations.count, 2u);
    EXPECT_EQ(c.grid, (std::vector<std::size_t>{30, 20}));
    EXPECT_EQ(c.likelihood, LikelihoodScale::Unit);
    EXPECT_EQ(c.workers, 2);
}

TEST(Config, UnknownKeysAreRejected) {
    EXPECT_THROW((void)config_from_json(json::parse(R"({"modle": "electromech"})")), ConfigError);
    EXPECT_THROW((void)config_from_json(json::parse(R"({"prior": {"mean": [1, 1], "sigma": [1, 1]}})")),
                 ConfigError);
    EXPECT_THROW((void)config_from_json(json::parse(R"({"fields": [{"id": 1, "cnt": 3}]})")), ConfigError);
    EXPECT_THROW((void)config_from_json(json::parse(R"({"sweep": {"n_obs2": {"min": 1, "maximum": 9}}})")),
                 ConfigError);
    EXPECT_THROW((void)config_from_json(json::parse(R"({"grid": [1, 10]})")), ConfigError);
    EXPECT_THROW((void)config_from_json(json::parse(R"({"likelihood": "cauchy"})")), ConfigError);
    EXPECT_THROW((void)config_from_json(json::parse(R"([1, 2])")), ConfigError);
}

TEST(Config, EchoRoundTrips) {
    for (const std::string model : {"electromech", "toy-full"}) {
        const RunConfig c = default_config(model);
        const nlohmann::ordered_json echo = config_to_json(c);
        const RunConfig back = config_from_json(json::parse(echo.dump()));
        EXPECT_EQ(config_to_json(back).dump(), echo.dump()) << model;
        EXPECT_EQ(back.truth, c.truth);
        EXPECT_EQ(back.prior.variance, c.prior.variance);
    }
}

TEST(Config, LoadFromFile) {
    TempDir tmp;
    const fs::path p = tmp.path() / "c.json";
    std::ofstream(p) << R"({"model": "toy-full", "grid": [12, 12]})";
    const RunConfig c = load_config(p.string());
    EXPECT_EQ(c.model, "toy-full");
    EXPECT_EQ(c.grid, (std::vector<std::size_t>{12, 12}));
    std::ofstream(tmp.path() / "bad.json") << "{ not json";
    EXPECT_THROW((void)load_config((tmp.path() / "bad.json").string()), ConfigError);
    EXPECT_THROW((void)load_config((tmp.path() / "missing.json").string()), ConfigError);
}

TEST(Config, ShippedExamplesMatchTheBuiltInDefaults) {
    const fs::path dir = fs::path(MPBIA_SOURCE_DIR) / "configs";
    for (const auto& [file, model] : {std::pair{"electromech.json", "electromech"}, std::pair{"toy_full.json", "toy-full"}}) {
        RunConfig loaded = load_config((dir / file).string());
        RunConfig defaults = default_config(model);
        loaded.output_dir = defaults.output_dir;
        EXPECT_EQ(config_to_json(loaded).dump(), config_to_json(defaults).dump()) << file;
    }
}

TEST(Hashing, Fnv1aTestVectors) {
    EXPECT_EQ(content_hash(""), "cbf29ce484222325");
    EXPECT_EQ(content_hash("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(content_hash("foobar"), "85944171f73967e8");
    EXPECT_NE(prior_hash(electromech_prior()), prior_hash(toy::toy_prior()));
}

TEST(CliParsing, FieldListsAndGrids) {
    EXPECT_TRUE(cli::parse_field_list("").empty());
    EXPECT_TRUE(cli::parse_field_list("none").empty());
    EXPECT_EQ(cli::parse_field_list("1"), (std::vector<FieldId>{1}));
    EXPECT_EQ(cli::parse_field_list("1,2"), (std::vector<FieldId>{1, 2}));
    EXPECT_THROW((void)cli::parse_field_list("1,,2"), ConfigError);
    EXPECT_THROW((void)cli::parse_field_list("x"), ConfigError);
    EXPECT_EQ(cli::parse_grid("50", 2), (std::vector<std::size_t>{50, 50}));
    EXPECT_EQ(cli::parse_grid("50,30", 2), (std::vector<std::size_t>{50, 30}));
    EXPECT_THROW((void)cli::parse_grid("50,30,10", 2), ConfigError);
    EXPECT_THROW((void)cli::parse_grid("fifty", 2), ConfigError);
}

TEST(Synthesize, WritesOneFilePerField) {
    TempDir tmp;
    const std::vector<fs::path> paths = cli::cmd_synthesize(default_config(), tmp.path());
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_EQ(paths[0].filename(), "observations_field1.csv");
    EXPECT_EQ(line_count(paths[0]), 17u);
    EXPECT_EQ(line_count(paths[1]), 3u);
    EXPECT_EQ(slurp(paths[0]).substr(0, slurp(paths[0]).find('\n')), "field_id,coordinate,value,sigma2,snr");
}

TEST(Synthesize, HighSnrReproducesTheModel) {
    RunConfig config = default_config();
    config.fields[0].observations.snr = 1e18;
    const auto model = make_model(config);
    const std::vector<FieldObservations> obs = cli::synthesize_fields(config, *model);
    const std::vector<double> exact = model->evaluate_field(config.truth, 1, obs[0].coordinates);
    for (std::size_t i = 0; i < exact.size(); ++i) {
        EXPECT_NEAR(obs[0].values[i], exact[i], 1e-8 * std::abs(exact[i]) + 1e-20);
    }
}

TEST(Synthesize, ZeroCountWritesHeaderOnly) {
    TempDir tmp;
    RunConfig config = default_config();
    config.fields[1].observations.count = 0;
    const std::vector<fs::path> paths = cli::cmd_synthesize(config, tmp.path());
    EXPECT_EQ(line_count(paths[1]), 1u);
    const auto model = make_model(config);
    EXPECT_EQ(cli::load_observations(paths[1].string(), *model).count(), 0u);
}

TEST(Posterior, FieldSelectionControlsInformation) {
    const RunConfig config = small_config();
    const auto model = make_model(config);
    const std::vector<FieldObservations> all = cli::synthesize_fields(config, *model);

    const std::vector<FieldId> none;
    const std::vector<FieldId> first{1};
    const std::vector<FieldId> both{1, 2};
    const cli::PosteriorRun prior_only = cli::run_posterior(config, *model, cli::select_fields(all, none));
    const cli::PosteriorRun single = cli::run_posterior(config, *model, cli::select_fields(all, first));
    const cli::PosteriorRun multi = cli::run_posterior(config, *model, cli::select_fields(all, both));
    EXPECT_NEAR(prior_only.information_gain, 0.0, 1e-9);
    EXPECT_GT(single.information_gain, 0.0);
    EXPECT_GT(multi.information_gain, single.information_gain);
    for (const auto* r : {&prior_only, &single, &multi}) {
        EXPECT_NEAR(trapezoid_integral(r->posterior.axes, r->posterior.density), 1.0, 1e-9);
    }
    EXPECT_EQ(single.sidecar.at("fields"), nlohmann::ordered_json::array({1}));
    EXPECT_EQ(single.sidecar.at("model_hash"), multi.sidecar.at("model_hash"));
    EXPECT_EQ(single.sidecar.at("grid_hash"), multi.sidecar.at("grid_hash"));

    const std::vector<FieldId> missing{3};
    EXPECT_THROW((void)cli::select_fields(all, missing), ConfigError);
}

TEST(Riig, CompareRunsChecksProvenance) {
    const RunConfig config = small_config();
    const auto model = make_model(config);
    const std::vector<FieldObservations> all = cli::synthesize_fields(config, *model);
    const std::vector<FieldId> first{1};
    const std::vector<FieldId> both{1, 2};
    const cli::PosteriorRun single = cli::run_posterior(config, *model, cli::select_fields(all, first));
    const cli::PosteriorRun multi = cli::run_posterior(config, *model, cli::select_fields(all, both));

    const json s = json::parse(single.sidecar.dump());
    const json m = json::parse(multi.sidecar.dump());
    EXPECT_EQ(cli::compare_runs(s, s).riig, 0.0);
    const cli::RiigReport report = cli::compare_runs(s, m);
    EXPECT_EQ(report.riig, riig(single.information_gain, multi.information_gain));

    // Different grid.
    RunConfig coarse = config;
    coarse.grid = {30, 30};
    const json other = json::parse(cli::run_posterior(coarse, *model, all).sidecar.dump());
    EXPECT_THROW((void)cli::compare_runs(s, other), ProvenanceError);

    // Multi run missing the single run's field.
    const std::vector<FieldId> second{2};
    const json only2 = json::parse(cli::run_posterior(config, *model, cli::select_fields(all, second)).sidecar.dump());
    EXPECT_THROW((void)cli::compare_runs(s, only2), ProvenanceError);

    // Tampered observation hash.
    json tampered = m;
    tampered["observation_hashes"]["1"] = "0000000000000000";
    EXPECT_THROW((void)cli::compare_runs(s, tampered), ProvenanceError);
}

TEST(Cli, VersionHelpAndUsageErrors) {
    const CliResult version = run_cli({"--version"});
    EXPECT_EQ(version.code, 0);
    EXPECT_NE(version.out.find(cli::kToolVersion), std::string::npos);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({"reproduce", "fig11"}).code, 2);
    EXPECT_EQ(run_cli({"--config", "/nonexistent/config.json", "synthesize"}).code, 2);
    EXPECT_EQ(run_cli({"--grid", "zero", "synthesize"}).code, 2);
}

TEST(Cli, BadConfigFileIsAUsageError) {
    TempDir tmp;
    const fs::path p = tmp.path() / "c.json";
    std::ofstream(p) << R"({"model": "electromech", "colour": "blue"})";
    const CliResult r = run_cli({"--config", p.string(), "synthesize", "--out", (tmp.path() / "o").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("colour"), std::string::npos);
}

TEST(Cli, SynthesizePosteriorRiigPipeline) {
    TempDir tmp;
    const std::string out = tmp.path().string();
    ASSERT_EQ(run_cli({"synthesize", "--out", out}).code, 0);
    const std::string f1 = (tmp.path() / "observations_field1.csv").string();
    const std::string f2 = (tmp.path() / "observations_field2.csv").string();

    const CliResult s = run_cli({"posterior", "--obs", f1, "--name", "single", "--out", out, "--grid", "40"});
    ASSERT_EQ(s.code, 0) << s.err;
    const CliResult m = run_cli({"posterior", "--obs", f1, f2, "--name", "multi", "--out", out, "--grid", "40"});
    ASSERT_EQ(m.code, 0) << m.err;
    const CliResult p = run_cli({"posterior", "--fields=", "--name", "prior", "--out", out, "--grid", "40"});
    ASSERT_EQ(p.code, 0) << p.err;
    EXPECT_TRUE(fs::exists(tmp.path() / "single.csv"));
    EXPECT_EQ(line_count(tmp.path() / "single.csv"), 40u * 40u + 1u);

    const json prior = cli::read_json((tmp.path() / "prior.json").string());
    EXPECT_NEAR(prior.at("information_gain").get<double>(), 0.0, 1e-9);

    const CliResult r = run_cli({"riig", (tmp.path() / "single.json").string(), (tmp.path() / "multi.json").string(),
                                 "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    const json report = cli::read_json((tmp.path() / "riig.json").string());
    EXPECT_GT(report.at("riig").get<double>(), 0.0);

    const CliResult same = run_cli(
        {"riig", (tmp.path() / "single.json").string(), (tmp.path() / "single.json").string(), "--out", out});
    ASSERT_EQ(same.code, 0);
    EXPECT_NE(same.out.find("riig 0\n"), std::string::npos);

    const CliResult coarse = run_cli({"posterior", "--obs", f1, f2, "--name", "coarse", "--out", out, "--grid", "30"});
    ASSERT_EQ(coarse.code, 0);
    const CliResult mismatch = run_cli(
        {"riig", (tmp.path() / "single.json").string(), (tmp.path() / "coarse.json").string(), "--out", out});
    EXPECT_EQ(mismatch.code, 2);
    EXPECT_NE(mismatch.err.find("grid"), std::string::npos);
}

TEST(Cli, SweepWritesOneRowPerCell) {
    TempDir tmp;
    const CliResult r = run_cli({"sweep", "--out", tmp.path().string(), "--grid", "30"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(line_count(tmp.path() / "sweep.csv"), 61u);
    const json manifest = cli::read_json((tmp.path() / "manifest.json").string());
    EXPECT_EQ(manifest.at("cells").get<int>(), 60);
    EXPECT_EQ(manifest.at("sweep_csv_hash").get<std::string>(), content_hash(slurp(tmp.path() / "sweep.csv")));
    EXPECT_TRUE(fs::exists(tmp.path() / "timing.json"));
    EXPECT_NE(r.err.find("sweep: row 10/10 done"), std::string::npos);
}

TEST(Cli, ReproduceIsByteDeterministicAcrossRunsAndWorkers) {
    TempDir tmp;
    const fs::path a = tmp.path() / "a";
    const fs::path b = tmp.path() / "b";
    const fs::path c = tmp.path() / "c";
    ASSERT_EQ(run_cli({"reproduce", "fig9", "--out", a.string()}).code, 0);
    ASSERT_EQ(run_cli({"reproduce", "fig9", "--out", b.string()}).code, 0);
    ASSERT_EQ(run_cli({"reproduce", "fig9", "--out", c.string(), "--workers", "3"}).code, 0);
    const auto first = directory_contents(a);
    EXPECT_EQ(first.size(), 12u);
    EXPECT_EQ(directory_contents(b), first);
    EXPECT_EQ(directory_contents(c), first);
}

TEST(Cli, ToyModelRunsEndToEnd) {
    TempDir tmp;
    const fs::path cfg = tmp.path() / "toy.json";
    std::ofstream(cfg) << R"({"model": "toy-full", "grid": [30, 30]})";
    const CliResult r = run_cli({"--config", cfg.string(), "posterior", "--out", tmp.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json sidecar = cli::read_json((tmp.path() / "posterior.json").string());
    EXPECT_EQ(sidecar.at("model").get<std::string>(), "toy-full");
    EXPECT_GT(sidecar.at("information_gain").get<double>(), 0.0);
}
